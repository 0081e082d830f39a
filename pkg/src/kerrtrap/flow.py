"""Hamilton flows of p and of phi-hat^u, and the travel-time function T^s."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import dual as dn
from . import polynomial as poly
from .errors import DomainExit, NoCrossing, NoInteriorCritical, StepFailure
from .integrators import IntegratorSpec, Solution, hermite, integrate
from .phase_space import COORDS, PhasePoint, ScalarField, check_point, hamilton_rhs, symbol
from .spacetime import THETA_MIN, BlackHoleParams, exterior
from .trapping import RadialProfile, in_neighborhood, phi_s_reduced, phi_u_reduced, radial_profile, s_bracket

DEFAULT_SPEC = IntegratorSpec()
CSV_HEADER = ("s",) + COORDS + ("p_residual",)


@dataclass
class Trajectory:
    s: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    integrator: dict
    params: BlackHoleParams
    exit_reason: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_solution(cls, sol: Solution, params: BlackHoleParams, spec: IntegratorSpec) -> "Trajectory":
        traj = cls(np.array(sol.s), np.array(sol.y), np.array(sol.dy), spec.describe(), params, sol.exit_reason)
        p = traj.p_values()
        traj.diagnostics = {
            "p_drift": float(np.max(np.abs(p - p[0]))),
            "xi_t_drift": float(np.max(np.abs(traj.y[:, 4] - traj.y[0, 4]))),
            "xi_phi_drift": float(np.max(np.abs(traj.y[:, 7] - traj.y[0, 7]))),
        }
        return traj

    def __len__(self):
        return len(self.s)

    @property
    def samples(self) -> list:
        return [(float(s), PhasePoint.from_seq(y)) for s, y in zip(self.s, self.y)]

    @property
    def final(self) -> PhasePoint:
        return PhasePoint.from_seq(self.y[-1])

    def p_values(self) -> np.ndarray:
        y = self.y
        return np.asarray(symbol(self.params, y[:, 1], y[:, 2], y[:, 4], y[:, 5], y[:, 6], y[:, 7]))

    def at(self, s: float) -> PhasePoint:
        """Dense output by cubic Hermite interpolation."""
        sgn = 1.0 if self.s[-1] >= self.s[0] else -1.0
        key = sgn * np.asarray(self.s)
        if not key[0] <= sgn * s <= key[-1]:
            raise ValueError(f"s={s} outside the integrated range")
        i = int(np.clip(np.searchsorted(key, sgn * s) - 1, 0, len(key) - 2))
        y = hermite(self.s[i], self.y[i], self.dy[i], self.s[i + 1], self.y[i + 1], self.dy[i + 1], s)
        return PhasePoint.from_seq(y)

    def to_csv(self, target=None) -> str:
        """Write the trajectory as CSV (17 significant digits); returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        p = self.p_values()
        for s, y, pr in zip(self.s, self.y, p):
            w.writerow([f"{v:.17g}" for v in (s, *y, pr)])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text


FAR_FACTOR = 1e3


def flow_domain(params: BlackHoleParams) -> tuple[float, float]:
    """Radial window for integration: the exterior, cut at FAR_FACTOR * r_e when there is no cosmological horizon.

    Escaping H_p orbits reach r = infinity in finite parameter when Lambda = 0.
    """
    lo, hi = exterior(params)
    if math.isinf(hi):
        hi = FAR_FACTOR * lo
    return lo, hi


def domain_checker(params: BlackHoleParams, theta_min: float = THETA_MIN):
    lo, hi = flow_domain(params)
    th_hi = math.pi - theta_min

    def check(y):
        r, th = y[1], y[2]
        if not lo < r < hi:
            return f"r={r} left the exterior"
        if not theta_min <= th <= th_hi:
            return f"theta={th} left the pole band"
        return None

    return check


def _finish(sol, params, spec, strict):
    if sol.exit_reason and strict:
        raise DomainExit(sol.exit_reason)
    return Trajectory.from_solution(sol, params, spec)


def factored_rhs(params: BlackHoleParams, xi_t: float, xi_phi: float, rescale: bool = False):
    """H_p with the radial force written as c^2 (r - r_crit) N K1 / Delta^2.

    Mathematically this is ``hamilton_rhs``. Numerically, {xi_r = 0, r = r_crit}
    becomes an exact fixed set: the direct form leaves a force of order 1e-16 at the
    float r_crit, which the hyperbolic flow amplifies by e^(w s).
    Valid while xi_t and xi_phi keep the values it was built for, which the flow conserves.
    """
    base = hamilton_rhs(params, rescale)
    prof = radial_profile(params, xi_t, xi_phi)
    c2 = params.delta0**2
    rc = float(prof.r_crit)
    n_c = [float(v) for v in prof.gen.n]
    k1_c = [float(v) for v in prof.gen.k1]
    d_c = [float(v) for v in prof.gen.d]
    dp_c = poly.deriv(d_c)
    k = 1.0 / math.hypot(xi_t, xi_phi) if rescale else 1.0
    horner = poly.horner

    def rhs(y):
        out = base(y)
        r, xr = y[1], y[5]
        dl = horner(d_c, r)
        force = c2 * (r - rc) * horner(n_c, r) * horner(k1_c, r) / (dl * dl)
        out[5] = -k * (horner(dp_c, r) * xr * xr - force)
        return out

    return rhs


def _compiled_hp(params, init, duration, spec, rescale, factored, theta_min):
    from . import _fast

    a, m, lam = params.spin, params.mass, params.cosmo
    k = 1.0 / math.hypot(init.xi_t, init.xi_phi) if rescale else 1.0
    empty = np.zeros(1)
    n_c = k1_c = d_c = dp_c = empty
    rc = 0.0
    if factored:
        try:
            prof = radial_profile(params, init.xi_t, init.xi_phi)
        except NoInteriorCritical:
            factored = False
        else:
            rc = float(prof.r_crit)
            n_c, k1_c, d_c = (np.array([float(v) for v in c]) for c in (prof.gen.n, prof.gen.k1, prof.gen.d))
            dp_c = np.array(poly.deriv(list(d_c)))
    consts = np.array([a, m, lam, params.alpha_hat, params.delta0**2, k, 1.0 if factored else 0.0, rc])
    lo, hi = flow_domain(params)
    s_arr, y_arr, f_arr, status, _ = _fast.dp45_hp(
        np.array(init.as_tuple(), dtype=float), float(duration), spec.rtol, spec.atol, spec.max_steps,
        consts, n_c, k1_c, d_c, dp_c, lo, hi, theta_min, math.pi - theta_min,
    )
    if status == _fast.MAX_STEPS:
        raise StepFailure(f"max_steps={spec.max_steps} exceeded")
    if status == _fast.UNDERFLOW:
        raise StepFailure(f"step size underflow at s={s_arr[-1]}")
    sol = Solution(list(s_arr), list(y_arr), list(f_arr))
    if status == _fast.DOMAIN_EXIT:
        sol.exit_reason = f"DomainExit: left the exterior or pole band after s={s_arr[-1]}"
    return sol


def integrate_hp(
    params: BlackHoleParams,
    init: PhasePoint,
    duration: float,
    spec: IntegratorSpec = DEFAULT_SPEC,
    rescale: bool = False,
    strict: bool = False,
    theta_min: float = THETA_MIN,
    factored: bool = True,
    compiled: bool = True,
) -> Trajectory:
    """Integrate z' = H_p(z), optionally scaled by (xi_t^2 + xi_phi^2)^(-1/2).

    Leaving the exterior or the pole band ends the run early; the reason is
    kept in ``exit_reason`` (or raised as DomainExit when ``strict``). With
    ``factored`` (the default) the radial force is evaluated about r_crit, and
    the direct closed form is used when (xi_t, xi_phi) has no critical radius.
    Adaptive runs go through the compiled loop unless ``compiled`` is off.
    """
    check_point(params, init, theta_min)
    if compiled and spec.method == "dp45":
        sol = _compiled_hp(params, init, duration, spec, rescale, factored, theta_min)
        return _finish(sol, params, spec, strict)
    rhs = None
    if factored:
        try:
            rhs = factored_rhs(params, init.xi_t, init.xi_phi, rescale)
        except NoInteriorCritical:
            rhs = None
    if rhs is None:
        rhs = hamilton_rhs(params, rescale)
    sol = integrate(rhs, init.as_tuple(), duration, spec, domain_checker(params, theta_min))
    return _finish(sol, params, spec, strict)


class PhiHatField:
    """H of phi-hat^u = (xi_r - c S(r)) / xi_t for fixed conserved (xi_t, xi_phi).

    Only r and xi_r move along the flow, so the radial profile is built once;
    two jet copies give the xi_t and xi_phi partials that drive t and phi.
    """

    def __init__(self, params: BlackHoleParams, xi_t: float, xi_phi: float):
        self.params = params
        self.c = params.delta0
        self.xi_t = xi_t
        self.xi_phi = xi_phi
        self.prof = radial_profile(params, xi_t, xi_phi)
        self._tag_t = dn.new_tag()
        self._tag_p = dn.new_tag()
        self.prof_t = RadialProfile(params, dn.Dual(xi_t, 1.0, self._tag_t), xi_phi)
        self.prof_p = RadialProfile(params, xi_t, dn.Dual(xi_phi, 1.0, self._tag_p))

    def __call__(self, y):
        r, xr = y[1], y[5]
        c, xt = self.c, self.xi_t
        st = self.prof_t.s(r)
        sp = self.prof_p.s(r)
        s0 = st.val
        return [
            -(xr - c * s0) / (xt * xt) - c * st.eps / xt,
            1.0 / xt,
            0.0,
            -c * sp.eps / xt,
            0.0,
            c * self.prof.s_prime(r) / xt,
            0.0,
            0.0,
        ]


def integrate_hphiu(
    params: BlackHoleParams,
    init: PhasePoint,
    duration: float,
    spec: IntegratorSpec = DEFAULT_SPEC,
    strict: bool = False,
    theta_min: float = THETA_MIN,
    event=None,
) -> Trajectory:
    check_point(params, init, theta_min)
    fld = PhiHatField(params, init.xi_t, init.xi_phi)
    sol = integrate(fld, init.as_tuple(), duration, spec, domain_checker(params, theta_min), event)
    traj = _finish(sol, params, spec, strict)
    traj.event = (sol.event_s, sol.event_y)
    return traj


def phi_s_event(params: BlackHoleParams, xi_t: float, xi_phi: float):
    prof = radial_profile(params, xi_t, xi_phi)

    def g(y):
        return phi_s_reduced(params, y[1], y[5], xi_t, xi_phi, prof)

    return g


def travel_time_numeric(
    params: BlackHoleParams,
    point: PhasePoint,
    spec: IntegratorSpec = DEFAULT_SPEC,
    max_duration: float | None = None,
    require_neighborhood: bool = True,
) -> float:
    """Minus the H_{phi-hat^u} flow time at which phi^s vanishes.

    phi^s increases along the flow ({phi-hat^u, phi^s} > 0) and T^s increases
    at unit rate, so T^s(point) = -s* where s* is the crossing time.
    """
    if require_neighborhood and not in_neighborhood(params, point):
        raise NoCrossing("point is outside the trapped-set neighbourhood")
    g = phi_s_event(params, point.xi_t, point.xi_phi)
    g0 = g(point.as_tuple())
    if g0 == 0:
        return 0.0
    if max_duration is None:
        # r moves at rate 1/xi_t, and the crossing lies within r_crit of the start
        max_duration = critical_scale(params, point)
    duration = max_duration if g0 < 0 else -max_duration
    fld = PhiHatField(params, point.xi_t, point.xi_phi)
    sol = integrate(fld, point.as_tuple(), duration, spec, domain_checker(params), g)
    if sol.event_s is None:
        raise NoCrossing(sol.exit_reason or "phi^s did not change sign within the window")
    return -sol.event_s


def critical_scale(params: BlackHoleParams, point: PhasePoint) -> float:
    """An r-distance budget (times xi_t) comfortably covering the neighbourhood."""
    prof = radial_profile(params, point.xi_t, point.xi_phi)
    return float(prof.r_crit) * abs(point.xi_t)


def r_zero(params: BlackHoleParams, r, xi_r, xi_t, xi_phi, prof: RadialProfile | None = None):
    """The foot point r0 with S(r0) = -phi^u / (2c); generic in all inputs."""
    prof = prof or radial_profile(params, xi_t, xi_phi)
    pu = phi_u_reduced(params, r, xi_r, xi_t, xi_phi, prof)
    target = -pu / (2 * params.delta0)
    return prof.inverse_s(target, s_bracket(params, dn.primal(prof.r_crit)))


def travel_time_reduced(params: BlackHoleParams, r, xi_r, xi_t, xi_phi, prof: RadialProfile | None = None):
    prof = prof or radial_profile(params, xi_t, xi_phi)
    return xi_t * (r - r_zero(params, r, xi_r, xi_t, xi_phi, prof))


def travel_time_field(params: BlackHoleParams) -> ScalarField:
    return ScalarField(
        lambda t, r, th, ph, xt, xr, xth, xph: travel_time_reduced(params, r, xr, xt, xph), (1, 4, 5, 7), "T_s"
    )


def travel_time_closed(params: BlackHoleParams, point: PhasePoint) -> float:
    """T^s = xi_t (r - r0) with r0 from inverting the monotone S."""
    check_point(params, point)
    return travel_time_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi)


def linearization_rate(
    params: BlackHoleParams,
    base: PhasePoint,
    offset: float = 1e-4,
    duration: float = 0.5,
    spec: IntegratorSpec = DEFAULT_SPEC,
) -> float:
    """-d/ds log|phi^u| along the rescaled H_p flow, started at phi^u = offset off a Gamma point.

    The start keeps phi^s = 0, so phi^u = offset exactly and the orbit stays on
    the stable side; the slope is the average over ``duration``, or over the
    part of it before the orbit leaves the pole band.
    """
    from .phase_space import project_to_characteristic

    c = params.delta0
    prof = radial_profile(params, base.xi_t, base.xi_phi)
    norm = base.momentum_norm()
    # phi^s = 0 and phi^u = offset*norm: xi_r = offset*norm/2, S(r) = -offset*norm/(2c)
    target = -offset * norm / (2 * c)
    r = prof.inverse_s(target)
    start = project_to_characteristic(params, base.replace(r=r, xi_r=offset * norm / 2))
    traj = integrate_hp(params, start, duration, spec, rescale=True)
    if traj.s[-1] < 0.1 * duration:
        # meridional orbits reach the pole band quickly; too short a window says nothing
        raise DomainExit(traj.exit_reason or "window too short")
    y0, y1 = traj.y[0], traj.y[-1]
    u0 = phi_u_reduced(params, y0[1], y0[5], y0[4], y0[7], prof)
    u1 = phi_u_reduced(params, y1[1], y1[5], y1[4], y1[7], prof)
    return -(math.log(abs(u1)) - math.log(abs(u0))) / (traj.s[-1] - traj.s[0])
