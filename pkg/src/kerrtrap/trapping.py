"""Radial potential, photon region, unstable/stable defining functions and rates.

For fixed conserved momenta (xi_t, xi_phi) everything radial is a rational
function of r built from two polynomials,

    N(r) = (r^2 + a^2) xi_t + a xi_phi,    Delta(r),

with F = N^2 / Delta.  F' = N K / Delta^2 where K = 2 N' Delta - N Delta',
so the critical radius is the root of K in the exterior.  The quotients

    f  = F' / (r - r_c)                = N K1 / Delta^2,
    f~ = (F - F(r_c)) / (r - r_c)^2    = Q / (Delta Delta(r_c)),

are evaluated from K1 = K / (r - r_c) and Q = (N^2 Delta(r_c) - N(r_c)^2 Delta) / (r - r_c)^2,
obtained by synthetic division. There is no cancellation near r_c and every
derivative stays exact, which the normal-form construction relies on.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import dual as dn
from . import polynomial as poly
from .errors import ExhaustedDraws, KerrTrapError, NoInteriorCritical, NoRealRoot, NotNearTrapping, OutOfRange
from .phase_space import R, XI_PHI, XI_R, XI_T, PhasePoint, ScalarField, check_point, project_to_characteristic
from .spacetime import THETA_MIN, BlackHoleParams, check_r, delta_poly, delta_r, exterior

XI_FLOOR = 1e-3
EPS_SWITCH = 1e-4
NEIGHBORHOOD_PHI = 0.1
NEIGHBORHOOD_R = 0.2
DUAL_NEWTON_STEPS = 3


@dataclass
class _Coeffs:
    n: list
    d: list
    k: list
    rc: object
    k1: list
    q: list
    dc: object
    nc: object


def _build(params: BlackHoleParams, xi_t, xi_phi, rc) -> _Coeffs:
    a = params.spin
    n = [(a * a) * xi_t + a * xi_phi, 0.0, xi_t]
    d = delta_poly(params)
    k = poly.sub(poly.scale(poly.mul(poly.deriv(n), d), 2.0), poly.mul(n, poly.deriv(d)))
    dk = poly.deriv(k)
    if any(type(c) is dn.Dual for c in (xi_t, xi_phi)):
        # Newton in jet arithmetic: each step doubles the number of exact derivative orders
        for _ in range(DUAL_NEWTON_STEPS):
            rc = rc - poly.horner(k, rc) / poly.horner(dk, rc)
    dc = poly.horner(d, rc)
    nc = poly.horner(n, rc)
    p_num = poly.sub(poly.scale(poly.mul(n, n), dc), poly.scale(d, nc * nc))
    q = poly.deflate(poly.deflate(p_num, rc), rc)
    k1 = poly.deflate(k, rc)
    return _Coeffs(n, d, k, rc, k1, q, dc, nc)


def _k_poly_float(params: BlackHoleParams, xi_t: float, xi_phi: float) -> list:
    a = params.spin
    n = [a * a * xi_t + a * xi_phi, 0.0, xi_t]
    d = delta_poly(params)
    return poly.sub(poly.scale(poly.mul(poly.deriv(n), d), 2.0), poly.mul(n, poly.deriv(d))), n


@functools.lru_cache(maxsize=4096)
def _critical_radius_float(params: BlackHoleParams, xi_t: float, xi_phi: float) -> float:
    lo, hi = exterior(params)
    k, n = _k_poly_float(params, xi_t, xi_phi)
    dk = poly.deriv(k)
    found = []
    for x in poly.real_roots(k):
        if not (lo < x < hi):
            continue
        x = poly.newton_polish(k, float(x))
        if not (lo < x < hi):
            continue
        # F'' = N K' / Delta^2 at a root of K
        if poly.horner(n, x) * poly.horner(dk, x) > 0:
            found.append(x)
    if not found:
        raise NoInteriorCritical(f"F has no interior minimum for xi_t={xi_t}, xi_phi={xi_phi}")
    if len(found) > 1:
        raise KerrTrapError(f"several interior minima of F for xi_t={xi_t}, xi_phi={xi_phi}: {found}")
    return found[0]


def _critical_radius_primal(params: BlackHoleParams, xi_t, xi_phi):
    xt = np.asarray(dn.primal(xi_t), dtype=float)
    xp = np.asarray(dn.primal(xi_phi), dtype=float)
    if xt.ndim == 0 and xp.ndim == 0:
        return _critical_radius_float(params, float(xt), float(xp))
    xt, xp = np.broadcast_arrays(xt, xp)
    out = np.empty(xt.shape)
    for idx in np.ndindex(xt.shape):
        out[idx] = _critical_radius_float(params, float(xt[idx]), float(xp[idx]))
    return out


class RadialProfile:
    """Radial functions for one (or an array of) conserved momentum pair(s).

    ``xi_t`` and ``xi_phi`` may be floats, arrays or Duals; the critical
    radius then carries the matching derivatives.
    """

    def __init__(self, params: BlackHoleParams, xi_t, xi_phi):
        self.params = params
        self.xi_t = xi_t
        self.xi_phi = xi_phi
        rc0 = _critical_radius_primal(params, xi_t, xi_phi)
        self.gen = _build(params, xi_t, xi_phi, rc0)
        if any(type(c) is dn.Dual for c in (xi_t, xi_phi)):
            self.pri = _build(params, dn.primal(xi_t), dn.primal(xi_phi), rc0)
        else:
            self.pri = self.gen

    @property
    def r_crit(self):
        return self.gen.rc

    # value helpers on a coefficient set -------------------------------------
    @staticmethod
    def _delta(c: _Coeffs, r):
        return poly.horner(c.d, r)

    @staticmethod
    def _s(c: _Coeffs, r):
        g = dn.sqrt(poly.horner(c.q, r) / c.dc)
        return (r - c.rc) * g / poly.horner(c.d, r)

    @staticmethod
    def _s_prime(c: _Coeffs, r):
        qv = poly.horner(c.q, r)
        g = dn.sqrt(qv / c.dc)
        gp = poly.horner(poly.deriv(c.q), r) / (2 * c.dc * g)
        dl = poly.horner(c.d, r)
        dlp = poly.horner(poly.deriv(c.d), r)
        return g / dl + (r - c.rc) * (gp / dl - g * dlp / (dl * dl))

    # public radial functions --------------------------------------------------
    def big_f(self, r):
        nv = poly.horner(self.gen.n, r)
        return nv * nv / poly.horner(self.gen.d, r)

    def big_f_prime(self, r):
        c = self.gen
        dl = poly.horner(c.d, r)
        return poly.horner(c.n, r) * poly.horner(c.k, r) / (dl * dl)

    def f_at_crit(self):
        c = self.gen
        return c.nc * c.nc / c.dc

    def f(self, r):
        """F'(r) / (r - r_crit)."""
        c = self.gen
        dl = poly.horner(c.d, r)
        return poly.horner(c.n, r) * poly.horner(c.k1, r) / (dl * dl)

    def f_tilde(self, r):
        """(F(r) - F(r_crit)) / (r - r_crit)^2."""
        c = self.gen
        return poly.horner(c.q, r) / (poly.horner(c.d, r) * c.dc)

    def s(self, r):
        return self._s(self.gen, r)

    def s_prime(self, r):
        return self._s_prime(self.gen, r)

    def inverse_s(self, y, bracket=None, tol=1e-15, max_iter=200):
        """Solve S(r0) = y by bracketed Newton; jets follow by a few Newton steps in dual arithmetic."""
        c = self.pri
        rc = c.rc
        if bracket is None:
            bracket = s_bracket(self.params, rc)
        lo0, hi0 = bracket
        yp = np.asarray(dn.primal(y), dtype=float)
        rcp = np.asarray(rc, dtype=float)
        shape = np.broadcast_shapes(yp.shape, rcp.shape, np.shape(lo0), np.shape(hi0))
        yp = np.broadcast_to(yp, shape)
        lo = np.array(np.broadcast_to(lo0, shape), dtype=float)
        hi = np.array(np.broadcast_to(hi0, shape), dtype=float)
        s_lo = self._s(c, lo)
        s_hi = self._s(c, hi)
        if np.any(yp < s_lo) or np.any(yp > s_hi):
            raise OutOfRange("inversion target outside the range of S on the bracket")
        x = np.clip(rcp + yp / self._s_prime(c, rcp), lo, hi)
        for _ in range(max_iter):
            fx = self._s(c, x) - yp
            lo = np.where(fx < 0, x, lo)
            hi = np.where(fx > 0, x, hi)
            xn = x - fx / self._s_prime(c, x)
            bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
            xn = np.where(bad, 0.5 * (lo + hi), xn)
            done = np.max(np.abs(xn - x) / np.maximum(1.0, np.abs(x))) <= tol
            x = xn
            if done:
                break
        if x.ndim == 0:
            x = float(x)
        if type(y) is dn.Dual or self.gen is not self.pri:
            for _ in range(DUAL_NEWTON_STEPS):
                x = x - (self.s(x) - y) / self.s_prime(x)
        return x


def s_bracket(params: BlackHoleParams, rc):
    lo, hi = exterior(params)
    margin = 1e-3 * np.asarray(rc)
    if math.isinf(hi):
        hi_arr = 1e3 * np.asarray(rc)
    else:
        hi_arr = hi - margin
    return lo + margin, hi_arr


def radial_profile(params: BlackHoleParams, xi_t, xi_phi) -> RadialProfile:
    if isinstance(xi_t, float) and isinstance(xi_phi, float):
        return _profile_cached(params, xi_t, xi_phi)
    return RadialProfile(params, xi_t, xi_phi)


@functools.lru_cache(maxsize=4096)
def _profile_cached(params: BlackHoleParams, xi_t: float, xi_phi: float) -> RadialProfile:
    return RadialProfile(params, xi_t, xi_phi)


# ---------------------------------------------------------------------------
# scalar API

def big_f(params: BlackHoleParams, xi_t, xi_phi, r):
    check_r(params, r)
    a = params.spin
    n = (r * r + a * a) * xi_t + a * xi_phi
    return n * n / delta_r(params, r)


def critical_radius(params: BlackHoleParams, xi_t: float, xi_phi: float) -> float:
    if xi_t == 0 and xi_phi == 0:
        raise ValueError("(xi_t, xi_phi) must not vanish")
    return _critical_radius_float(params, float(xi_t), float(xi_phi))


def f_tilde(params: BlackHoleParams, xi_t, xi_phi, r, method: str = "deflate", eps_switch: float = EPS_SWITCH):
    """(F(r) - F(r_crit)) / (r - r_crit)^2.

    ``method="deflate"`` uses the exact polynomial quotient.  ``method="switch"``
    uses the raw difference quotient away from r_crit and, within
    ``eps_switch * r_crit`` of it, the Taylor polynomial through the quartic
    term of F; two terms alone leave a jump of ~1e-7 at the seam.
    """
    check_r(params, r)
    prof = radial_profile(params, xi_t, xi_phi)
    if method == "deflate":
        return prof.f_tilde(r)
    if method != "switch":
        raise ValueError(f"unknown method {method!r}")
    rc = prof.r_crit
    if abs(r - rc) > eps_switch * rc:
        return (prof.big_f(r) - prof.f_at_crit()) / (r - rc) ** 2
    d2, d3, d4 = _taylor_f(prof, rc)
    h = r - rc
    return d2 / 2 + d3 * h / 6 + d4 * h * h / 24


def _taylor_f(prof: RadialProfile, rc: float):
    """Second, third and fourth r-derivatives of F at r_crit, by nested dual numbers."""

    def d1(x):
        return dn.derivative(prof.big_f, x)[1]

    def d2(x):
        return dn.derivative(d1, x)[1]

    def d3(x):
        return dn.derivative(d2, x)[1]

    return d2(rc), d3(rc), dn.derivative(d3, rc)[1]


def s_function(params: BlackHoleParams, xi_t, xi_phi, r):
    check_r(params, r)
    return radial_profile(params, xi_t, xi_phi).s(r)


# generic reduced functions of (r, xi_r, xi_t, xi_phi) -------------------------

def phi_u_reduced(params: BlackHoleParams, r, xi_r, xi_t, xi_phi, prof: RadialProfile | None = None):
    prof = prof or radial_profile(params, xi_t, xi_phi)
    return xi_r - params.delta0 * prof.s(r)


def phi_s_reduced(params: BlackHoleParams, r, xi_r, xi_t, xi_phi, prof: RadialProfile | None = None):
    prof = prof or radial_profile(params, xi_t, xi_phi)
    return xi_r + params.delta0 * prof.s(r)


def phi_hat_u_reduced(params: BlackHoleParams, r, xi_r, xi_t, xi_phi, prof: RadialProfile | None = None):
    return phi_u_reduced(params, r, xi_r, xi_t, xi_phi, prof) / xi_t


def rates_reduced(params: BlackHoleParams, r, xi_r, xi_t, xi_phi, prof: RadialProfile | None = None):
    """(w_u, w_s) from the factorised H_p phi^{u/s}, normalised by (xi_t^2 + xi_phi^2)^(-1/2)."""
    prof = prof or radial_profile(params, xi_t, xi_phi)
    c = params.delta0
    dl = delta_r(params, r)
    dlp = poly.horner(poly.deriv(prof.gen.d), r)
    core = c * prof.f(r) * dn.sqrt(dl / prof.f_tilde(r))
    k = 1 / dn.sqrt(xi_t * xi_t + xi_phi * xi_phi)
    return k * (dlp * xi_r + core), k * (-dlp * xi_r + core)


# point API ---------------------------------------------------------------------

def _check(params, point, theta_min=THETA_MIN):
    check_point(params, point, theta_min)


def phi_u(params: BlackHoleParams, point: PhasePoint):
    _check(params, point)
    return phi_u_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi)


def phi_s(params: BlackHoleParams, point: PhasePoint):
    _check(params, point)
    return phi_s_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi)


def phi_hat_u(params: BlackHoleParams, point: PhasePoint):
    _check(params, point)
    return phi_hat_u_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi)


def phi_hat_s(params: BlackHoleParams, point: PhasePoint):
    return phi_s(params, point)


_RADIAL = (R, XI_T, XI_R, XI_PHI)


def _radial_field(params: BlackHoleParams, reduced, name: str) -> ScalarField:
    return ScalarField(lambda t, r, th, ph, xt, xr, xth, xph: reduced(params, r, xr, xt, xph), _RADIAL, name)


def phi_u_field(params: BlackHoleParams) -> ScalarField:
    return _radial_field(params, phi_u_reduced, "phi_u")


def phi_s_field(params: BlackHoleParams) -> ScalarField:
    return _radial_field(params, phi_s_reduced, "phi_s")


def phi_hat_u_field(params: BlackHoleParams) -> ScalarField:
    return _radial_field(params, phi_hat_u_reduced, "phi_hat_u")


def phi_hat_s_field(params: BlackHoleParams) -> ScalarField:
    return _radial_field(params, phi_s_reduced, "phi_hat_s")


def rate_normalization(point: PhasePoint) -> float:
    """Factor (xi_t^2 + xi_phi^2)^(-1/2) applied to the raw rates."""
    return 1.0 / math.hypot(point.xi_t, point.xi_phi)


def in_neighborhood(
    params: BlackHoleParams, point: PhasePoint, phi_tol: float = NEIGHBORHOOD_PHI, r_tol: float = NEIGHBORHOOD_R
) -> bool:
    rc = critical_radius(params, point.xi_t, point.xi_phi)
    norm = point.momentum_norm()
    return (
        abs(phi_u(params, point)) < phi_tol * norm
        and abs(phi_s(params, point)) < phi_tol * norm
        and abs(point.r - rc) < r_tol * rc
    )


def expansion_rate(
    params: BlackHoleParams, point: PhasePoint, phi_tol: float = NEIGHBORHOOD_PHI, r_tol: float = NEIGHBORHOOD_R
):
    _check(params, point)
    if not in_neighborhood(params, point, phi_tol, r_tol):
        raise NotNearTrapping(f"{point} is outside the configured neighbourhood of the trapped set")
    return rates_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi)


# ---------------------------------------------------------------------------
# sampling the trapped set

@dataclass(frozen=True)
class TrappedDatum:
    xi_t: float
    xi_phi: float
    r_crit: float
    f_at_crit: float
    point: PhasePoint


@dataclass
class TrappedSample:
    data: list
    skipped: int
    draws: int

    def __iter__(self):
        return iter(self.data)

    def __len__(self):
        return len(self.data)

    def __getitem__(self, i):
        return self.data[i]


def trapped_point(
    params: BlackHoleParams, psi: float, theta: float, sign: float = 1.0, phi: float = 0.0, t: float = 0.0,
    theta_min: float = THETA_MIN,
) -> TrappedDatum:
    """The Gamma point with momentum direction (cos psi, sin psi), completed by xi_theta."""
    xi_t, xi_phi = math.cos(psi), math.sin(psi)
    rc = critical_radius(params, xi_t, xi_phi)
    seed = PhasePoint(t, rc, theta, phi, xi_t, 0.0, sign, xi_phi)
    pt = project_to_characteristic(params, seed, theta_min)
    fc = radial_profile(params, xi_t, xi_phi).f_at_crit()
    return TrappedDatum(xi_t, xi_phi, rc, float(fc), pt)


def sample_trapped_set(
    params: BlackHoleParams, n: int, seed: int, xi_floor: float = XI_FLOOR, theta_min: float = THETA_MIN
) -> TrappedSample:
    """Draw n points of Gamma; each draw i uses its own RNG stream (seed, i)."""
    psi_max = math.acos(xi_floor)
    data: list[TrappedDatum] = []
    skipped = 0
    i = 0
    max_draws = max(100, 100 * n)
    while len(data) < n:
        if i >= max_draws:
            raise ExhaustedDraws(f"acceptance rate below 1% after {i} draws")
        rng = np.random.default_rng([seed, i])
        i += 1
        psi = rng.uniform(-psi_max, psi_max)
        theta = rng.uniform(theta_min, math.pi - theta_min)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        phi = rng.uniform(0.0, 2 * math.pi)
        try:
            data.append(trapped_point(params, psi, theta, sign, phi, 0.0, theta_min))
        except (NoRealRoot, NoInteriorCritical):
            skipped += 1
    return TrappedSample(data, skipped, i)


def sample_neighborhood(
    params: BlackHoleParams, n: int, seed: int, r_scale: float = 0.05, phi_scale: float = 0.05,
    on_characteristic: bool = True, xi_floor: float = XI_FLOOR, theta_min: float = THETA_MIN,
) -> list:
    """Points near Gamma: a Gamma sample with r and xi_r displaced, optionally put back on Sigma.

    ``r_scale`` is relative to r_crit; ``phi_scale`` bounds the resulting
    |phi^{u/s}| relative to the momentum norm.
    """
    out = []
    base = sample_trapped_set(params, n, seed, xi_floor, theta_min)
    for i, d in enumerate(base):
        rng = np.random.default_rng([seed, 7919, i])
        for _ in range(100):
            r = d.r_crit * (1 + r_scale * rng.uniform(-1, 1))
            s = d.point.momentum_norm()
            xr = s * phi_scale * rng.uniform(-1, 1)
            cand = d.point.replace(r=r, xi_r=xr)
            try:
                if on_characteristic:
                    cand = project_to_characteristic(params, cand, theta_min)
                if in_neighborhood(params, cand, phi_scale * 2, r_scale * 2):
                    out.append(cand)
                    break
            except NoRealRoot:
                continue
    return out


# ---------------------------------------------------------------------------
# global rate bounds

@dataclass(frozen=True)
class RateBounds:
    nu_min: float
    nu_max: float
    argmin: TrappedDatum
    argmax: TrappedDatum
    grid_spec: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def datum(d: TrappedDatum):
            return {
                "xi_t": d.xi_t,
                "xi_phi": d.xi_phi,
                "r_crit": d.r_crit,
                "theta": d.point.theta,
                "xi_theta": d.point.xi_theta,
            }

        return {
            "nu_min": self.nu_min,
            "nu_max": self.nu_max,
            "argmin": datum(self.argmin),
            "argmax": datum(self.argmax),
            "grid_spec": dict(self.grid_spec),
        }


def gamma_rate(params: BlackHoleParams, psi):
    """w_u (= w_s) on Gamma for momentum direction (cos psi, sin psi); generic in psi."""
    xt, xp = dn.cos(psi), dn.sin(psi)
    prof = RadialProfile(params, xt, xp)
    return rates_reduced(params, prof.r_crit, 0.0, xt, xp, prof)[0]


def _best_theta(params: BlackHoleParams, xi_t: float, xi_phi: float, theta_min: float) -> float:
    """Polar angle in the pole band that minimises the angular term of p at fixed momentum.

    With x = sin^2 theta that term is (a xi_t x + xi_phi)^2 / (Delta_theta x),
    unimodal in x; a golden-section search on x is enough.
    """
    a, ah = params.spin, params.alpha_hat

    def h(x):
        return (a * xi_t * x + xi_phi) ** 2 / ((1 + ah * (1 - x)) * x)

    lo, hi = math.sin(theta_min) ** 2, 1.0
    g = (math.sqrt(5) - 1) / 2
    for _ in range(80):
        m1, m2 = hi - g * (hi - lo), lo + g * (hi - lo)
        if h(m1) <= h(m2):
            hi = m2
        else:
            lo = m1
    x = min((lo + hi) / 2, 1.0)
    return math.asin(math.sqrt(x))


def _admissible(params: BlackHoleParams, psi: float, theta_min: float):
    """The Gamma datum at the most permissive theta for direction psi, or None."""
    xt, xp = math.cos(psi), math.sin(psi)
    try:
        th = _best_theta(params, xt, xp, theta_min)
        return trapped_point(params, psi, th, 1.0, 0.0, 0.0, theta_min)
    except (NoRealRoot, NoInteriorCritical):
        return None


def _edge(params, inside: float, outside: float, theta_min: float, iters: int = 60):
    """Bisect the boundary of the admissible psi set between two grid angles."""
    best = _admissible(params, inside, theta_min)
    for _ in range(iters):
        mid = 0.5 * (inside + outside)
        d = _admissible(params, mid, theta_min)
        if d is None:
            outside = mid
        else:
            inside, best = mid, d
    return inside, best


def nu_bounds(
    params: BlackHoleParams, grid: tuple = (64, 32, 2), xi_floor: float = XI_FLOOR, theta_min: float = THETA_MIN
) -> RateBounds:
    """Extremes of w_u over Gamma from a (psi, theta, sign) grid, refined.

    On Gamma the rate depends on the momentum angle psi alone, so the grid
    optima are polished by Newton in psi, and the ends of the admissible psi
    range (where the critical point or a real xi_theta ceases to exist) are
    located by bisection and compared as well.
    """
    n_psi, n_theta, n_sign = grid
    psi_max = math.acos(xi_floor)
    psis = np.linspace(-psi_max, psi_max, n_psi)
    thetas = np.linspace(theta_min, math.pi - theta_min, n_theta + 2)[1:-1]
    signs = [1.0, -1.0][:n_sign]
    cells = []
    for psi in psis:
        for th in thetas:
            for sg in signs:
                try:
                    d = trapped_point(params, float(psi), float(th), sg, 0.0, 0.0, theta_min)
                except (NoRealRoot, NoInteriorCritical):
                    continue
                w, _ = rates_reduced(params, d.r_crit, 0.0, d.xi_t, d.xi_phi)
                cells.append((float(w), float(psi), float(th), sg, d))
    # ends of the admissible psi range
    ok = [_admissible(params, float(psi), theta_min) is not None for psi in psis]
    for i in range(len(psis) - 1):
        if ok[i] != ok[i + 1]:
            inside, outside = (psis[i], psis[i + 1]) if ok[i] else (psis[i + 1], psis[i])
            psi_b, d = _edge(params, float(inside), float(outside), theta_min)
            w, _ = rates_reduced(params, d.r_crit, 0.0, d.xi_t, d.xi_phi)
            cells.append((float(w), psi_b, d.point.theta, 1.0, d))
    if not cells:
        raise ExhaustedDraws("no admissible grid cell on the trapped set")
    lo = min(cells, key=lambda c: c[0])
    hi = max(cells, key=lambda c: c[0])
    step = psis[1] - psis[0] if n_psi > 1 else 0.1
    lo = _polish(params, lo, step, -1.0, theta_min, psi_max)
    hi = _polish(params, hi, step, 1.0, theta_min, psi_max)
    if not 0 < lo[0] <= hi[0]:
        raise KerrTrapError(f"inconsistent rate bounds {lo[0]}, {hi[0]}")
    spec = {"n_psi": n_psi, "n_theta": n_theta, "n_sign": n_sign, "xi_floor": xi_floor, "theta_min": theta_min}
    return RateBounds(lo[0], hi[0], lo[4], hi[4], spec)


def _polish(params, cell, step, direction, theta_min, psi_max, iters=8):
    """Newton on dw/dpsi near a grid optimum; keeps the grid cell if the step misbehaves."""
    w0, psi0, th, sg, _ = cell
    psi = psi0

    def dw(x):
        return dn.derivative(lambda y: gamma_rate(params, y), x)[1]

    for _ in range(iters):
        try:
            g, h = dn.derivative(dw, psi)
        except (NoRealRoot, NoInteriorCritical):
            # stepped past the end of the admissible range
            break
        if h == 0 or not math.isfinite(h) or direction * h >= 0:
            break
        nxt = psi - g / h
        if abs(nxt - psi0) > step or abs(nxt) > psi_max:
            break
        done = abs(nxt - psi) < 1e-13
        psi = nxt
        if done:
            break
    if psi == psi0:
        return cell
    try:
        d = trapped_point(params, psi, th, sg, 0.0, 0.0, theta_min)
    except (NoRealRoot, NoInteriorCritical):
        return cell
    try:
        w = float(gamma_rate(params, psi))
    except (NoRealRoot, NoInteriorCritical):
        return cell
    if direction * (w - w0) < 0:
        return cell
    return (w, psi, th, sg, d)
