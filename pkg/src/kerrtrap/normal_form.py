"""The homogeneous symplectic normal form near the trapped set.

The new coordinates are

    x1 = phi-hat^u,  x2 = theta,  x3 = phi + X3,  x4 = t + X4,
    xi1 = T^s,       xi2 = xi_theta, xi3 = xi_phi, xi4 = xi_t.

X3 and X4 depend only on (r, xi_r, xi_t, xi_phi) and are homogeneous of
degree 0, so they are evaluated on the slice xi_t = 1. On that slice,
(u, v, w) = (phi-hat^u, T^s, xi_phi) is a chart with an explicit inverse,
in which

    H_{phi-hat^u} = d/dv,   H_{T^s} = -d/du,   H_{x3} = -d/dw.

The bracket conditions then reduce to gradient equations

    dX3/du = d_{xi_phi} T^s,   dX3/dv = -d_{xi_phi} phi-hat^u,
    dX4/du = d_{xi_t} T^s,     dX4/dv = -d_{xi_t} phi-hat^u,   dX4/dw = d_{xi_t} X3,

where every d_{xi_*} is a partial in the original coordinates at fixed
(r, xi_r). X3 vanishes on {u = v = 0} and X4 at u = v = w = 0. Each correction is
a sum of straight-line chart integrals by Gauss-Legendre quadrature. Every
step is generic in the scalar type, so the algorithm itself can be
differentiated with dual numbers, including d_{xi_t} X3 inside X4.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import dual as dn
from .errors import KerrTrapError, OutOfRange, PathEscape
from .flow import travel_time_reduced
from .phase_space import COORDS, PhasePoint, bracket_from_gradients, check_point
from .spacetime import BlackHoleParams, exterior
from .trapping import XI_FLOOR, phi_hat_u_reduced, radial_profile, s_bracket

X3_ORDER = ("u", "v")
X4_ORDER = ("u", "v", "w")
GL_NODES = 12
GL_PANELS = 2
GENERATING_RANK_FLOOR = 1e-8
# {xi_i, x_i} targets; pair 1 is reversed because H_{phi-hat^u} T^s = +1
CANONICAL_ORIENTATION = (-1.0, 1.0, 1.0, 1.0)
BASE_NOTE = "X3 = 0 on {T^s = phi-hat^u = 0}; X4 = 0 there at xi_phi/xi_t = 0 (reduced base, value 0)"


@dataclass(frozen=True)
class Quadrature:
    nodes: int = GL_NODES
    panels: int = GL_PANELS

    def rule(self):
        x, w = np.polynomial.legendre.leggauss(self.nodes)
        # nodes on [0, 1] for each panel
        edges = np.linspace(0.0, 1.0, self.panels + 1)
        xs = np.concatenate([(a + (b - a) * (x + 1) / 2) for a, b in zip(edges[:-1], edges[1:])])
        ws = np.concatenate([(b - a) * w / 2 for a, b in zip(edges[:-1], edges[1:])])
        return xs, ws


DEFAULT_QUAD = Quadrature()


# ---------------------------------------------------------------------------
# chart on the xi_t = tau slice

def chart_inverse(params: BlackHoleParams, u, v, tau, w):
    """(r, xi_r) with phi-hat^u = u and T^s = v at momenta (tau, w)."""
    prof = radial_profile(params, tau, w)
    c = params.delta0
    pu = tau * u
    try:
        r0 = prof.inverse_s(-pu / (2 * c), s_bracket(params, dn.primal(prof.r_crit)))
    except OutOfRange as exc:
        raise PathEscape(str(exc)) from exc
    r = r0 + v / tau
    lo, hi = exterior(params)
    rp = np.asarray(dn.primal(r))
    if np.any(rp <= lo) or np.any(rp >= hi):
        raise PathEscape("integration path left the exterior")
    return r, pu + c * prof.s(r)


def _d_phi_hat(params, r, xi_r, tau, w, which):
    t = dn.new_tag()
    if which == "xi_phi":
        y = phi_hat_u_reduced(params, r, xi_r, tau, dn.Dual(w, 1.0, t))
    else:
        y = phi_hat_u_reduced(params, r, xi_r, dn.Dual(tau, 1.0, t), w)
    return dn.tangent(y, t)


def _d_travel(params, r, xi_r, tau, w, which):
    t = dn.new_tag()
    try:
        if which == "xi_phi":
            y = travel_time_reduced(params, r, xi_r, tau, dn.Dual(w, 1.0, t))
        else:
            y = travel_time_reduced(params, r, xi_r, dn.Dual(tau, 1.0, t), w)
    except OutOfRange as exc:
        raise PathEscape(str(exc)) from exc
    return dn.tangent(y, t)


def _chart_point(params, r, xi_r, xi_t, xi_phi):
    """Dilate to xi_t = 1 and return chart coordinates (u, v, w)."""
    xr = xi_r / xi_t
    w = xi_phi / xi_t
    u = phi_hat_u_reduced(params, r, xr, 1.0, w)
    try:
        v = travel_time_reduced(params, r, xr, 1.0, w)
    except OutOfRange as exc:
        raise PathEscape(str(exc)) from exc
    return u, v, w


def _leg(params, quad, integrand, start, coord, length):
    """Integral of integrand along the chart line from coord=0 to coord=length (others from ``start``)."""
    xs, ws = quad.rule()
    u, v, w = (dn.expand(c) for c in start)
    nodes = dn.expand(length) * xs
    if coord == "u":
        u = nodes
    elif coord == "v":
        v = nodes
    else:
        w = nodes
    vals = integrand(u, v, w)
    return dn.dsum(vals * ws) * length


def _x3_integrands(params):
    def du(u, v, w):
        r, xr = chart_inverse(params, u, v, 1.0, w)
        return _d_travel(params, r, xr, 1.0, w, "xi_phi")

    def dv(u, v, w):
        r, xr = chart_inverse(params, u, v, 1.0, w)
        return -_d_phi_hat(params, r, xr, 1.0, w, "xi_phi")

    return {"u": du, "v": dv}


def _x4_integrands(params, quad, x3_order):
    def du(u, v, w):
        r, xr = chart_inverse(params, u, v, 1.0, w)
        return _d_travel(params, r, xr, 1.0, w, "xi_t")

    def dv(u, v, w):
        r, xr = chart_inverse(params, u, v, 1.0, w)
        return -_d_phi_hat(params, r, xr, 1.0, w, "xi_t")

    def dw(u, v, w):
        # d_{xi_t} X3 at the chart point, by differentiating the X3 algorithm itself
        r, xr = chart_inverse(params, u, v, 1.0, w)
        t = dn.new_tag()
        x3 = x3_reduced(params, r, xr, dn.Dual(1.0, 1.0, t), w, x3_order, quad)
        return dn.tangent(x3, t)

    return {"u": du, "v": dv, "w": dw}


def _path_sum(params, quad, integrands, chart, order):
    """Walk from the point to the base along ``order``; returns X(point) - X(base)."""
    pos = dict(zip(("u", "v", "w"), chart))
    total = 0.0
    for coord in order:
        start = (pos["u"], pos["v"], pos["w"])
        total = total + _leg(params, quad, integrands[coord], start, coord, pos[coord])
        pos[coord] = 0.0
    return total


def x3_reduced(params: BlackHoleParams, r, xi_r, xi_t, xi_phi, order=X3_ORDER, quad: Quadrature = DEFAULT_QUAD):
    """X3 as a generic function of (r, xi_r, xi_t, xi_phi)."""
    chart = _chart_point(params, r, xi_r, xi_t, xi_phi)
    return _path_sum(params, quad, _x3_integrands(params), chart, order)


def x4_reduced(
    params: BlackHoleParams, r, xi_r, xi_t, xi_phi, order=X4_ORDER, quad: Quadrature = DEFAULT_QUAD,
    x3_order=X3_ORDER,
):
    chart = _chart_point(params, r, xi_r, xi_t, xi_phi)
    return _path_sum(params, quad, _x4_integrands(params, quad, x3_order), chart, order)


def _check_nf_point(params, point):
    check_point(params, point)
    if not point.xi_t > XI_FLOOR:
        raise KerrTrapError(f"normal form needs xi_t > {XI_FLOOR}, got {point.xi_t}")


def x3_correction(params: BlackHoleParams, point: PhasePoint, order=X3_ORDER, quad: Quadrature = DEFAULT_QUAD) -> float:
    _check_nf_point(params, point)
    return float(x3_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi, order, quad))


def x4_correction(params: BlackHoleParams, point: PhasePoint, order=X4_ORDER, quad: Quadrature = DEFAULT_QUAD) -> float:
    _check_nf_point(params, point)
    return float(x4_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi, order, quad))


def leg_orders(n_legs: int) -> list:
    legs = ("u", "v", "w")[:n_legs]
    return list(itertools.permutations(legs))


# ---------------------------------------------------------------------------
# the map

@dataclass(frozen=True)
class NormalFormImage:
    x: tuple
    xi: tuple
    path_report: dict = field(default_factory=dict)

    def as_tuple(self) -> tuple:
        return tuple(self.x) + tuple(self.xi)


def sp_core(params: BlackHoleParams, point: PhasePoint) -> NormalFormImage:
    """x1, x2 and xi1..xi4 (x3, x4 left as None)."""
    _check_nf_point(params, point)
    x1 = float(phi_hat_u_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi))
    xi1 = float(travel_time_reduced(params, point.r, point.xi_r, point.xi_t, point.xi_phi))
    return NormalFormImage((x1, point.theta, None, None), (xi1, point.xi_theta, point.xi_phi, point.xi_t))


def sp(params: BlackHoleParams, point: PhasePoint, quad: Quadrature = DEFAULT_QUAD) -> NormalFormImage:
    core = sp_core(params, point)
    x3 = (point.phi + x3_correction(params, point, quad=quad)) % (2 * math.pi)
    x4 = point.t + x4_correction(params, point, quad=quad)
    report = {
        "x3_order": list(X3_ORDER),
        "x4_order": list(X4_ORDER),
        "quadrature": {"nodes": quad.nodes, "panels": quad.panels},
        "base": BASE_NOTE,
    }
    return NormalFormImage((core.x[0], core.x[1], x3, x4), core.xi, report)


def coordinate_functions(params: BlackHoleParams, quad: Quadrature = DEFAULT_QUAD):
    """The eight new coordinates as generic functions of the eight old ones.

    x3 is returned without the mod-2pi reduction so that it is smooth.
    """

    def x1(t, r, th, ph, xt, xr, xth, xph):
        return phi_hat_u_reduced(params, r, xr, xt, xph)

    def x2(t, r, th, ph, xt, xr, xth, xph):
        return th

    def x3(t, r, th, ph, xt, xr, xth, xph):
        return ph + x3_reduced(params, r, xr, xt, xph, quad=quad)

    def x4(t, r, th, ph, xt, xr, xth, xph):
        return t + x4_reduced(params, r, xr, xt, xph, quad=quad)

    def xi1(t, r, th, ph, xt, xr, xth, xph):
        return travel_time_reduced(params, r, xr, xt, xph)

    def xi2(t, r, th, ph, xt, xr, xth, xph):
        return xth

    def xi3(t, r, th, ph, xt, xr, xth, xph):
        return xph

    def xi4(t, r, th, ph, xt, xr, xth, xph):
        return xt

    # (function, coordinates it depends on)
    radial = (1, 4, 5, 7)
    return [
        (x1, radial), (x2, (2,)), (x3, (3,) + radial), (x4, (0,) + radial),
        (xi1, radial), (xi2, (6,)), (xi3, (7,)), (xi4, (4,)),
    ]


NAMES = ("x1", "x2", "x3", "x4", "xi1", "xi2", "xi3", "xi4")


def canonical_target() -> np.ndarray:
    """Brackets {f_i, f_j} expected for f = (x1..x4, xi1..xi4)."""
    tgt = np.zeros((8, 8))
    for i, e in enumerate(CANONICAL_ORIENTATION):
        # {xi_i, x_i} = e  =>  {x_i, xi_i} = -e
        tgt[4 + i, i] = e
        tgt[i, 4 + i] = -e
    return tgt


@dataclass(frozen=True)
class BracketResidual:
    point: PhasePoint
    matrix: np.ndarray
    residual_matrix: np.ndarray
    max_residual: float
    mode: str

    def to_dict(self) -> dict:
        return {
            "point": dict(zip(COORDS, self.point.as_tuple())),
            "residual_matrix": self.residual_matrix.tolist(),
            "max_residual": self.max_residual,
            "mode": self.mode,
        }


def _gradients_dual(funcs, point):
    z = point.as_tuple()
    out = []
    for f, deps in funcs:
        _, g = dn.gradient(f, z, deps)
        out.append([float(v) for v in g])
    return np.array(out)


def _gradients_fd(funcs, point, step):
    z = np.array(point.as_tuple(), dtype=float)
    out = np.zeros((8, 8))
    for k, (f, deps) in enumerate(funcs):
        for j in deps:
            h = step * max(1.0, abs(z[j]))
            zp, zm = z.copy(), z.copy()
            zp[j] += h
            zm[j] -= h
            out[k, j] = (float(f(*zp)) - float(f(*zm))) / (2 * h)
    return out


def verify_canonical(
    params: BlackHoleParams, point: PhasePoint, mode: str = "dual", fd_step: float = 1e-5,
    quad: Quadrature = DEFAULT_QUAD,
) -> BracketResidual:
    """All pairwise brackets of the new coordinates against the canonical pattern."""
    _check_nf_point(params, point)
    funcs = coordinate_functions(params, quad)
    if mode in ("dual", "dual-number"):
        grads = _gradients_dual(funcs, point)
        mode = "dual-number"
    elif mode in ("fd", "finite-difference"):
        grads = _gradients_fd(funcs, point, fd_step)
        mode = "finite-difference"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    mat = np.array([[bracket_from_gradients(grads[i], grads[j]) for j in range(8)] for i in range(8)])
    res = np.abs(mat - canonical_target())
    return BracketResidual(point, mat, res, float(res.max()), mode)


def verify_generating_rank(params: BlackHoleParams, point: PhasePoint, floor: float = GENERATING_RANK_FLOOR) -> float:
    """d xi1 / d xi_r; raises when it falls below ``floor`` in absolute value."""
    _check_nf_point(params, point)
    val = dn.partial(
        lambda xr: travel_time_reduced(params, point.r, xr, point.xi_t, point.xi_phi), (point.xi_r,), 0
    )
    val = float(val)
    if not abs(val) > floor:
        raise KerrTrapError(f"generating-function rank condition fails: d xi1/d xi_r = {val}")
    return val


def image_separation(a: NormalFormImage, b: NormalFormImage) -> float:
    """Max-norm distance of two images with x3 compared modulo 2 pi."""
    d = [abs(p - q) for p, q in zip(a.as_tuple(), b.as_tuple())]
    d3 = d[2] % (2 * math.pi)
    d[2] = min(d3, 2 * math.pi - d3)
    return max(d)


def x4_offset_bound(params: BlackHoleParams, points, quad: Quadrature = DEFAULT_QUAD) -> float:
    """max |x4 - t| over the given points (dilation invariant)."""
    return max(abs(x4_correction(params, p, quad=quad)) for p in points)


def base_d_xi_t_x3(params: BlackHoleParams, r, xi_r, xi_phi) -> float:
    """Closed form of d_{xi_t} X3 on {u = v = 0} at xi_t = 1, used to cross-check the dw leg.

    On the base both path integrals have zero length, so only their endpoint
    derivatives survive: d_{xi_t} X3 = d_{xi_phi}T * d_{xi_t}u - d_{xi_phi}u * d_{xi_t}T,
    where d_{xi_t}(u, v) are the slice-chart derivatives of the dilated point.
    """

    def chart(xt):
        return _chart_point(params, r, xi_r, xt, xi_phi)

    t = dn.new_tag()
    u, v, w = chart(dn.Dual(1.0, 1.0, t))
    du_t = dn.tangent(u, t)
    dv_t = dn.tangent(v, t)
    r0, xr0 = float(r), float(xi_r)
    w0 = float(xi_phi)
    a = _d_travel(params, r0, xr0, 1.0, w0, "xi_phi")
    b = _d_phi_hat(params, r0, xr0, 1.0, w0, "xi_phi")
    return float(a * du_t - b * dv_t)
