"""Principal symbol, Hamilton vector field and Poisson brackets on T*M.

Phase-space coordinates are ordered ``(t, r, theta, phi, xi_t, xi_r,
xi_theta, xi_phi)``. The bracket convention is

    H_f g = {f, g} = sum_j d(f)/d(xi_j) d(g)/d(x_j) - d(f)/d(x_j) d(g)/d(xi_j),

so that {xi_r, r} = 1 and H_phi = -d/d(xi_phi).
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import dual as dn
from .errors import NoRealRoot
from .spacetime import THETA_MIN, BlackHoleParams, check_r, check_theta, delta_r, dual_metric

COORDS = ("t", "r", "theta", "phi", "xi_t", "xi_r", "xi_theta", "xi_phi")
T, R, THETA, PHI, XI_T, XI_R, XI_THETA, XI_PHI = range(8)


@dataclass(frozen=True)
class PhasePoint:
    t: float
    r: float
    theta: float
    phi: float
    xi_t: float
    xi_r: float
    xi_theta: float
    xi_phi: float

    def as_tuple(self) -> tuple:
        return astuple(self)

    @classmethod
    def from_seq(cls, z: Sequence) -> "PhasePoint":
        return cls(*z)

    def replace(self, **kw) -> "PhasePoint":
        return replace(self, **kw)

    def scaled(self, lam: float) -> "PhasePoint":
        """Fiber dilation xi -> lam * xi."""
        return replace(
            self,
            xi_t=lam * self.xi_t,
            xi_r=lam * self.xi_r,
            xi_theta=lam * self.xi_theta,
            xi_phi=lam * self.xi_phi,
        )

    def momentum_norm(self) -> float:
        return math.sqrt(self.xi_t**2 + self.xi_r**2 + self.xi_theta**2 + self.xi_phi**2)


@dataclass(frozen=True)
class PhaseTangent:
    dx: tuple
    dxi: tuple

    def as_tuple(self) -> tuple:
        return tuple(self.dx) + tuple(self.dxi)


@dataclass(frozen=True)
class ScalarField:
    """A phase-space function of the eight coordinates, generic in its scalar type.

    ``depends_on`` lists the coordinates the function can depend on; partials
    with respect to the others are exactly zero and are never evaluated.
    """

    func: Callable
    depends_on: tuple = tuple(range(8))
    name: str = ""

    def __call__(self, point: PhasePoint):
        return self.func(*point.as_tuple())

    def gradient(self, point: PhasePoint):
        return dn.gradient(self.func, point.as_tuple(), self.depends_on)


def coordinate_field(index: int) -> ScalarField:
    return ScalarField(lambda *z: z[index], (index,), COORDS[index])


# ----------------------------------------------------------------------------
# the principal symbol

def symbol(params: BlackHoleParams, r, theta, xi_t, xi_r, xi_theta, xi_phi):
    """Expanded form of p = (r^2 + a^2 cos^2 theta) G, generic scalars, no domain checks."""
    a = params.spin
    ah = params.alpha_hat
    c2 = (1 + ah) ** 2
    s = dn.sin(theta)
    cs = dn.cos(theta)
    dth = 1 + ah * cs * cs
    dr = delta_r(params, r)
    n = (r * r + a * a) * xi_t + a * xi_phi
    ang = a * xi_t * s * s + xi_phi
    return dr * xi_r * xi_r + dth * xi_theta * xi_theta + c2 * ang * ang / (dth * s * s) - c2 * n * n / dr


def check_point(params: BlackHoleParams, point: PhasePoint, theta_min: float = THETA_MIN) -> None:
    check_r(params, point.r)
    check_theta(point.theta, theta_min)


def p_symbol(params: BlackHoleParams, point: PhasePoint, theta_min: float = THETA_MIN):
    """Principal symbol via the dual metric, p = (r^2 + a^2 cos^2 theta) G."""
    g, _, _ = dual_metric(params, point, theta_min)
    cs = dn.cos(point.theta)
    return (point.r**2 + params.spin**2 * cs * cs) * g


def p_field(params: BlackHoleParams) -> ScalarField:
    return ScalarField(
        lambda t, r, th, ph, xt, xr, xth, xph: symbol(params, r, th, xt, xr, xth, xph),
        (R, THETA, XI_T, XI_R, XI_THETA, XI_PHI),
        "p",
    )


def hamilton_vector(f: ScalarField, point: PhasePoint) -> PhaseTangent:
    """H_f = (d_xi f, -d_x f) by dual-number differentiation."""
    _, g = f.gradient(point)
    return PhaseTangent(tuple(g[4:]), tuple(-gi for gi in g[:4]))


def hamilton_field(params: BlackHoleParams, point: PhasePoint, theta_min: float = THETA_MIN) -> PhaseTangent:
    check_point(params, point, theta_min)
    return hamilton_vector(p_field(params), point)


def poisson_bracket(f: ScalarField, g: ScalarField, point: PhasePoint):
    _, df = f.gradient(point)
    _, dg = g.gradient(point)
    return bracket_from_gradients(df, dg)


def bracket_from_gradients(df: Sequence, dg: Sequence):
    return sum(df[4 + j] * dg[j] - df[j] * dg[4 + j] for j in range(4))


def apply_field(v: PhaseTangent, g: ScalarField, point: PhasePoint):
    """Contract a tangent vector with dg."""
    _, dg = g.gradient(point)
    return sum(vi * gi for vi, gi in zip(v.as_tuple(), dg))


def check_homogeneity(f: ScalarField, point: PhasePoint, degree: float, scale: float) -> float:
    if not scale > 0:
        raise ValueError("scale must be positive")
    base = float(f(point))
    lifted = float(f(point.scaled(scale)))
    return abs(lifted - scale**degree * base) / max(1.0, abs(base))


def hamilton_rhs(params: BlackHoleParams, rescale: bool = False) -> Callable:
    """Closed-form H_p on plain floats, for the integrators.

    Agrees with ``hamilton_field`` (dual numbers) to roundoff; the tests hold
    the two together.
    """
    a = params.spin
    a2 = a * a
    m = params.mass
    lam = params.cosmo
    ah = params.alpha_hat
    c2 = (1 + ah) ** 2
    sin, cos, sqrt = math.sin, math.cos, math.sqrt

    def rhs(y):
        _, r, th, _, xt, xr, xth, xph = y
        s = sin(th)
        cs = cos(th)
        s2 = s * s
        dth = 1 + ah * cs * cs
        dth_p = -2 * ah * cs * s
        r2 = r * r
        dr = (r2 + a2) * (1 - lam * r2 / 3) - 2 * m * r
        dr_p = 2 * r * (1 - lam * r2 / 3) - (r2 + a2) * (2 * lam * r / 3) - 2 * m
        n = (r2 + a2) * xt + a * xph
        ang = a * xt * s2 + xph
        denom = dth * s2
        # d p / d xi
        p_xt = 2 * c2 * a * ang / dth - 2 * c2 * n * (r2 + a2) / dr
        p_xr = 2 * dr * xr
        p_xth = 2 * dth * xth
        p_xph = 2 * c2 * ang / denom - 2 * c2 * n * a / dr
        # d p / d x
        p_r = dr_p * xr * xr - c2 * (4 * n * r * xt / dr - n * n * dr_p / (dr * dr))
        ang_th = 2 * a * xt * s * cs
        denom_th = dth_p * s2 + 2 * dth * s * cs
        p_th = dth_p * xth * xth + c2 * (2 * ang * ang_th / denom - ang * ang * denom_th / (denom * denom))
        out = [p_xt, p_xr, p_xth, p_xph, 0.0, -p_r, -p_th, 0.0]
        if rescale:
            k = 1.0 / sqrt(xt * xt + xph * xph)
            out = [k * v for v in out]
        return out

    return rhs


def radial_budget(params: BlackHoleParams, point: PhasePoint):
    """Delta_theta * xi_theta^2 that would put the point on the characteristic set."""
    a = params.spin
    ah = params.alpha_hat
    c2 = (1 + ah) ** 2
    s = dn.sin(point.theta)
    cs = dn.cos(point.theta)
    dth = 1 + ah * cs * cs
    dr = delta_r(params, point.r)
    n = (point.r**2 + a * a) * point.xi_t + a * point.xi_phi
    ang = a * point.xi_t * s * s + point.xi_phi
    return c2 * n * n / dr - dr * point.xi_r**2 - c2 * ang * ang / (dth * s * s), dth


def project_to_characteristic(params: BlackHoleParams, point: PhasePoint, theta_min: float = THETA_MIN) -> PhasePoint:
    """Solve p = 0 for xi_theta, keeping its sign (positive root for xi_theta == 0)."""
    check_point(params, point, theta_min)
    budget, dth = radial_budget(params, point)
    if budget < 0:
        raise NoRealRoot(f"no real xi_theta puts {point} on the characteristic set")
    root = math.sqrt(budget / dth)
    sign = -1.0 if point.xi_theta < 0 else 1.0
    return point.replace(xi_theta=sign * root)


def as_array(point: PhasePoint) -> np.ndarray:
    return np.array(point.as_tuple(), dtype=float)
