"""Kerr(-de Sitter) parameters, the horizon polynomial and the dual metric."""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import dual as dn
from . import polynomial as poly
from .errors import DegenerateRoots, DomainError, PoleExclusion

THETA_MIN = 1e-3
ROOT_SEPARATION = 1e-8


@dataclass(frozen=True)
class BlackHoleParams:
    """Mass, spin and cosmological constant in geometric units."""

    mass: float
    spin: float
    cosmo: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.cosmo >= 0:
            raise ValueError(f"cosmological constant must be non-negative, got {self.cosmo}")

    @property
    def alpha_hat(self) -> float:
        return self.cosmo * self.spin**2 / 3

    @property
    def delta0(self) -> float:
        return 1 + self.alpha_hat


def delta_r(params: BlackHoleParams, r):
    a2 = params.spin**2
    return (r * r + a2) * (1 - params.cosmo * r * r / 3) - 2 * params.mass * r


def delta_r_prime(params: BlackHoleParams, r):
    a2 = params.spin**2
    lam = params.cosmo
    return 2 * r * (1 - lam * r * r / 3) - (r * r + a2) * (2 * lam * r / 3) - 2 * params.mass


def delta_poly(params: BlackHoleParams) -> list:
    """Coefficients of Delta(r), lowest degree first (quadratic when cosmo == 0)."""
    a2 = params.spin**2
    lam = params.cosmo
    coeffs = [a2, -2 * params.mass, 1 - lam * a2 / 3, 0.0, -lam / 3]
    return poly.trim(coeffs) if lam == 0 else coeffs


def delta_theta(params: BlackHoleParams, theta, theta_min: float = THETA_MIN):
    check_theta(theta, theta_min)
    c = dn.cos(theta)
    return 1 + params.alpha_hat * c * c


def check_theta(theta, theta_min: float = THETA_MIN) -> None:
    th = np.asarray(dn.primal(theta))
    if np.any(th < theta_min) or np.any(th > math.pi - theta_min):
        raise PoleExclusion(f"theta outside pole band [{theta_min}, pi - {theta_min}]")


@dataclass(frozen=True)
class SubextremalReport:
    is_subextremal: bool
    roots: tuple
    r_e: float | None
    r_c_horizon: float | None
    degenerate: bool = False
    spin_below_mass: bool = False
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "is_subextremal": self.is_subextremal,
            "roots": list(self.roots),
            "r_e": self.r_e,
            "r_c_horizon": self.r_c_horizon,
            "degenerate": self.degenerate,
            "spin_below_mass": self.spin_below_mass,
        }


def classify_subextremal(
    params: BlackHoleParams, separation: float = ROOT_SEPARATION, strict: bool = False
) -> SubextremalReport:
    """Locate the horizons and decide whether Delta has the full set of distinct roots.

    With ``strict=True`` nearly coincident roots raise ``DegenerateRoots``
    instead of being reported as not subextremal.
    """
    m, a = params.mass, params.spin
    below = abs(a) < m
    if params.cosmo == 0:
        disc = m * m - a * a
        if disc < 0:
            return SubextremalReport(False, (), None, None, False, below)
        s = math.sqrt(disc)
        # r- via the product of roots avoids cancellation for small spin
        r_plus = m + s
        r_minus = a * a / r_plus
        degenerate = r_plus - r_minus < separation
        if degenerate and strict:
            raise DegenerateRoots(f"horizons {r_minus} and {r_plus} coincide")
        ok = not degenerate
        return SubextremalReport(ok, (r_minus, r_plus), r_plus if ok else None, None, degenerate, below)

    coeffs = delta_poly(params)
    z = np.roots(coeffs[::-1])
    degenerate = any(abs(z1 - z2) < separation for z1, z2 in itertools.combinations(z, 2))
    if degenerate and strict:
        raise DegenerateRoots("two roots of Delta closer than the separation tolerance")
    scale = max(1.0, float(np.max(np.abs(z))))
    real = sorted(poly.newton_polish(coeffs, float(x.real)) for x in z if abs(x.imag) <= 1e-9 * scale)
    ok = (not degenerate) and len(real) == 4
    if not ok:
        return SubextremalReport(False, tuple(real), None, None, degenerate, below)
    return SubextremalReport(True, tuple(real), real[2], real[3], False, below)


@functools.lru_cache(maxsize=256)
def exterior(params: BlackHoleParams) -> tuple[float, float]:
    """The open r-interval between the event horizon and the cosmological one (or infinity)."""
    rep = classify_subextremal(params)
    if not rep.is_subextremal:
        raise DomainError(f"parameters {params} are not subextremal")
    hi = rep.r_c_horizon if rep.r_c_horizon is not None else math.inf
    return rep.r_e, hi


def check_r(params: BlackHoleParams, r) -> None:
    lo, hi = exterior(params)
    rr = np.asarray(dn.primal(r))
    if np.any(rr <= lo) or np.any(rr >= hi):
        raise DomainError(f"r outside exterior ({lo}, {hi})")


def dual_metric(params: BlackHoleParams, point, theta_min: float = THETA_MIN):
    """Return ``(G, G_r, G_theta)`` of the inverse metric at a phase-space point."""
    check_r(params, point.r)
    dth = delta_theta(params, point.theta, theta_min)
    a = params.spin
    r, th = point.r, point.theta
    c2 = params.delta0**2
    s = dn.sin(th)
    cs = dn.cos(th)
    rho2 = r * r + a * a * cs * cs
    dr = delta_r(params, r)
    n = (r * r + a * a) * point.xi_t + a * point.xi_phi
    ang = a * s * s * point.xi_t + point.xi_phi
    g_r = (dr * point.xi_r**2 - c2 * n * n / dr) / rho2
    g_th = (dth * point.xi_theta**2 + c2 * ang * ang / (dth * s * s)) / rho2
    return g_r + g_th, g_r, g_th
