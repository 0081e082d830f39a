"""Blow-up coordinates at the corner {x1 = 0} x fiber infinity, and empirical symbol orders.

A symbol of order (m, m~) behaves like

    rho_hat^(-m) * rho_tilde^(-(m~ - m)/alpha),
    rho = rho_hat^alpha,   rho_tilde = sqrt(x1^2 + rho^2).

Along a ray x1 = sigma * rho the two factors merge into rho_hat^(-m~), so
log-log slopes on rays give m~. On an arc of fixed rho_hat, the slope against
rho_tilde^(-1) gives kappa = (m~ - m)/alpha, and m = m~ - alpha * kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateFit

MIN_DECADES = 3.0
MIN_ARC_DECADES = 1.0
RESIDUAL_THRESHOLD = 0.1
GROWTH_THRESHOLD = 0.05


@dataclass(frozen=True)
class BlowupCoords:
    rho_hat: float
    alpha: float
    x1: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.rho_hat > 0:
            raise ValueError("rho_hat must be positive")

    @classmethod
    def from_momentum(cls, xi, x1: float, alpha: float) -> "BlowupCoords":
        return cls(1.0 / math.sqrt(sum(v * v for v in xi)), alpha, x1)

    @property
    def rho(self) -> float:
        return self.rho_hat**self.alpha

    @property
    def rho_tilde(self) -> float:
        return math.hypot(self.x1, self.rho)

    @property
    def sigma(self) -> float:
        return self.x1 / self.rho


@dataclass(frozen=True)
class ScalingGrid:
    """Log grid in rho_hat^(-1), front-face rays in sigma, and arcs sweeping |x1| from rho to ``arc_max``."""

    inv_rho_hat_min: float = 1e2
    inv_rho_hat_max: float = 1e8
    n_rho: int = 25
    sigmas: tuple = (0.0, 0.5, -0.5, 2.0, -2.0)
    arc_max: float = 0.3
    n_arc: int = 25

    def inv_rho_hat(self) -> np.ndarray:
        return np.geomspace(self.inv_rho_hat_min, self.inv_rho_hat_max, self.n_rho)

    def describe(self) -> dict:
        return {
            "inv_rho_hat": [self.inv_rho_hat_min, self.inv_rho_hat_max, self.n_rho],
            "sigmas": list(self.sigmas),
            "arc_x1": ["rho", self.arc_max, self.n_arc],
        }


DEFAULT_GRID = ScalingGrid()


@dataclass(frozen=True)
class OrderEstimate:
    m_est: float
    m_tilde_est: float
    fit_residual: float
    grid_spec: dict = field(default_factory=dict)
    kappa: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "m_est": self.m_est,
            "m_tilde_est": self.m_tilde_est,
            "kappa": self.kappa,
            "fit_residual": self.fit_residual,
            "grid_spec": dict(self.grid_spec),
        }


def rho_tilde(x1, rho_hat, alpha):
    return np.sqrt(np.asarray(x1) ** 2 + np.asarray(rho_hat) ** (2 * alpha))


def _fit(x, y):
    """Least-squares slope and RMS residual of y against x."""
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(res**2)))


def _log_abs(symbol, x1, rho_hat):
    a = np.asarray(symbol(x1, rho_hat), dtype=float)
    a = np.broadcast_to(a, np.broadcast_shapes(np.shape(x1), np.shape(rho_hat)))
    return a


def estimate_orders(
    symbol: Callable, alpha: float, grid: ScalingGrid = DEFAULT_GRID, residual_threshold: float = RESIDUAL_THRESHOLD
) -> OrderEstimate:
    """Recover (m, m~) from log-log slopes on rays (m~) and on an arc (kappa)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    inv = grid.inv_rho_hat()
    if math.log10(inv[-1] / inv[0]) < MIN_DECADES:
        raise DegenerateFit(f"rays span fewer than {MIN_DECADES} decades")
    rho_hat = 1.0 / inv
    rho = rho_hat**alpha
    slopes, residuals = [], []
    for sg in grid.sigmas:
        a = _log_abs(symbol, sg * rho, rho_hat)
        if np.any(a == 0) or not np.all(np.isfinite(a)):
            continue
        s, res = _fit(np.log(inv), np.log(np.abs(a)))
        slopes.append(s)
        residuals.append(res)
    if not slopes:
        raise DegenerateFit("symbol vanishes on every sample ray")
    m_tilde = float(np.mean(slopes))
    spread = float(np.max(slopes) - np.min(slopes))

    # arc at the finest rho_hat, both signs of x1
    rh = rho_hat[-1]
    r0 = rh**alpha
    if math.log10(grid.arc_max / r0) < MIN_ARC_DECADES:
        raise DegenerateFit("arc spans less than one decade")
    x1 = np.geomspace(r0, grid.arc_max, grid.n_arc)
    kappas = []
    for sgn in (1.0, -1.0):
        a = _log_abs(symbol, sgn * x1, rh)
        if np.any(a == 0) or not np.all(np.isfinite(a)):
            continue
        k, res = _fit(np.log(1.0 / rho_tilde(x1, rh, alpha)), np.log(np.abs(a)))
        kappas.append(k)
        residuals.append(res)
    if not kappas:
        raise DegenerateFit("symbol vanishes on the sample arc")
    kappa = float(np.mean(kappas))
    fit_residual = max(max(residuals), spread)
    if fit_residual > residual_threshold:
        raise DegenerateFit(f"log-log fit residual {fit_residual:.3g} exceeds {residual_threshold}")
    spec = grid.describe() | {"alpha": alpha}
    return OrderEstimate(m_tilde - alpha * kappa, m_tilde, fit_residual, spec, kappa)


# ---------------------------------------------------------------------------
# bound checker

@dataclass(frozen=True)
class SymbolBoundReport:
    holds: bool
    constant: float
    worst: dict
    growth_exponent: float
    per_order: dict

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "constant": self.constant,
            "worst": dict(self.worst),
            "growth_exponent": self.growth_exponent,
            "per_order": {f"{l},{g}": v for (l, g), v in self.per_order.items()},
        }


def _derivative(symbol, x1, rho_hat, alpha, l, g):
    """d_{x1}^l d_{|xi|}^g a by central differences, x1-steps proportional to rho_tilde."""

    def a_xi(x, rh):
        if g == 0:
            return np.asarray(symbol(x, rh), dtype=float)
        # |xi| = 1/rho_hat; step in |xi| relative to |xi|
        xi = 1.0 / rh
        h = 1e-4 * xi
        return (np.asarray(symbol(x, 1.0 / (xi + h)), float) - np.asarray(symbol(x, 1.0 / (xi - h)), float)) / (2 * h)

    if l == 0:
        return a_xi(x1, rho_hat)
    h = 1e-3 * rho_tilde(x1, rho_hat, alpha)
    if l == 1:
        return (a_xi(x1 + h, rho_hat) - a_xi(x1 - h, rho_hat)) / (2 * h)
    if l == 2:
        return (a_xi(x1 + h, rho_hat) - 2 * a_xi(x1, rho_hat) + a_xi(x1 - h, rho_hat)) / (h * h)
    raise ValueError("x1-derivative order above 2 is not supported")


def verify_symbol_bound(
    symbol: Callable, m: float, m_tilde: float, alpha: float, max_order: int = 2,
    grid: ScalingGrid = DEFAULT_GRID, growth_threshold: float = GROWTH_THRESHOLD,
) -> SymbolBoundReport:
    """Check |d_{x1}^l d_xi^g a| <= C rho_hat^(-m+g) rho_tilde^(-(m~-m)/alpha - l) on the grid.

    The claim fails when the best constant keeps growing as the grid reaches
    toward the corner: the log of the worst ratio at each rho_hat level is
    fitted against log rho_hat^(-1), and a slope above ``growth_threshold`` fails.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if max_order > 2:
        raise ValueError("max_order must be at most 2")
    inv = grid.inv_rho_hat()
    if math.log10(inv[-1] / inv[0]) < MIN_DECADES:
        raise DegenerateFit(f"grid spans fewer than {MIN_DECADES} decades")
    rho_hat = 1.0 / inv
    kappa = (m_tilde - m) / alpha
    worst_c, worst_at = 0.0, {}
    per_order = {}
    level_max = np.zeros(len(rho_hat))
    for l in range(max_order + 1):
        for g in (0, 1):
            ratios_by_level = []
            for rh in rho_hat:
                rho = rh**alpha
                x1 = np.concatenate([np.array(grid.sigmas) * rho, np.geomspace(rho, grid.arc_max, grid.n_arc),
                                     -np.geomspace(rho, grid.arc_max, grid.n_arc)])
                d = np.abs(_derivative(symbol, x1, rh, alpha, l, g))
                rt = rho_tilde(x1, rh, alpha)
                bound = rh ** (-m + g) * rt ** (-kappa - l)
                ratio = d / bound
                ratios_by_level.append(float(np.max(ratio)))
                i = int(np.argmax(ratio))
                if ratio[i] > worst_c:
                    worst_c = float(ratio[i])
                    worst_at = {"x1": float(x1[i]), "rho_hat": float(rh), "l": l, "gamma": g}
            lv = np.array(ratios_by_level)
            per_order[(l, g)] = float(lv.max())
            level_max = np.maximum(level_max, lv)
    pos = level_max > 0
    if pos.sum() >= 2:
        growth, _ = _fit(np.log(inv[pos]), np.log(level_max[pos]))
    else:
        growth = 0.0
    holds = bool(np.isfinite(worst_c) and growth <= growth_threshold)
    return SymbolBoundReport(holds, worst_c, worst_at, float(growth), per_order)


# ---------------------------------------------------------------------------
# built-in test symbols

def monomial(m0: float, k: float, alpha: float) -> Callable:
    """rho_hat^(-m0) * rho_tilde^(-k), of order (m0, m0 + alpha k)."""

    def a(x1, rh):
        return np.asarray(rh, float) ** (-m0) * rho_tilde(x1, rh, alpha) ** (-k)

    return a


def builtin_symbol(name: str, alpha: float) -> Callable:
    if name == "x1":
        return lambda x1, rh: np.asarray(x1, float) + 0.0 * np.asarray(rh, float)
    if name == "rho_hat_inv":
        return monomial(1.0, 0.0, alpha)
    if name == "rho_tilde_inv":
        return monomial(0.0, 1.0, alpha)
    if name.startswith("monomial:"):
        m0, k = (float(v) for v in name.split(":", 1)[1].split(","))
        return monomial(m0, k, alpha)
    raise ValueError(f"unknown builtin symbol {name!r}")


BUILTINS = ("x1", "rho_hat_inv", "rho_tilde_inv", "monomial:<m0>,<k>")
