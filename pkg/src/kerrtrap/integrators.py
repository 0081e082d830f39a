"""Explicit Runge-Kutta integrators for small autonomous systems.

States are plain Python lists: for eight components this beats numpy's
per-call overhead by a wide margin, which matters because every flow in the
toolkit is low-dimensional and long.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import NoCrossing, StepFailure

# Dormand-Prince 5(4) tableau; the last row doubles as the 5th-order weights (FSAL)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (
    35 / 384 - 5179 / 57600,
    0.0,
    500 / 1113 - 7571 / 16695,
    125 / 192 - 393 / 640,
    -2187 / 6784 + 92097 / 339200,
    11 / 84 - 187 / 2100,
    -1 / 40,
)


@dataclass(frozen=True)
class IntegratorSpec:
    """``method`` is ``"dp45"`` (adaptive) or ``"rk4"`` (fixed step ``step``)."""

    method: str = "dp45"
    rtol: float = 1e-10
    atol: float = 1e-10
    step: float | None = None
    max_steps: int = 200_000

    def __post_init__(self):
        if self.method not in ("dp45", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "rk4" and not (self.step and self.step > 0):
            raise ValueError("rk4 needs a positive step")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    @property
    def tol(self) -> float:
        return max(self.rtol, self.atol)

    def describe(self) -> dict:
        if self.method == "rk4":
            return {"method": "rk4", "step": self.step, "max_steps": self.max_steps}
        return {"method": "dp45", "rtol": self.rtol, "atol": self.atol, "max_steps": self.max_steps}


@dataclass
class Solution:
    s: list
    y: list
    dy: list
    exit_reason: str | None = None
    event_s: float | None = None
    event_y: list | None = None


def _axpy(y, h, coeffs, ks):
    out = list(y)
    for c, k in zip(coeffs, ks):
        if c:
            hc = h * c
            for i, ki in enumerate(k):
                out[i] += hc * ki
    return out


def hermite(s0, y0, f0, s1, y1, f1, s):
    """Cubic Hermite interpolant between two accepted steps."""
    h = s1 - s0
    t = (s - s0) / h
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return [h00 * a + h10 * h * da + h01 * b + h11 * h * db for a, da, b, db in zip(y0, f0, y1, f1)]


def _locate(g, s0, y0, f0, s1, y1, f1, g0, g1, tol=1e-15, iters=60):
    """Secant iteration (Illinois-safeguarded) for g on the Hermite interpolant."""
    a, b, ga, gb = s0, s1, g0, g1
    side = 0
    x, yx = s1, y1
    for _ in range(iters):
        x = b - gb * (b - a) / (gb - ga)
        yx = hermite(s0, y0, f0, s1, y1, f1, x)
        gx = g(yx)
        if gx == 0 or abs(b - a) <= tol * max(1.0, abs(x)):
            break
        if (gx > 0) == (gb > 0):
            b, gb = x, gx
            if side == -1:
                ga *= 0.5
            side = -1
        else:
            a, ga = x, gx
            if side == 1:
                gb *= 0.5
            side = 1
    return x, yx


def dp_step(fun, y, f, h):
    """A single 5th-order Dormand-Prince step of length h (no error control)."""
    ks = [f]
    for i in range(1, 6):
        ks.append(list(fun(_axpy(y, h, _A[i], ks))))
    return _axpy(y, h, _A[6], ks)


def _polish(fun, g, s0, y0, f0, s_guess, y_guess, iters=4):
    """Secant refinement of a crossing using true one-step integrations from s0.

    The Hermite interpolant is only third-order accurate; a step from the last
    accepted point carries the integrator's own accuracy.
    """
    h_a = s_guess - s0
    if h_a == 0:
        return s_guess, y_guess
    y_a = dp_step(fun, y0, f0, h_a)
    g_a = g(y_a)
    h_b = h_a * (1 - 1e-6)
    y_b = dp_step(fun, y0, f0, h_b)
    g_b = g(y_b)
    for _ in range(iters):
        if g_a == 0 or g_a == g_b:
            break
        h_new = h_a - g_a * (h_a - h_b) / (g_a - g_b)
        h_b, g_b = h_a, g_a
        h_a = h_new
        y_a = dp_step(fun, y0, f0, h_a)
        g_a = g(y_a)
    return s0 + h_a, y_a


def _initial_step(fun, s0, y0, f0, direction, rtol, atol, span):
    sc = [atol + abs(v) * rtol for v in y0]
    d0 = math.sqrt(sum((v / w) ** 2 for v, w in zip(y0, sc)) / len(y0))
    d1 = math.sqrt(sum((v / w) ** 2 for v, w in zip(f0, sc)) / len(y0))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = [v + direction * h0 * d for v, d in zip(y0, f0)]
    f1 = fun(y1)
    d2 = math.sqrt(sum(((a - b) / w) ** 2 for a, b, w in zip(f1, f0, sc)) / len(y0)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate(
    fun: Callable,
    y0,
    duration: float,
    spec: IntegratorSpec,
    check: Callable | None = None,
    event: Callable | None = None,
) -> Solution:
    """Integrate y' = fun(y) from s = 0 to s = duration (either sign).

    ``check(y)`` returns a reason string when y leaves the domain; the run then
    stops and keeps the samples accepted so far. ``event(y)`` is a scalar whose
    first sign change terminates the run at the located crossing.
    """
    if not math.isfinite(duration):
        raise ValueError("duration must be finite")
    y = [float(v) for v in y0]
    f = list(fun(y))
    sol = Solution([0.0], [y], [f])
    if duration == 0:
        return sol
    direction = 1.0 if duration > 0 else -1.0
    g_prev = event(y) if event else None
    if event and g_prev == 0:
        sol.event_s, sol.event_y = 0.0, y
        return sol
    stepper = _rk4_step if spec.method == "rk4" else None
    s = 0.0
    end = abs(duration)
    h = spec.step if stepper else _initial_step(fun, 0.0, y, f, direction, spec.rtol, spec.atol, end)
    steps = 0
    while abs(s) < end * (1 - 1e-15):
        if steps >= spec.max_steps:
            raise StepFailure(f"max_steps={spec.max_steps} exceeded at s={s}")
        h = min(h, end - abs(s))
        if stepper:
            y_new, f_new = stepper(fun, y, f, direction * h)
            h_next = spec.step
        else:
            y_new, f_new, h, h_next = _dp45_step(fun, y, f, direction, h, spec, s)
        s_new = s + direction * h
        steps += 1
        if check is not None:
            reason = check(y_new)
            if reason:
                sol.exit_reason = f"DomainExit: {reason} at s={s_new}"
                return sol
        if event is not None:
            g_new = event(y_new)
            if g_new == 0 or (g_new > 0) != (g_prev > 0):
                se, ye = _locate(event, s, y, f, s_new, y_new, f_new, g_prev, g_new)
                se, ye = _polish(fun, event, s, y, f, se, ye)
                sol.event_s, sol.event_y = se, ye
                sol.s.append(s_new)
                sol.y.append(y_new)
                sol.dy.append(f_new)
                return sol
            g_prev = g_new
        s, y, f = s_new, y_new, f_new
        sol.s.append(s)
        sol.y.append(y)
        sol.dy.append(f)
        h = h_next
    return sol


def _rk4_step(fun, y, f, h):
    k1 = f
    k2 = fun([a + 0.5 * h * b for a, b in zip(y, k1)])
    k3 = fun([a + 0.5 * h * b for a, b in zip(y, k2)])
    k4 = fun([a + h * b for a, b in zip(y, k3)])
    y_new = [a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]
    return y_new, list(fun(y_new))


def _dp45_step(fun, y, f, direction, h, spec, s):
    """One accepted adaptive step: returns (y_new, f_new, h_used, h_next)."""
    rtol, atol = spec.rtol, spec.atol
    n = len(y)
    while True:
        if h < 1e-14 * max(1.0, abs(s)):
            raise StepFailure(f"step size underflow at s={s}")
        hs = direction * h
        ks = [f]
        for i in range(1, 7):
            ks.append(list(fun(_axpy(y, hs, _A[i], ks))))
        y_new = _axpy(y, hs, _A[6], ks)
        err_vec = _axpy([0.0] * n, hs, _E, ks)
        acc = 0.0
        for e, a, b in zip(err_vec, y, y_new):
            sc = atol + rtol * max(abs(a), abs(b))
            acc += (e / sc) ** 2
        err = math.sqrt(acc / n)
        if not math.isfinite(err):
            h *= 0.2
            continue
        if err <= 1.0:
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            return y_new, ks[6], h, h * factor
        h *= max(0.2, 0.9 * err ** -0.2)


def require_event(sol: Solution, what: str = "crossing") -> float:
    if sol.event_s is None:
        raise NoCrossing(f"no {what} within the integration window")
    return sol.event_s
