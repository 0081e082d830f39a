"""Small dense polynomials with generic (float, array or Dual) coefficients.

Coefficients are stored lowest degree first.
"""

from __future__ import annotations

import numpy as np


def horner(coeffs, x):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def add(p, q):
    n = max(len(p), len(q))
    p = list(p) + [0.0] * (n - len(p))
    q = list(q) + [0.0] * (n - len(q))
    return [a + b for a, b in zip(p, q)]


def scale(p, s):
    return [s * c for c in p]


def sub(p, q):
    return add(p, scale(q, -1.0))


def mul(p, q):
    out = [0.0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def deriv(p):
    if len(p) == 1:
        return [0.0]
    return [k * p[k] for k in range(1, len(p))]


def deflate(p, root):
    """Quotient of p by (x - root); the remainder is discarded."""
    n = len(p) - 1
    q = [0.0] * n
    acc = p[n]
    q[n - 1] = acc
    for k in range(n - 1, 0, -1):
        acc = p[k] + root * acc
        q[k - 1] = acc
    return q


def trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0.0:
        p.pop()
    return p


def real_roots(p, imag_tol=1e-9):
    """Real roots of a float polynomial via companion-matrix eigenvalues."""
    p = trim([float(c) for c in p])
    if len(p) < 2:
        return np.array([])
    z = np.roots(p[::-1])
    scale_ = max(1.0, float(np.max(np.abs(z)))) if len(z) else 1.0
    real = np.sort(z[np.abs(z.imag) <= imag_tol * scale_].real)
    return real


def newton_polish(p, x, iters=8):
    dp = deriv(p)
    for _ in range(iters):
        d = horner(dp, x)
        if d == 0:
            break
        step = horner(p, x) / d
        x = x - step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x
