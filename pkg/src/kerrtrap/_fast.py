"""Compiled Dormand-Prince loop for the H_p flow.

Same tableau, error norm and step control as ``integrators.integrate``; the
test suite holds the two together. Only the H_p flow is hot enough to need it.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

OK, DOMAIN_EXIT, MAX_STEPS, UNDERFLOW = 0, 1, 2, 3

A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1 = 35 / 384 - 5179 / 57600
E3 = 500 / 1113 - 7571 / 16695
E4 = 125 / 192 - 393 / 640
E5 = -2187 / 6784 + 92097 / 339200
E6 = 11 / 84 - 187 / 2100
E7 = -1 / 40


@njit(cache=True)
def _horner(c, x):
    acc = c[c.shape[0] - 1]
    for i in range(c.shape[0] - 2, -1, -1):
        acc = acc * x + c[i]
    return acc


@njit(cache=True)
def hp_rhs(y, out, consts, n_c, k1_c, d_c, dp_c):
    a, m, lam, ah, c2, k, factored, rc = consts[0], consts[1], consts[2], consts[3], consts[4], consts[5], consts[6], consts[7]
    r, th, xt, xr, xth, xph = y[1], y[2], y[4], y[5], y[6], y[7]
    a2 = a * a
    s = math.sin(th)
    cs = math.cos(th)
    s2 = s * s
    dth = 1 + ah * cs * cs
    dth_p = -2 * ah * cs * s
    r2 = r * r
    dr = (r2 + a2) * (1 - lam * r2 / 3) - 2 * m * r
    dr_p = 2 * r * (1 - lam * r2 / 3) - (r2 + a2) * (2 * lam * r / 3) - 2 * m
    n = (r2 + a2) * xt + a * xph
    ang = a * xt * s2 + xph
    denom = dth * s2
    out[0] = k * (2 * c2 * a * ang / dth - 2 * c2 * n * (r2 + a2) / dr)
    out[1] = k * (2 * dr * xr)
    out[2] = k * (2 * dth * xth)
    out[3] = k * (2 * c2 * ang / denom - 2 * c2 * n * a / dr)
    out[4] = 0.0
    if factored != 0.0:
        dl = _horner(d_c, r)
        force = c2 * (r - rc) * _horner(n_c, r) * _horner(k1_c, r) / (dl * dl)
        out[5] = -k * (_horner(dp_c, r) * xr * xr - force)
    else:
        p_r = dr_p * xr * xr - c2 * (4 * n * r * xt / dr - n * n * dr_p / (dr * dr))
        out[5] = -k * p_r
    ang_th = 2 * a * xt * s * cs
    denom_th = dth_p * s2 + 2 * dth * s * cs
    p_th = dth_p * xth * xth + c2 * (2 * ang * ang_th / denom - ang * ang * denom_th / (denom * denom))
    out[6] = -k * p_th
    out[7] = 0.0


@njit(cache=True)
def _grow(arr, n):
    new = np.empty((2 * arr.shape[0], arr.shape[1]))
    new[:n] = arr[:n]
    return new


@njit(cache=True)
def _initial_step(y0, f0, rtol, atol, span, direction, consts, n_c, k1_c, d_c, dp_c):
    d0 = 0.0
    d1 = 0.0
    for i in range(8):
        sc = atol + abs(y0[i]) * rtol
        d0 += (y0[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = math.sqrt(d0 / 8)
    d1 = math.sqrt(d1 / 8)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    f1 = np.empty(8)
    hp_rhs(y1, f1, consts, n_c, k1_c, d_c, dp_c)
    d2 = 0.0
    for i in range(8):
        sc = atol + abs(y0[i]) * rtol
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = math.sqrt(d2 / 8) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


@njit(cache=True)
def dp45_hp(y0, duration, rtol, atol, max_steps, consts, n_c, k1_c, d_c, dp_c, r_lo, r_hi, th_lo, th_hi):
    """Returns (s, y, dy, status, n_steps)."""
    cap = 1024
    S = np.empty((cap, 1))
    Y = np.empty((cap, 8))
    F = np.empty((cap, 8))
    y = y0.copy()
    f = np.empty(8)
    hp_rhs(y, f, consts, n_c, k1_c, d_c, dp_c)
    S[0, 0] = 0.0
    Y[0] = y
    F[0] = f
    n = 1
    if duration == 0.0:
        return S[:n, 0].copy(), Y[:n].copy(), F[:n].copy(), OK, 0
    direction = 1.0 if duration > 0 else -1.0
    end = abs(duration)
    h = _initial_step(y, f, rtol, atol, end, direction, consts, n_c, k1_c, d_c, dp_c)
    s = 0.0
    steps = 0
    k2 = np.empty(8)
    k3 = np.empty(8)
    k4 = np.empty(8)
    k5 = np.empty(8)
    k6 = np.empty(8)
    k7 = np.empty(8)
    yt = np.empty(8)
    ynew = np.empty(8)
    status = OK
    while abs(s) < end * (1 - 1e-15):
        if steps >= max_steps:
            status = MAX_STEPS
            break
        h = min(h, end - abs(s))
        while True:
            if h < 1e-14 * max(1.0, abs(s)):
                status = UNDERFLOW
                break
            hs = direction * h
            for i in range(8):
                yt[i] = y[i] + hs * A21 * f[i]
            hp_rhs(yt, k2, consts, n_c, k1_c, d_c, dp_c)
            for i in range(8):
                yt[i] = y[i] + hs * (A31 * f[i] + A32 * k2[i])
            hp_rhs(yt, k3, consts, n_c, k1_c, d_c, dp_c)
            for i in range(8):
                yt[i] = y[i] + hs * (A41 * f[i] + A42 * k2[i] + A43 * k3[i])
            hp_rhs(yt, k4, consts, n_c, k1_c, d_c, dp_c)
            for i in range(8):
                yt[i] = y[i] + hs * (A51 * f[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            hp_rhs(yt, k5, consts, n_c, k1_c, d_c, dp_c)
            for i in range(8):
                yt[i] = y[i] + hs * (A61 * f[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            hp_rhs(yt, k6, consts, n_c, k1_c, d_c, dp_c)
            for i in range(8):
                ynew[i] = y[i] + hs * (A71 * f[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
            hp_rhs(ynew, k7, consts, n_c, k1_c, d_c, dp_c)
            acc = 0.0
            for i in range(8):
                e = hs * (E1 * f[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                acc += (e / sc) ** 2
            err = math.sqrt(acc / 8)
            if not math.isfinite(err):
                h *= 0.2
                continue
            if err <= 1.0:
                break
            h *= max(0.2, 0.9 * err ** -0.2)
        if status != OK:
            break
        factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        s_new = s + direction * h
        steps += 1
        r, th = ynew[1], ynew[2]
        if not (r_lo < r < r_hi) or not (th_lo <= th <= th_hi):
            status = DOMAIN_EXIT
            break
        if n == S.shape[0]:
            S = _grow(S, n)
            Y = _grow(Y, n)
            F = _grow(F, n)
        s = s_new
        y[:] = ynew
        f[:] = k7
        S[n, 0] = s
        Y[n] = y
        F[n] = f
        n += 1
        h = h * factor
    return S[:n, 0].copy(), Y[:n].copy(), F[:n].copy(), status, steps
