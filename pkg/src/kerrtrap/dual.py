"""Forward-mode dual numbers over a generic scalar.

``val`` and ``eps`` may be Python floats, numpy arrays or Duals of an older
tag, so derivatives nest to any order and vectorise over array shapes.
Every derivative request draws a fresh tag; when Duals with different tags
meet, the older one is treated as a constant of the newer algebra, which
keeps nested derivatives free of perturbation confusion.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

_tags = itertools.count(1)


def new_tag() -> int:
    return next(_tags)


def _tag(x) -> int:
    return x.tag if type(x) is Dual else 0


class Dual:
    """Value plus one infinitesimal direction, ``val + eps * e`` with e**2 = 0."""

    __slots__ = ("val", "eps", "tag")
    # numpy must defer binary operators to us instead of building object arrays
    __array_ufunc__ = None

    def __init__(self, val, eps, tag: int):
        self.val = val
        self.eps = eps
        self.tag = tag

    def __repr__(self) -> str:
        return f"Dual({self.val!r}, {self.eps!r}, tag={self.tag})"

    # arithmetic -------------------------------------------------------------
    def __add__(self, o):
        if _tag(o) > self.tag:
            return o.__radd__(self)
        if type(o) is Dual and o.tag == self.tag:
            return Dual(self.val + o.val, self.eps + o.eps, self.tag)
        return Dual(self.val + o, self.eps, self.tag)

    def __radd__(self, o):
        return Dual(o + self.val, self.eps, self.tag)

    def __sub__(self, o):
        if _tag(o) > self.tag:
            return o.__rsub__(self)
        if type(o) is Dual and o.tag == self.tag:
            return Dual(self.val - o.val, self.eps - o.eps, self.tag)
        return Dual(self.val - o, self.eps, self.tag)

    def __rsub__(self, o):
        return Dual(o - self.val, -self.eps, self.tag)

    def __mul__(self, o):
        if _tag(o) > self.tag:
            return o.__rmul__(self)
        if type(o) is Dual and o.tag == self.tag:
            return Dual(self.val * o.val, self.val * o.eps + self.eps * o.val, self.tag)
        return Dual(self.val * o, self.eps * o, self.tag)

    def __rmul__(self, o):
        return Dual(o * self.val, o * self.eps, self.tag)

    def __truediv__(self, o):
        if _tag(o) > self.tag:
            return o.__rtruediv__(self)
        if type(o) is Dual and o.tag == self.tag:
            q = self.val / o.val
            return Dual(q, (self.eps - q * o.eps) / o.val, self.tag)
        return Dual(self.val / o, self.eps / o, self.tag)

    def __rtruediv__(self, o):
        q = o / self.val
        return Dual(q, -q * self.eps / self.val, self.tag)

    def __pow__(self, p):
        if type(p) is Dual:
            return exp(p * log(self))
        if p == 2:
            return Dual(self.val * self.val, 2.0 * self.val * self.eps, self.tag)
        return Dual(self.val**p, p * self.val ** (p - 1) * self.eps, self.tag)

    def __neg__(self):
        return Dual(-self.val, -self.eps, self.tag)

    def __pos__(self):
        return self

    def __abs__(self):
        s = np.sign(primal(self.val))
        return Dual(abs(self.val), s * self.eps, self.tag)

    # comparisons act on the primal value only
    def __lt__(self, o):
        return primal(self) < primal(o)

    def __le__(self, o):
        return primal(self) <= primal(o)

    def __gt__(self, o):
        return primal(self) > primal(o)

    def __ge__(self, o):
        return primal(self) >= primal(o)

    def __float__(self) -> float:
        return float(primal(self))

    @property
    def shape(self):
        return np.shape(primal(self))


def primal(x):
    """Strip every dual layer and return the underlying float or array."""
    while type(x) is Dual:
        x = x.val
    return x


def tangent(y, tag: int):
    """Coefficient of the ``tag`` direction in ``y`` (0.0 if y does not depend on it)."""
    if type(y) is Dual and y.tag == tag:
        return y.eps
    if type(y) is Dual and y.tag > tag:
        # a newer layer on top: project it away component-wise
        return Dual(tangent(y.val, tag), tangent(y.eps, tag), y.tag)
    return 0.0


def strip(y, tag: int):
    """Value of ``y`` with the ``tag`` direction dropped."""
    if type(y) is Dual and y.tag == tag:
        return y.val
    if type(y) is Dual and y.tag > tag:
        return Dual(strip(y.val, tag), strip(y.eps, tag), y.tag)
    return y


# elementary functions --------------------------------------------------------

def _is_plain_float(x) -> bool:
    return isinstance(x, (float, int)) and not isinstance(x, bool)


def sqrt(x):
    if type(x) is Dual:
        s = sqrt(x.val)
        return Dual(s, x.eps / (2.0 * s), x.tag)
    if _is_plain_float(x):
        return math.sqrt(x)
    return np.sqrt(x)


def exp(x):
    if type(x) is Dual:
        e = exp(x.val)
        return Dual(e, e * x.eps, x.tag)
    if _is_plain_float(x):
        return math.exp(x)
    return np.exp(x)


def log(x):
    if type(x) is Dual:
        return Dual(log(x.val), x.eps / x.val, x.tag)
    if _is_plain_float(x):
        return math.log(x)
    return np.log(x)


def sin(x):
    if type(x) is Dual:
        return Dual(sin(x.val), cos(x.val) * x.eps, x.tag)
    if _is_plain_float(x):
        return math.sin(x)
    return np.sin(x)


def cos(x):
    if type(x) is Dual:
        return Dual(cos(x.val), -sin(x.val) * x.eps, x.tag)
    if _is_plain_float(x):
        return math.cos(x)
    return np.cos(x)


def where(cond, a, b):
    """Element-wise select that keeps every dual layer of both branches."""
    t = max(_tag(a), _tag(b))
    if t == 0:
        return np.where(cond, a, b)
    av, ae = (a.val, a.eps) if _tag(a) == t else (a, 0.0)
    bv, be = (b.val, b.eps) if _tag(b) == t else (b, 0.0)
    return Dual(where(cond, av, bv), where(cond, ae, be), t)


def _full_shape(x):
    if type(x) is Dual:
        return np.broadcast_shapes(_full_shape(x.val), _full_shape(x.eps))
    return np.shape(x)


def dsum(x, axis=-1, _shape=None):
    """Sum over an array axis, keeping every dual layer."""
    shape = _full_shape(x) if _shape is None else _shape
    if type(x) is Dual:
        return Dual(dsum(x.val, axis, shape), dsum(x.eps, axis, shape), x.tag)
    return np.sum(np.broadcast_to(x, shape), axis=axis)


def expand(x, axis=-1):
    """Insert a length-one axis in every layer (for broadcasting against quadrature nodes)."""
    if type(x) is Dual:
        return Dual(expand(x.val, axis), expand(x.eps, axis), x.tag)
    return np.expand_dims(np.asarray(x, dtype=float), axis)


# derivative drivers ------------------------------------------------------------

def derivative(f: Callable, x):
    """Return ``(f(x), f'(x))`` for a scalar argument, exact to roundoff."""
    t = new_tag()
    y = f(Dual(x, 1.0, t))
    return strip(y, t), tangent(y, t)


def partial(f: Callable, args: Sequence, index: int):
    """Derivative of ``f(*args)`` with respect to ``args[index]``."""
    t = new_tag()
    seeded = list(args)
    seeded[index] = Dual(args[index], 1.0, t)
    return tangent(f(*seeded), t)


def gradient(f: Callable, args: Sequence, indices: Sequence[int] | None = None):
    """Value and list of partials of ``f(*args)``.

    Only the positions in ``indices`` are seeded; the rest get a zero partial.
    """
    if indices is None:
        indices = range(len(args))
    value = f(*args)
    grad = [0.0] * len(args)
    for i in indices:
        grad[i] = partial(f, args, i)
    return value, grad
