"""Truncated bivariate Taylor series ("jets") on a 2D chart.

A :class:`Jet` of order ``N`` stores the Taylor coefficients ``c[i, j]`` of
``x**i * y**j`` for ``i + j <= N`` around a base point, packed in graded order

    (0,0) | (1,0) (0,1) | (2,0) (1,1) (0,2) | (3,0) (2,1) (1,2) (0,3) | ...

so truncating to a lower order is a prefix slice.  Coefficients carry a
trailing batch shape, which lets every geometric quantity be evaluated at
many points with a single pass of numpy calls.

Partial derivatives are recovered as ``d^{i+j} f / dx^i dy^j = i! j! c[i, j]``.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "Jet",
    "ScalarJet3",
    "ncoef",
    "monomials",
    "variables",
    "fd_jet_adaptor",
]


def ncoef(order: int) -> int:
    return (order + 1) * (order + 2) // 2


@lru_cache(maxsize=None)
def monomials(order: int) -> tuple[tuple[int, int], ...]:
    """Exponent pairs ``(i, j)`` in storage order."""
    out = []
    for d in range(order + 1):
        for j in range(d + 1):
            out.append((d - j, j))
    return tuple(out)


def _index(i: int, j: int) -> int:
    d = i + j
    return d * (d + 1) // 2 + j


@lru_cache(maxsize=None)
def _product_table(order: int):
    # (flat pair indices into the K*K outer product, reduceat starts)
    K = ncoef(order)
    mons = monomials(order)
    by_target: list[list[int]] = [[] for _ in range(K)]
    for m1, (i1, j1) in enumerate(mons):
        for m2, (i2, j2) in enumerate(mons):
            if i1 + i2 + j1 + j2 <= order:
                by_target[_index(i1 + i2, j1 + j2)].append(m1 * K + m2)
    flat, starts = [], []
    for lst in by_target:
        starts.append(len(flat))
        flat.extend(lst)
    return np.array(flat), np.array(starts)


@lru_cache(maxsize=None)
def _diff_table(order: int, axis: int):
    # derivative of an order-N jet is an order N-1 jet
    src, fac = [], []
    for i, j in monomials(order - 1):
        if axis == 0:
            src.append(_index(i + 1, j))
            fac.append(i + 1)
        else:
            src.append(_index(i, j + 1))
            fac.append(j + 1)
    return np.array(src), np.array(fac, dtype=float)


@lru_cache(maxsize=None)
def _degrees(order: int) -> np.ndarray:
    return np.array([i + j for i, j in monomials(order)])


@lru_cache(maxsize=None)
def _factorials(order: int) -> np.ndarray:
    return np.array([factorial(i) * factorial(j) for i, j in monomials(order)], dtype=float)


def _pad(c: np.ndarray, ndim: int) -> np.ndarray:
    # insert singleton batch axes right after the coefficient axis
    if c.ndim >= ndim:
        return c
    return c.reshape(c.shape[:1] + (1,) * (ndim - c.ndim) + c.shape[1:])


class Jet:
    """Order-``N`` truncated Taylor expansion of a scalar field at a point.

    ``coeffs`` has shape ``(ncoef(order), *batch)``.  Arithmetic with plain
    floats or numpy arrays (broadcast over the batch) is supported, as is
    arithmetic between jets of different orders (the result has the lower
    order).
    """

    __slots__ = ("coeffs", "order")
    __array_priority__ = 100

    def __init__(self, coeffs, order: int):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.order = order
        if self.coeffs.shape[0] != ncoef(order):
            raise ValueError(
                f"order {order} jet needs {ncoef(order)} coefficients, got {self.coeffs.shape[0]}"
            )

    @classmethod
    def _raw(cls, coeffs, order):
        # trusted internal constructor: no conversion or validation
        jet = object.__new__(Jet)
        jet.coeffs = coeffs
        jet.order = order
        return jet

    # construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((ncoef(order),) + value.shape)
        c[0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, axis: int, order: int) -> "Jet":
        """The coordinate function ``x`` (axis 0) or ``y`` (axis 1) expanded at ``value``."""
        jet = cls.constant(value, order)
        if order >= 1:
            jet.coeffs[1 + axis] = 1.0
        return jet

    @classmethod
    def from_partials(cls, partials: Sequence, order: int) -> "Jet":
        """Build from partial derivatives listed in storage order."""
        p = np.asarray(partials, dtype=float)
        fac = _factorials(order).reshape((-1,) + (1,) * (p.ndim - 1))
        return cls(p / fac, order)

    # views ------------------------------------------------------------

    @property
    def value(self):
        return self.coeffs[0]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    def partial(self, i: int, j: int):
        """``d^{i+j}/dx^i dy^j`` at the base point."""
        if i + j > self.order:
            raise ValueError(f"partial ({i},{j}) exceeds jet order {self.order}")
        return self.coeffs[_index(i, j)] * (factorial(i) * factorial(j))

    def partials(self) -> np.ndarray:
        """All partial derivatives in storage order."""
        fac = _factorials(self.order).reshape((-1,) + (1,) * len(self.batch_shape))
        return self.coeffs * fac

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet._raw(self.coeffs[: ncoef(order)], order)

    def diff(self, axis: int) -> "Jet":
        """Partial derivative along ``axis``; loses one order."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = _diff_table(self.order, axis)
        fac = fac.reshape((-1,) + (1,) * len(self.batch_shape))
        return Jet._raw(self.coeffs[src] * fac, self.order - 1)

    def scale(self, t: float) -> "Jet":
        """Expansion of ``s -> f(base + t*s)``: coefficient of degree d times t**d."""
        w = float(t) ** _degrees(self.order)
        return Jet(self.coeffs * w.reshape((-1,) + (1,) * len(self.batch_shape)), self.order)

    def __getitem__(self, idx) -> "Jet":
        # index into the batch
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.coeffs[(slice(None),) + idx], self.order)

    # arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.order == self.order and other.coeffs.ndim == self.coeffs.ndim:
                return self.coeffs, other.coeffs, self.order
            n = min(self.order, other.order)
            a, b = self.truncate(n).coeffs, other.truncate(n).coeffs
            nd = max(a.ndim, b.ndim)
            return _pad(a, nd), _pad(b, nd), n
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            other = np.asarray(other, dtype=float)
            batch = np.broadcast_shapes(self.batch_shape, other.shape)
            c = np.broadcast_to(_pad(self.coeffs, 1 + len(batch)), self.coeffs.shape[:1] + batch).copy()
            c[0] += other
            return Jet._raw(c, self.order)
        a, b, n = pair
        return Jet._raw(a + b, n)

    __radd__ = __add__

    def __neg__(self):
        return Jet._raw(-self.coeffs, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._coerce(other)
        if pair is None:
            other = np.asarray(other, dtype=float)
            c = _pad(self.coeffs, 1 + other.ndim)
            return Jet._raw(c * other, self.order)
        a, b, n = pair
        if n == 0:
            return Jet._raw(a * b, 0)
        if n == 1:
            out = a * b[0]
            out[1:] += a[0] * b[1:]
            return Jet._raw(out, 1)
        K = a.shape[0]
        flat, starts = _product_table(n)
        outer = a[:, None] * b[None, :]
        outer = outer.reshape((K * K,) + outer.shape[2:])
        return Jet._raw(np.add.reduceat(outer[flat], starts, axis=0), n)

    __rmul__ = __mul__

    def _nilpotent(self):
        h = Jet(self.coeffs.copy(), self.order)
        h.coeffs[0] = 0.0
        return h

    def compose(self, derivs: Sequence) -> "Jet":
        """``f(self)`` given ``derivs[n] = f^(n)(self.value)`` for n = 0..order."""
        h = self._nilpotent()
        out = Jet.constant(derivs[0] * np.ones(self.batch_shape), self.order)
        power = None
        for n in range(1, self.order + 1):
            power = h if power is None else power * h
            out = out + power * (derivs[n] / factorial(n))
        return out

    def reciprocal(self) -> "Jet":
        a0 = self.coeffs[0]
        if np.any(a0 == 0):
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        derivs = [((-1) ** n) * factorial(n) / a0 ** (n + 1) for n in range(self.order + 1)]
        return self.compose(derivs)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if isinstance(n, (int, np.integer)) and n >= 0:
            out = Jet.constant(np.ones(self.batch_shape), self.order)
            base = self
            while n:
                if n & 1:
                    out = out * base
                base = base * base
                n >>= 1
            return out
        if isinstance(n, (int, np.integer)):
            return (self ** (-n)).reciprocal()
        a0 = self.coeffs[0]
        derivs = []
        c = 1.0
        for k in range(self.order + 1):
            derivs.append(c * a0 ** (n - k))
            c *= n - k
        return self.compose(derivs)

    def exp(self) -> "Jet":
        e = np.exp(self.coeffs[0])
        return self.compose([e] * (self.order + 1))

    def log(self) -> "Jet":
        a0 = self.coeffs[0]
        derivs = [np.log(a0)] + [((-1) ** (n - 1)) * factorial(n - 1) / a0**n for n in range(1, self.order + 1)]
        return self.compose(derivs)

    def sqrt(self) -> "Jet":
        return self ** 0.5

    def sin(self) -> "Jet":
        a0 = self.coeffs[0]
        cyc = [np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)]
        return self.compose([cyc[n % 4] for n in range(self.order + 1)])

    def cos(self) -> "Jet":
        a0 = self.coeffs[0]
        cyc = [np.cos(a0), -np.sin(a0), -np.cos(a0), np.sin(a0)]
        return self.compose([cyc[n % 4] for n in range(self.order + 1)])

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, batch={self.batch_shape}, value={self.value!r})"


# numpy-style functions that accept floats or jets, so field definitions can
# be written once and evaluated either way
def exp(v):
    return v.exp() if isinstance(v, Jet) else np.exp(v)


def log(v):
    return v.log() if isinstance(v, Jet) else np.log(v)


def sqrt(v):
    return v.sqrt() if isinstance(v, Jet) else np.sqrt(v)


def sin(v):
    return v.sin() if isinstance(v, Jet) else np.sin(v)


def cos(v):
    return v.cos() if isinstance(v, Jet) else np.cos(v)


def variables(x, y, order: int) -> tuple[Jet, Jet]:
    """Coordinate jets ``(x, y)`` at the given base point(s)."""
    return Jet.variable(x, 0, order), Jet.variable(y, 1, order)


def lift(v, order: int, batch_shape=()) -> Jet:
    """Promote a float/array (or lower the order of a jet) to an order-``order`` jet."""
    if isinstance(v, Jet):
        return v.truncate(order)
    v = np.broadcast_to(np.asarray(v, dtype=float), batch_shape)
    return Jet.constant(v, order)


class ScalarJet3(Jet):
    """Value and partial derivatives to order 3 of a scalar field at a point."""

    __slots__ = ()

    def __init__(self, coeffs, order: int = 3):
        if order != 3:
            raise ValueError("ScalarJet3 is order 3")
        super().__init__(coeffs, 3)

    @classmethod
    def from_jet(cls, jet: Jet) -> "ScalarJet3":
        return cls(jet.truncate(3).coeffs)

    @property
    def d1(self):
        """(f_x, f_y)"""
        return np.array([self.partial(1, 0), self.partial(0, 1)])

    @property
    def d2(self):
        """(f_xx, f_xy, f_yy)"""
        return np.array([self.partial(2, 0), self.partial(1, 1), self.partial(0, 2)])

    @property
    def d3(self):
        """(f_xxx, f_xxy, f_xyy, f_yyy)"""
        return np.array([self.partial(3, 0), self.partial(2, 1), self.partial(1, 2), self.partial(0, 3)])


# fourth-order central stencils: offsets -> weights (before dividing by h**k)
_STENCILS = {
    0: {0: 1.0},
    1: {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12},
    2: {-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12},
    3: {-3: 1 / 8, -2: -1.0, -1: 13 / 8, 1: -13 / 8, 2: 1.0, 3: -1 / 8},
}


def fd_jet_adaptor(
    field: Callable,
    point,
    step_scale: float = 1e-3,
    domain: Callable | None = None,
) -> ScalarJet3:
    """Finite-difference :class:`ScalarJet3` of a plain scalar field.

    Every partial to order 3 is a tensor product of fourth-order central
    stencils, with step ``h = step_scale * (1 + |coordinate|)`` per axis.

    Parameters
    ----------
    field : callable
        ``field(x, y) -> float``; may be vectorized but need not be.
    point : Point or (x, y)
    step_scale : float
    domain : callable, optional
        ``domain(x, y) -> bool``; every stencil node must lie inside it.

    Raises
    ------
    DomainError
        If any stencil node falls outside ``domain``.
    """
    x0, y0 = float(point[0]), float(point[1])
    hx = step_scale * (1.0 + abs(x0))
    hy = step_scale * (1.0 + abs(y0))
    cache: dict[tuple[int, int], float] = {}

    def f(i, j):
        if (i, j) not in cache:
            x, y = x0 + i * hx, y0 + j * hy
            if domain is not None and not domain(x, y):
                raise DomainError(f"stencil node ({x:.6g}, {y:.6g}) outside the field domain")
            cache[(i, j)] = float(field(x, y))
        return cache[(i, j)]

    partials = []
    for i, j in monomials(3):
        acc = 0.0
        for di, wi in _STENCILS[i].items():
            for dj, wj in _STENCILS[j].items():
                acc += wi * wj * f(di, dj)
        partials.append(acc / (hx**i * hy**j))
    return ScalarJet3(np.array(partials) / _factorials(3))
