"""Tensor calculus on a 2D chart, driven by jets.

Index conventions: a, b, c in {0, 1} over (x, y); ``G[a][b][c]`` is the
Christoffel symbol Gamma_ab^c with ``nabla_a X^c = d_a X^c + Gamma_ab^c X^b``.
The Ricci tensor is normalised by

    (nabla_a nabla_b - nabla_b nabla_a) X^b = -R_ab X^b,

which makes the round sphere positively curved (R_ab = K g_ab, K > 0).

Every operation accepts a single point or a batch: ``point`` may be a
:class:`Point`, an ``(x, y)`` pair of floats, or an ``(x, y)`` pair of
equally-shaped arrays.  Returned arrays carry the tensor indices first and
the batch shape last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DegenerateMetricError, DomainError, PreconditionError
from .jets import Jet, fd_jet_adaptor, lift, monomials, variables

DOMAIN_TOL = 1e-12
RICCI_SYMMETRY_TOL = 1e-8

IDX = (0, 1)


class Point(NamedTuple):
    x: float
    y: float


def coords(point):
    """``(x, y)`` as floats or float arrays."""
    x, y = point[0], point[1]
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(x), float(y)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return x, y


def _batch_shape(point) -> tuple[int, ...]:
    return np.shape(coords(point)[0])


def _values(tensor):
    """Nested lists of jets -> array of values with tensor axes first."""
    if isinstance(tensor, Jet):
        return tensor.value
    return np.array([_values(t) for t in tensor])


def _everywhere(x, y):
    return np.ones(np.shape(x))


# --------------------------------------------------------------------------
# fields


class MetricField:
    """A Riemannian metric given by jet-aware component functions.

    Parameters
    ----------
    components : callable
        ``components(x, y) -> (g00, g01, g11)``.  Must be written with the
        arithmetic of :mod:`projflat.jets` (``+ - * /``, ``**``, and the
        ``exp``/``log``/``sqrt``/``sin``/``cos`` helpers) so that it can be
        evaluated on jets as well as on floats.
    margin : callable, optional
        ``margin(x, y)`` on floats/arrays; the domain is ``margin > 1e-12``.
        Defaults to the whole plane.
    name : str
    """

    def __init__(self, components: Callable, margin: Callable | None = None, name: str = "metric"):
        self.components = components
        self.margin = margin or _everywhere
        self.name = name
        self._jet_source = None

    @classmethod
    def from_numeric(cls, components: Callable, margin: Callable | None = None,
                     name: str = "numeric", step_scale: float = 1e-3) -> "MetricField":
        """Wrap a plain float-valued metric; derivatives come from finite differences.

        Jets are limited to order 3 and points are processed one at a time.
        """
        field = cls(components, margin, name)
        field._jet_source = step_scale
        return field

    def contains(self, point):
        x, y = coords(point)
        m = self.margin(x, y)
        return m > DOMAIN_TOL

    def jets(self, point, order: int):
        """``[[g00, g01], [g01, g11]]`` as jets of the given order."""
        x, y = coords(point)
        shape = np.shape(x)
        if self._jet_source is not None:
            return self._fd_jets(x, y, order)
        X, Y = variables(x, y, order)
        g00, g01, g11 = (lift(c, order, shape) for c in self.components(X, Y))
        return [[g00, g01], [g01, g11]]

    def _fd_jets(self, x, y, order):
        if order > 3:
            raise ValueError("finite-difference metrics provide jets up to order 3")
        dom = lambda u, v: bool(self.margin(u, v) > DOMAIN_TOL)  # noqa: E731
        xs, ys = np.atleast_1d(x).ravel(), np.atleast_1d(y).ravel()
        comps = []
        for k in range(3):
            f = lambda u, v, k=k: self.components(u, v)[k]  # noqa: E731
            c = np.stack([fd_jet_adaptor(f, (u, v), self._jet_source, dom).coeffs
                          for u, v in zip(xs, ys)], axis=-1)
            c = c.reshape(c.shape[:1] + np.shape(x))
            comps.append(Jet(c, 3).truncate(order))
        g00, g01, g11 = comps
        return [[g00, g01], [g01, g11]]

    def values(self, point) -> np.ndarray:
        return _values(self.jets(point, 0))

    def __repr__(self):
        return f"MetricField({self.name!r})"


class ConnectionField:
    """A torsion-free connection; ``evaluate(point, order)`` returns ``G[a][b][c]`` jets.

    ``G[a][b][c]`` and ``G[b][a][c]`` must be the same object or equal jets.
    """

    def __init__(self, evaluate: Callable, margin: Callable | None = None,
                 name: str = "connection", metric: MetricField | None = None):
        self._evaluate = evaluate
        self.margin = margin or _everywhere
        self.name = name
        self.metric = metric

    @classmethod
    def from_function(cls, fn: Callable, margin: Callable | None = None,
                      name: str = "connection") -> "ConnectionField":
        """Connection from ``fn(x, y) -> G`` written in jet arithmetic.

        ``G`` is indexed ``G[a][b][c]``; the function is responsible for the
        lower-index symmetry.
        """

        def evaluate(point, order):
            x, y = coords(point)
            X, Y = variables(x, y, order)
            G = fn(X, Y)
            shape = np.shape(x)
            return [[[lift(G[a][b][c], order, shape) for c in IDX] for b in IDX] for a in IDX]

        return cls(evaluate, margin, name)

    @classmethod
    def flat(cls) -> "ConnectionField":
        return cls.from_function(lambda x, y: [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
                                 name="flat")

    def contains(self, point):
        x, y = coords(point)
        return self.margin(x, y) > DOMAIN_TOL

    def christoffel(self, point, order: int = 0):
        return self._evaluate(point, order)

    def values(self, point) -> np.ndarray:
        """Gamma_ab^c as an array of shape ``(2, 2, 2, *batch)``."""
        return _values(self._evaluate(point, 0))

    def __repr__(self):
        return f"ConnectionField({self.name!r})"


class CovectorField:
    """A 1-form Upsilon_a; ``evaluate(point, order)`` returns ``[U0, U1]`` jets."""

    def __init__(self, evaluate: Callable, name: str = "covector"):
        self._evaluate = evaluate
        self.name = name

    @classmethod
    def from_function(cls, fn: Callable, name: str = "covector") -> "CovectorField":
        def evaluate(point, order):
            x, y = coords(point)
            X, Y = variables(x, y, order)
            shape = np.shape(x)
            return [lift(c, order, shape) for c in fn(X, Y)]

        return cls(evaluate, name)

    @classmethod
    def zero(cls) -> "CovectorField":
        return cls.from_function(lambda x, y: (0.0, 0.0), name="zero")

    def jets(self, point, order: int):
        return self._evaluate(point, order)

    def values(self, point) -> np.ndarray:
        return _values(self._evaluate(point, 0))


@dataclass(frozen=True)
class RicciValue:
    """R_ab at a point (not assumed symmetric); ``jets`` when derivatives were requested."""

    R: np.ndarray
    jets: list | None = None

    @property
    def asymmetry(self):
        return np.abs(self.R[0, 1] - self.R[1, 0])


@dataclass(frozen=True)
class YTensorValue:
    """Y_abc = nabla_a R_bc - nabla_b R_ac; ``Y[a, b, c]``."""

    Y: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.Y))) if self.Y.size else 0.0


class Curvature(NamedTuple):
    K: np.ndarray | float
    residual: np.ndarray | float


# --------------------------------------------------------------------------
# Levi-Civita


def _check_positive(g00, det, trace):
    # the determinant test is relative to trace**2 so it does not depend on the overall scale of g
    if np.any(~(g00 > 0)) or np.any(~(det > DOMAIN_TOL * trace * trace)):
        raise DegenerateMetricError("metric is not positive definite at the requested point")


def _inverse(g):
    det = g[0][0] * g[1][1] - g[0][1] * g[0][1]
    _check_positive(g[0][0].value, det.value, g[0][0].value + g[1][1].value)
    inv_det = det.reciprocal()
    h01 = -g[0][1] * inv_det
    return [[g[1][1] * inv_det, h01], [h01, g[0][0] * inv_det]]


def christoffel_from_metric(metric: MetricField, point, order: int):
    """Gamma_ab^c = 1/2 g^cd (d_a g_bd + d_b g_ad - d_d g_ab) as order-``order`` jets."""
    g = metric.jets(point, order + 1)
    ginv = [[h.truncate(order) for h in row] for row in _inverse([[h.truncate(order) for h in row] for row in g])]
    dg = [[[g[b][d].diff(a) for d in IDX] for b in IDX] for a in IDX]  # dg[a][b][d] = d_a g_bd
    lower = {}
    for a in IDX:
        for b in IDX:
            if b < a:
                continue
            for d in IDX:
                lower[a, b, d] = 0.5 * (dg[a][b][d] + dg[b][a][d] - dg[d][a][b])
    G = [[[None, None], [None, None]], [[None, None], [None, None]]]
    for a in IDX:
        for b in IDX:
            if b < a:
                G[a][b] = G[b][a]
                continue
            G[a][b] = [ginv[c][0] * lower[a, b, 0] + ginv[c][1] * lower[a, b, 1] for c in IDX]
    return G


def levi_civita(metric: MetricField) -> ConnectionField:
    """The Levi-Civita connection of ``metric`` as a :class:`ConnectionField`.

    Evaluate it with ``.christoffel(point, order)`` (jets) or ``.values(point)``.
    """
    return ConnectionField(lambda point, order: christoffel_from_metric(metric, point, order),
                           margin=metric.margin, name=f"levi_civita({metric.name})", metric=metric)


def metric_compat_residual(metric: MetricField, connection: ConnectionField, point) -> float:
    """sup |nabla_a g_bc| over components (and batch)."""
    g = metric.jets(point, 1)
    G = _values(connection.christoffel(point, 0))
    gv = _values(g)
    worst = 0.0
    for a in IDX:
        for b in IDX:
            for c in IDX:
                r = g[b][c].diff(a).value
                r = r - sum(G[a, b, d] * gv[d, c] + G[a, c, d] * gv[b, d] for d in IDX)
                worst = max(worst, float(np.max(np.abs(r))))
    return worst


# --------------------------------------------------------------------------
# Ricci and friends


def _ricci_jets(G):
    """R_ab = d_c G_ab^c - d_a G_cb^c + G_cd^c G_ab^d - G_ad^c G_cb^d (loses one order)."""
    trace = [G[0][d][0] + G[1][d][1] for d in IDX]  # Gamma_cd^c
    R = [[None, None], [None, None]]
    for a in IDX:
        for b in IDX:
            r = G[a][b][0].diff(0) + G[a][b][1].diff(1) - trace[b].diff(a)
            for d in IDX:
                r = r + trace[d] * G[a][b][d]
                for c in IDX:
                    r = r - G[a][d][c] * G[c][b][d]
            R[a][b] = r
    return R


def ricci(connection: ConnectionField, point, order: int = 0) -> RicciValue:
    """Ricci tensor at ``point``; with ``order > 0`` the jets of R_ab are attached."""
    R = _ricci_jets(connection.christoffel(point, order + 1))
    return RicciValue(_values(R), R if order > 0 else None)


def christoffel_and_ricci(connection: ConnectionField, point):
    """Values of Gamma_ab^c and R_ab from a single order-1 evaluation."""
    G = connection.christoffel(point, 1)
    R = _ricci_jets(G)
    return _values(G), _values(R)


def _check_ricci_symmetric(R, tol: float):
    scale = np.maximum(1.0, np.max(np.abs(R), axis=(0, 1)))
    asym = np.abs(R[0, 1] - R[1, 0]) / scale
    if np.any(asym > tol):
        raise PreconditionError(
            f"Ricci tensor is not symmetric (relative asymmetry {float(np.max(asym)):.3g} > {tol:g}); "
            "symmetrize the connection first"
        )


def projective_change(connection: ConnectionField, upsilon: CovectorField) -> ConnectionField:
    """Gamma^_ab^c = Gamma_ab^c + delta_a^c U_b + delta_b^c U_a (same unparameterised geodesics)."""

    def evaluate(point, order):
        G = connection.christoffel(point, order)
        U = upsilon.jets(point, order)
        H = [[[None, None], [None, None]], [[None, None], [None, None]]]
        for a in IDX:
            for b in IDX:
                for c in IDX:
                    h = G[a][b][c]
                    if a == c:
                        h = h + U[b]
                    if b == c:
                        h = h + U[a]
                    H[a][b][c] = h
        return H

    return ConnectionField(evaluate, margin=connection.margin,
                           name=f"projective_change({connection.name}, {upsilon.name})")


def _nabla_covector(G, U):
    """nabla_a U_b = d_a U_b - Gamma_ab^c U_c (one order lost)."""
    return [[U[b].diff(a) - (G[a][b][0] * U[0] + G[a][b][1] * U[1]) for b in IDX] for a in IDX]


def ricci_change(connection: ConnectionField, upsilon: CovectorField, point) -> RicciValue:
    """R^_ab = R_ab - 2 nabla_a U_b + nabla_b U_a + U_a U_b, with the unhatted nabla."""
    R = ricci(connection, point).R
    G = connection.christoffel(point, 0)
    U = upsilon.jets(point, 1)
    dU = _values(_nabla_covector(G, U))
    u = _values(U)
    out = np.empty_like(R)
    for a in IDX:
        for b in IDX:
            out[a, b] = R[a, b] - 2 * dU[a, b] + dU[b, a] + u[a] * u[b]
    return RicciValue(out)


def symmetrizing_upsilon(connection: ConnectionField, base, nodes: int = 32) -> CovectorField:
    """A 1-form whose projective change makes the Ricci tensor symmetric.

    Antisymmetrizing the Ricci change gives the requirement
    ``d_0 U_1 - d_1 U_0 = (R_01 - R_10) / 3``.  With ``w = (R_01 - R_10) / 3``
    the radial homotopy

        U_b(x) = int_0^1 t w_ab(base + t (x - base)) (x - base)^a dt

    (``w_01 = w, w_10 = -w``) solves it on any region star-shaped about
    ``base``.  The integral uses Gauss-Legendre quadrature with ``nodes``
    points, applied jet-wise so derivatives of U come out exactly.
    """
    bx, by = coords(base)
    s, w = leggauss(nodes)
    t_nodes = 0.5 * (s + 1.0)
    weights = 0.5 * w

    def evaluate(point, order):
        x, y = coords(point)
        shape = np.shape(x)
        dx, dy = np.asarray(x) - bx, np.asarray(y) - by
        tb = t_nodes.reshape((-1,) + (1,) * len(shape))
        px, py = bx + tb * dx, by + tb * dy
        if not (np.all(connection.contains((px, py))) and np.all(connection.contains((x, y)))):
            raise DomainError("segment from the base point leaves the connection's domain")
        R = _ricci_jets(connection.christoffel((px, py), order + 1))
        omega = (R[0][1] - R[1][0]) / 3.0
        # expansion of xi -> w(p_t + t xi): degree-d coefficients scale by t**d;
        # fold in the quadrature weight and the homotopy factor t as well
        deg = np.array([i + j for i, j in monomials(order)]).reshape((-1, 1) + (1,) * len(shape))
        factor = tb[None] ** deg * (tb * weights.reshape(tb.shape))[None]
        omega = Jet(omega.coeffs * factor, order)
        X, Y = variables(dx, dy, order)
        u0 = -_sum_nodes(_mul_nodes(omega, Y))
        u1 = _sum_nodes(_mul_nodes(omega, X))
        return [u0, u1]

    return CovectorField(evaluate, name=f"symmetrizing_upsilon({connection.name})")


def _mul_nodes(node_jet: Jet, jet: Jet) -> Jet:
    # node_jet carries a leading quadrature-node axis in its batch
    return node_jet * Jet(jet.coeffs[:, None], jet.order)


def _sum_nodes(jet: Jet) -> Jet:
    return Jet(jet.coeffs.sum(axis=1), jet.order)


def y_tensor(connection: ConnectionField, point, ricci_tol: float = RICCI_SYMMETRY_TOL) -> YTensorValue:
    """Y_abc = nabla_a R_bc - nabla_b R_ac.

    Raises
    ------
    PreconditionError
        If the Ricci tensor is not symmetric at ``point`` (relative to
        ``max(1, |R|)``) within ``ricci_tol``.
    """
    G = connection.christoffel(point, 2)
    R = _ricci_jets(G)
    Rv = _values(R)
    _check_ricci_symmetric(Rv, ricci_tol)
    Gv = _values(G)
    nR = np.empty((2, 2, 2) + Rv.shape[2:])
    for a in IDX:
        for b in IDX:
            for c in IDX:
                v = R[b][c].diff(a).value
                for d in IDX:
                    v = v - Gv[a, b, d] * Rv[d, c] - Gv[a, c, d] * Rv[b, d]
                nR[a, b, c] = v
    return YTensorValue(nR - nR.transpose((1, 0) + tuple(range(2, nR.ndim))))


def gaussian_curvature_jet(metric: MetricField, point, order: int = 0) -> Jet:
    """K = g^ab R_ab / 2 as a jet (``order`` <= 1 for analytic metrics of any order)."""
    conn = levi_civita(metric)
    R = _ricci_jets(conn.christoffel(point, order + 1))
    ginv = _inverse(metric.jets(point, order))
    return 0.5 * (ginv[0][0] * R[0][0] + ginv[0][1] * (R[0][1] + R[1][0]) + ginv[1][1] * R[1][1])


def gaussian_curvature(metric: MetricField, point) -> Curvature:
    """Gaussian curvature and the residual ``sup |R_ab - K g_ab|``."""
    if not np.all(metric.contains(point)):
        raise DomainError("point outside the metric's domain")
    g = metric.values(point)
    R = ricci(levi_civita(metric), point).R
    _check_positive(g[0, 0], g[0, 0] * g[1, 1] - g[0, 1] ** 2, g[0, 0] + g[1, 1])
    det = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    ginv = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / det
    K = 0.5 * np.einsum("ab...,ab...->...", ginv, R)
    res = np.max(np.abs(R - K * g), axis=(0, 1))
    if np.ndim(K) == 0:
        return Curvature(float(K), float(res))
    return Curvature(K, res)


def curvature_commutator_residual(connection: ConnectionField, point, vector: Sequence[float],
                                  ricci_tol: float = RICCI_SYMMETRY_TOL) -> float:
    """sup over (a, b, c) of the 2D curvature identity residual

        (nabla_a nabla_b - nabla_b nabla_a) X^c - (delta_a^c R_bd - delta_b^c R_ad) X^d

    for the constant-coefficient extension of ``vector``.
    """
    C = commutator_on_vector(connection, point, vector)
    R = ricci(connection, point).R
    _check_ricci_symmetric(R, ricci_tol)
    X = np.asarray(vector, dtype=float)
    RX = np.einsum("ad...,d->a...", R, X)
    worst = 0.0
    for a in IDX:
        for b in IDX:
            for c in IDX:
                expect = (RX[b] if a == c else 0.0) - (RX[a] if b == c else 0.0)
                worst = max(worst, float(np.max(np.abs(C[a, b, c] - expect))))
    return worst


def commutator_on_vector(connection: ConnectionField, point, vector: Sequence[float]) -> np.ndarray:
    """``C[a, b, c] = (nabla_a nabla_b - nabla_b nabla_a) X^c`` for constant-coefficient X."""
    G = connection.christoffel(point, 1)
    X = [float(v) for v in vector]
    V = [[G[b][0][c] * X[0] + G[b][1][c] * X[1] for c in IDX] for b in IDX]  # nabla_b X^c
    shape = np.shape(coords(point)[0])
    C = np.zeros((2, 2, 2) + shape)
    for a in IDX:
        for b in IDX:
            for c in IDX:
                v = V[b][c].diff(a) - V[a][c].diff(b)
                for e in IDX:
                    v = v + G[a][e][c].truncate(0) * V[b][e].truncate(0) - G[b][e][c].truncate(0) * V[a][e].truncate(0)
                C[a, b, c] = v.value
    return C
