"""The rank-3 bundle T = TM + R with its Ricci-twisted connection.

A fiber element is ``(X^0, X^1, rho)``.  The connection is

    nabla_a (X^b, rho) = (nabla_a X^b - delta_a^b rho,  nabla_a rho + R_ab X^b),

and it is flat exactly when the Y-tensor vanishes.  Its parallel sections
give a three-dimensional space; sending a point to the line of sections
whose tangent part vanishes there defines the developing map into RP^2,
which carries geodesics to projective lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ChartError, DegenerateFrameError, DomainError, IntegrationError, NotProjectivelyFlatError
from .geodesics import Curve, IntegratorSettings
from .geometry import (
    DOMAIN_TOL,
    IDX,
    RICCI_SYMMETRY_TOL,
    ConnectionField,
    _check_ricci_symmetric,
    _ricci_jets,
    _values,
    christoffel_and_ricci,
    coords,
    y_tensor,
)
from .jets import lift, variables

FLATNESS_THRESHOLD = 1e-6
RANK_TOL = 1e-10


@dataclass(frozen=True)
class TractorValue:
    X: tuple[float, float]
    rho: float

    @classmethod
    def from_array(cls, v) -> "TractorValue":
        v = np.asarray(v, dtype=float)
        return cls((float(v[0]), float(v[1])), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.X[0], self.X[1], self.rho])


@dataclass(frozen=True)
class ProjectivePoint:
    """Homogeneous coordinates, stored as the canonical unit representative."""

    h: tuple[float, float, float]

    @classmethod
    def from_vector(cls, v) -> "ProjectivePoint":
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("homogeneous coordinates must not all vanish")
        v = v / n
        first = v[np.flatnonzero(v)[0]]
        if first < 0:
            v = -v
        return cls(tuple(float(c) for c in v))

    def as_array(self) -> np.ndarray:
        return np.array(self.h)


# --------------------------------------------------------------------------
# pointwise


def tractor_derivative(connection: ConnectionField, section: Callable, point,
                       ricci_tol: float = RICCI_SYMMETRY_TOL) -> list[TractorValue]:
    """``nabla_a`` of a tractor section at ``point``, one value per direction a.

    ``section(x, y) -> (X0, X1, rho)`` is written in jet arithmetic (plain
    constants are fine).
    """
    x, y = coords(point)
    G = connection.christoffel((x, y), 1)
    R = _values(_ricci_jets(G))
    _check_ricci_symmetric(R, ricci_tol)
    Gv = _values(G)
    X0, X1, rho = (lift(c, 1, np.shape(x)) for c in section(*variables(x, y, 1)))
    Xj = (X0, X1)
    Xv = np.array([X0.value, X1.value])
    out = []
    for a in IDX:
        tang = [Xj[b].diff(a).value + sum(Gv[a, c, b] * Xv[c] for c in IDX) - (rho.value if a == b else 0.0)
                for b in IDX]
        scal = rho.diff(a).value + sum(R[a, b] * Xv[b] for b in IDX)
        out.append(TractorValue((float(tang[0]), float(tang[1])), float(scal)))
    return out


def tractor_curvature_residual(connection: ConnectionField, point, tractor) -> TractorValue:
    """``(nabla_0 nabla_1 - nabla_1 nabla_0) s`` for the constant-coefficient extension ``s`` of ``tractor``.

    On a connection with symmetric Ricci tensor the tangent part vanishes and
    the scalar part equals ``Y_01c X^c``.
    """
    t = tractor.as_array() if isinstance(tractor, TractorValue) else np.asarray(tractor, dtype=float)
    G = connection.christoffel(point, 2)
    R = _ricci_jets(G)
    G1 = [[[g.truncate(1) for g in row] for row in blk] for blk in G]
    X = t[:2]
    rho = t[2]

    def D(b):
        # (nabla_b s) as order-1 jets: tangent components then scalar
        tang = [G1[b][0][c] * X[0] + G1[b][1][c] * X[1] - (rho if b == c else 0.0) for c in IDX]
        return tang + [R[b][0] * X[0] + R[b][1] * X[1]]

    def A(a, z):
        # connection matrix of direction a applied to a fiber value z
        tang = [sum(_v(G1[a][e][c]) * z[e] for e in IDX) - (z[2] if a == c else 0.0) for c in IDX]
        return tang + [sum(_v(R[a][e]) * z[e] for e in IDX)]

    D0, D1 = D(0), D(1)
    v0 = [j.value for j in D0]
    v1 = [j.value for j in D1]
    A0, A1 = A(0, v1), A(1, v0)
    comm = [D1[i].diff(0).value - D0[i].diff(1).value + A0[i] - A1[i] for i in range(3)]
    return TractorValue((float(comm[0]), float(comm[1])), float(comm[2]))


def _v(jet):
    return jet.value


# --------------------------------------------------------------------------
# transport


def _transport_rhs(G, R, vel, state):
    # state: (3, m, *batch); G, R, vel evaluated on the path, batch last
    X, rho = state[:2], state[2]
    out = np.empty_like(state)
    for c in IDX:
        acc = rho * vel[c][None]
        for a in IDX:
            for b in IDX:
                acc = acc - (G[a, b, c] * vel[a])[None] * X[b]
        out[c] = acc
    out[2] = -sum((R[a, b] * vel[a])[None] * X[b] for a in IDX for b in IDX)
    return out


def _integrate_transport(connection, path, t_grid, state, ricci_tol):
    def coefficients(t):
        pos, vel = path(t)
        if not np.all(connection.margin(pos[0], pos[1]) > DOMAIN_TOL):
            raise IntegrationError(f"transport path leaves the domain near t={t:.6g}", location=pos)
        G, R = christoffel_and_ricci(connection, (pos[0], pos[1]))
        _check_ricci_symmetric(R, ricci_tol)
        return G, R, vel

    start = coefficients(t_grid[0])
    for i in range(len(t_grid) - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        h = t1 - t0
        mid = coefficients(0.5 * (t0 + t1))
        end = coefficients(t1)
        k1 = _transport_rhs(*start, state)
        k2 = _transport_rhs(*mid, state + 0.5 * h * k1)
        k3 = _transport_rhs(*mid, state + 0.5 * h * k2)
        k4 = _transport_rhs(*end, state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise IntegrationError(f"non-finite tractor state near t={t0:.6g}", location=path(t0)[0])
        start = end
    return state


def transport_tractor(connection: ConnectionField, curve: Curve, initial,
                      settings: IntegratorSettings | None = None,
                      ricci_tol: float = RICCI_SYMMETRY_TOL):
    """Parallel transport of a fiber value along ``curve``.

    Solves ``dX^c/dt = -Gamma_ab^c U^a X^b + rho U^c`` and
    ``drho/dt = -U^a R_ab X^b`` by RK4.  Curves with an exact ``path`` are
    stepped at ``settings.steps_per_unit``; sampled curves are stepped on
    their own sample grid.

    ``initial`` may be a :class:`TractorValue` (returns one) or an array of
    shape ``(3,)`` or ``(3, m)`` (returns an array of the same shape).
    """
    settings = settings or IntegratorSettings()
    as_value = isinstance(initial, TractorValue)
    state = initial.as_array() if as_value else np.asarray(initial, dtype=float)
    shape = state.shape
    state = state.reshape(3, -1)
    if curve.path is not None:
        t0, t1 = curve.t[0], curve.t[-1]
        t_grid = np.linspace(t0, t1, settings.n_steps(t1 - t0) + 1)
    else:
        t_grid = curve.t
    path = curve.position_velocity
    out = _integrate_transport(connection, path, t_grid, state, ricci_tol)
    out = out.reshape(shape)
    return TractorValue.from_array(out) if as_value else out


def transport_polyline(connection: ConnectionField, vertices, initial,
                       settings: IntegratorSettings | None = None,
                       ricci_tol: float = RICCI_SYMMETRY_TOL):
    """Transport along consecutive straight segments through ``vertices``."""
    state = initial
    V = np.asarray(vertices, dtype=float)
    for p, q in zip(V[:-1], V[1:]):
        state = transport_tractor(connection, Curve.segment(p, q), state, settings, ricci_tol)
    return state


def transport_along(connection: ConnectionField, path: Callable, t_grid, initial,
                    ricci_tol: float = RICCI_SYMMETRY_TOL) -> np.ndarray:
    """Transport a batch of fiber values along a batch of paths on a shared parameter grid.

    ``path(t) -> (positions, velocities)``, each of shape ``(2, *batch)``;
    ``initial`` has shape ``(3, m, *batch)`` (``m`` fiber values per path).
    """
    state = np.asarray(initial, dtype=float)
    return _integrate_transport(connection, path, np.asarray(t_grid, dtype=float), state, ricci_tol)


def holonomy(connection: ConnectionField, loop, settings: IntegratorSettings | None = None,
             ricci_tol: float = RICCI_SYMMETRY_TOL) -> np.ndarray:
    """3x3 holonomy matrix around a closed polyline (vertex list) or closed :class:`Curve`."""
    if isinstance(loop, Curve):
        return transport_tractor(connection, loop, np.eye(3), settings, ricci_tol)
    return transport_polyline(connection, loop, np.eye(3), settings, ricci_tol)


# --------------------------------------------------------------------------
# frames and the developing map


def _disc_region(base, radius):
    bx, by = base

    def margin(x, y):
        return radius * radius - (np.asarray(x) - bx) ** 2 - (np.asarray(y) - by) ** 2

    return margin


def sample_region(connection: ConnectionField, base, radius: float, n: int = 21):
    """Points of an ``n x n`` grid over the disc of ``radius`` about ``base`` inside the domain."""
    bx, by = coords(base)
    xs = np.linspace(bx - radius, bx + radius, n)
    ys = np.linspace(by - radius, by + radius, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    keep = (_disc_region((bx, by), radius)(X, Y) >= 0) & (connection.margin(X, Y) > DOMAIN_TOL)
    return X[keep], Y[keep]


class ParallelFrame:
    """Three parallel sections, fixed by the standard fiber basis at ``base``.

    The sections are realised by transporting along straight coordinate
    segments from ``base``; ``sections_at(points)`` returns the 3x3 matrix of
    their fiber values (columns = sections, rows = ``X^0, X^1, rho``).
    """

    def __init__(self, connection: ConnectionField, base, radius: float | None = None,
                 settings: IntegratorSettings | None = None, ricci_tol: float = RICCI_SYMMETRY_TOL,
                 sup_y: float | None = None):
        self.connection = connection
        self.base = coords(base)
        self.radius = radius
        self.settings = settings or IntegratorSettings()
        self.ricci_tol = ricci_tol
        self.fiber_basis = np.eye(3)
        self.sup_y = sup_y

    def sections_at(self, points) -> np.ndarray:
        """Frame matrices at ``points`` (``(x, y)`` arrays); shape ``(3, 3, *batch)``."""
        x, y = coords(points)
        shape = np.shape(x)
        x, y = np.atleast_1d(x).ravel(), np.atleast_1d(y).ravel()
        if self.radius is not None and np.any(_disc_region(self.base, self.radius * (1 + 1e-12))(x, y) < 0):
            raise DomainError("target outside the frame's working region")
        bx, by = self.base
        dx, dy = x - bx, y - by

        def path(s):
            s = np.asarray(s, dtype=float)
            return np.array([bx + s * dx, by + s * dy]), np.array([dx, dy])

        state = np.repeat(self.fiber_basis[:, :, None], len(x), axis=2)
        n = self.settings.n_steps(1.0)
        out = _integrate_transport(self.connection, path, np.linspace(0.0, 1.0, n + 1), state, self.ricci_tol)
        return out.reshape((3, 3) + shape)


def parallel_frame(connection: ConnectionField, base, radius: float = 0.5,
                   settings: IntegratorSettings | None = None,
                   flatness_threshold: float = FLATNESS_THRESHOLD, grid: int = 21,
                   ricci_tol: float = RICCI_SYMMETRY_TOL) -> ParallelFrame:
    """Frame of parallel sections on the disc of ``radius`` about ``base``.

    Raises
    ------
    NotProjectivelyFlatError
        If ``sup |Y|`` on a ``grid x grid`` sample of the region exceeds
        ``flatness_threshold``.
    """
    if not np.all(connection.contains(coords(base))):
        raise DomainError("frame base point outside the domain")
    X, Y = sample_region(connection, base, radius, grid)
    sup_y = y_tensor(connection, (X, Y), ricci_tol).sup
    if sup_y > flatness_threshold:
        raise NotProjectivelyFlatError(
            f"sup|Y| = {sup_y:.3g} exceeds the flatness threshold {flatness_threshold:g}", sup_y=sup_y)
    return ParallelFrame(connection, base, radius, settings, ricci_tol, sup_y)


def developing_map_batch(frame: ParallelFrame, points) -> np.ndarray:
    """Canonical homogeneous coordinates for a batch of points; shape ``(3, *batch)``."""
    S = frame.sections_at(points)
    r0, r1 = np.moveaxis(S[0], 0, -1), np.moveaxis(S[1], 0, -1)
    h = np.cross(r0, r1)
    n = np.linalg.norm(h, axis=-1)
    if np.any(n <= RANK_TOL):
        raise DegenerateFrameError("tangent parts of the frame have rank < 2")
    h = h / n[..., None]
    # canonical sign: first component with magnitude above round-off is positive
    lead = np.where(np.abs(h[..., 0]) > 1e-15, h[..., 0], np.where(np.abs(h[..., 1]) > 1e-15, h[..., 1], h[..., 2]))
    h = np.where((lead < 0)[..., None], -h, h)
    return np.moveaxis(h, -1, 0)


def developing_map(frame: ParallelFrame, point) -> ProjectivePoint:
    """The line of parallel sections whose tangent part vanishes at ``point``."""
    x, y = coords(point)
    h = developing_map_batch(frame, (np.array([x]), np.array([y])))[:, 0]
    return ProjectivePoint.from_vector(h)


def affine_chart(p, tol: float = RANK_TOL):
    """``(h0/h2, h1/h2)``; accepts a :class:`ProjectivePoint` or an array ``(3, *batch)``."""
    h = p.as_array() if isinstance(p, ProjectivePoint) else np.asarray(p, dtype=float)
    if np.any(np.abs(h[2]) <= tol):
        raise ChartError("point lies on the line at infinity of the affine chart")
    x, y = h[0] / h[2], h[1] / h[2]
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


def straightening_coordinates(frame: ParallelFrame, points):
    """Affine image of the developing map, oriented so its differential at the base is the identity.

    With the standard basis at the base the chart image of ``base + v`` is
    ``-v + O(|v|^2)``; the sign flip restores the identity.
    """
    h = developing_map_batch(frame, points)
    x, y = affine_chart(h)
    bx, by = frame.base
    return bx - np.asarray(x), by - np.asarray(y)
