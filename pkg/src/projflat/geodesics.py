"""Geodesic integration, the scalar Jacobi-type ODE along geodesics, and straightness checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateMetricError, DomainError, IntegrationError, PreconditionError
from .geometry import (
    DOMAIN_TOL,
    IDX,
    ConnectionField,
    _check_ricci_symmetric,
    christoffel_and_ricci,
    coords,
)

__all__ = [
    "IntegratorSettings",
    "Curve",
    "JacobiSolution",
    "geodesic_ivp",
    "integrate_geodesics",
    "unparam_geodesic_residual",
    "affine_residual",
    "jacobi_f_solutions",
    "collinearity_residual",
    "trace_hausdorff",
    "rk4_step",
]


@dataclass(frozen=True)
class IntegratorSettings:
    """Fixed-step RK4 by default; ``method="rk45"`` switches to adaptive Dormand-Prince."""

    steps_per_unit: int = 1000
    method: str = "rk4"
    tol: float = 1e-9
    output_stride: int = 1

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown integrator {self.method!r}")
        if self.steps_per_unit < 1 or self.output_stride < 1:
            raise ValueError("steps_per_unit and output_stride must be positive")

    def n_steps(self, span: float) -> int:
        return max(1, math.ceil(self.steps_per_unit * abs(span) - 1e-9))


@dataclass
class Curve:
    """Samples ``(t, point, velocity)`` of a parametrised curve.

    ``path``, when set, gives the exact position and velocity at any
    parameter (used for straight segments); otherwise the curve is
    interpolated by cubic Hermite splines through the samples.
    """

    t: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    truncated: bool = False
    exit_point: np.ndarray | None = None
    path: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.velocities = np.asarray(self.velocities, dtype=float).reshape(-1, 2)
        if not (len(self.t) == len(self.points) == len(self.velocities)):
            raise ValueError("t, points and velocities must have equal length")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("curve parameter must be strictly increasing")
        if np.any(np.hypot(*self.velocities.T) == 0):
            raise ValueError("curve velocity vanishes at a sample")

    def __len__(self):
        return len(self.t)

    @classmethod
    def segment(cls, start, end, samples: int = 2) -> "Curve":
        """Straight coordinate segment ``start -> end`` over ``t in [0, 1]``."""
        p0 = np.asarray(start, dtype=float)
        v = np.asarray(end, dtype=float) - p0
        t = np.linspace(0.0, 1.0, samples)
        return cls(t, p0 + np.outer(t, v), np.tile(v, (samples, 1)), path=_segment_path(p0, v))

    @classmethod
    def from_path(cls, path: Callable, t0: float, t1: float, samples: int) -> "Curve":
        """Sample ``path(t) -> ((x, y), (u, v))`` on a uniform grid."""
        t = np.linspace(t0, t1, samples)
        p, v = path(t)
        return cls(t, np.asarray(p).T, np.asarray(v).T, path=path)

    def position_velocity(self, t):
        """Position and velocity at parameter(s) ``t``; arrays of shape ``(2, *t.shape)``."""
        if self.path is not None:
            p, v = self.path(t)
            return np.asarray(p, dtype=float), np.asarray(v, dtype=float)
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[i], self.t[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        p0, p1 = self.points[i].T, self.points[i + 1].T
        m0, m1 = self.velocities[i].T * h, self.velocities[i + 1].T * h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        pos = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1
        d00 = 6 * s**2 - 6 * s
        d10 = 3 * s**2 - 4 * s + 1
        d01 = -6 * s**2 + 6 * s
        d11 = 3 * s**2 - 2 * s
        vel = (d00 * p0 + d10 * m0 + d01 * p1 + d11 * m1) / h
        return pos, vel

    def arclength(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(self.points, axis=0).T))])


def _segment_path(p0, v):
    def path(s):
        s = np.asarray(s, dtype=float)
        pos = p0.reshape((2,) + (1,) * s.ndim) + v.reshape((2,) + (1,) * s.ndim) * s
        vel = np.broadcast_to(v.reshape((2,) + (1,) * s.ndim), (2,) + s.shape)
        return pos, vel

    return path


# --------------------------------------------------------------------------
# integration core


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def geodesic_acceleration(connection: ConnectionField, x, y, u, v):
    """``-Gamma_ab^c U^a U^b`` for batched positions and velocities."""
    G = connection.values((x, y))
    U = (u, v)
    return [-sum(G[a, b, c] * U[a] * U[b] for a in IDX for b in IDX) for c in IDX]


def _inside(connection, region, x, y):
    ok = connection.margin(x, y) > DOMAIN_TOL
    if region is not None:
        ok = ok & (region(x, y) > DOMAIN_TOL)
    return np.asarray(ok)


def integrate_geodesics(connection: ConnectionField, starts, directions, t_max: float,
                        settings: IntegratorSettings | None = None,
                        region: Callable | None = None) -> list[Curve]:
    """Integrate a batch of affinely parametrised geodesics together.

    ``region(x, y)`` is an optional margin function; a curve whose RK stage
    leaves the connection's domain or the region is truncated at the last
    completed step and flagged, with ``exit_point`` set to the offending
    stage position.
    """
    settings = settings or IntegratorSettings()
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    m = len(starts)
    if np.any(np.hypot(*directions.T) == 0):
        raise ValueError("geodesic direction must be nonzero")
    if not np.all(_inside(connection, region, starts[:, 0], starts[:, 1])):
        raise DomainError("geodesic start point outside the domain")
    if settings.method == "rk45":
        return [_geodesic_adaptive(connection, s, d, t_max, settings, region)
                for s, d in zip(starts, directions)]

    n = settings.n_steps(t_max)
    h = t_max / n
    states = np.empty((n + 1, 4, m))
    states[0] = np.concatenate([starts.T, directions.T])
    last = np.zeros(m, dtype=int)  # index of the last valid state per curve
    exits: dict[int, np.ndarray] = {}
    active = np.arange(m)

    def rhs(state):
        try:
            a = geodesic_acceleration(connection, state[0], state[1], state[2], state[3])
        except DegenerateMetricError as exc:
            raise IntegrationError(f"metric degenerates along the geodesic: {exc}") from None
        return np.array([state[2], state[3], a[0], a[1]])

    try:
        _rk4_batch(rhs, states, h, n, active, last, exits, connection, region)
    except IntegrationError as exc:
        exc.partial = _collect(states, h, last, exits, settings.output_stride)
        raise
    return _collect(states, h, last, exits, settings.output_stride)


def _rk4_batch(rhs, states, h, n, active, last, exits, connection, region):
    for k in range(n):
        last[active] = k
        y = states[k][:, active]
        keep = np.ones(len(active), dtype=bool)
        ks = []
        stage = y
        for coef in (0.0, 0.5, 0.5, 1.0):
            if coef:
                stage = y + coef * h * ks[-1]
                ok = _inside(connection, region, stage[0], stage[1]) & keep
                for j in np.flatnonzero(keep & ~ok):
                    exits[int(active[j])] = stage[:2, j].copy()
                    last[active[j]] = k
                keep &= ok
            val = np.full_like(y, np.nan)
            if keep.any():
                # evaluate the whole batch (finished curves parked at their start) so that
                # connections batched member-wise over curves stay aligned
                full = states[0].copy()
                full[:, active[keep]] = stage[:, keep]
                val[:, keep] = rhs(full)[:, active[keep]]
            ks.append(val)
        y_new = y + (h / 6.0) * (ks[0] + 2 * ks[1] + 2 * ks[2] + ks[3])
        bad = keep & ~np.all(np.isfinite(y_new), axis=0)
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            raise IntegrationError(f"non-finite geodesic state at t={k * h:.6g}", location=y[:2, j].copy())
        states[k + 1][:, active[keep]] = y_new[:, keep]
        active = active[keep]
        last[active] = k + 1
        if not len(active):
            break


def _collect(states, h, last, exits, stride):
    curves = []
    for j in range(states.shape[2]):
        idx = list(range(0, last[j] + 1, stride))
        if idx[-1] != last[j]:
            idx.append(last[j])
        s = states[idx, :, j]
        curves.append(Curve(np.array(idx) * h, s[:, :2], s[:, 2:], truncated=j in exits,
                            exit_point=exits.get(j)))
    return curves


def _geodesic_adaptive(connection, start, direction, t_max, settings, region):
    def rhs(t, s):
        a = geodesic_acceleration(connection, s[0], s[1], s[2], s[3])
        return [s[2], s[3], a[0], a[1]]

    def leave(t, s):
        m = connection.margin(s[0], s[1])
        if region is not None:
            m = min(m, region(s[0], s[1]))
        return m - DOMAIN_TOL

    leave.terminal = True
    y0 = np.concatenate([start, direction])
    sol = solve_ivp(rhs, (0.0, t_max), y0, method="RK45", rtol=settings.tol, atol=settings.tol * 1e-3,
                    events=leave, dense_output=True)
    if sol.status == -1:
        raise IntegrationError(f"adaptive integration failed: {sol.message}", location=sol.y[:2, -1])
    t_end = sol.t[-1]
    n = settings.n_steps(t_end) // settings.output_stride + 1
    t = np.linspace(0.0, t_end, max(n, 2))
    s = sol.sol(t)
    truncated = sol.status == 1
    return Curve(t, s[:2].T, s[2:].T, truncated=truncated,
                 exit_point=sol.y_events[0][0][:2] if truncated else None)


def geodesic_ivp(connection: ConnectionField, start, direction, t_max: float,
                 settings: IntegratorSettings | None = None,
                 region: Callable | None = None) -> Curve:
    """Affinely parametrised geodesic with ``x(0) = start``, ``x'(0) = direction``."""
    return integrate_geodesics(connection, [coords(start)], [direction], t_max, settings, region)[0]


# --------------------------------------------------------------------------
# diagnostics


def _time_derivative(t, values):
    """d/dt along the sample axis; fourth order on uniform grids."""
    dt = np.diff(t)
    if len(t) >= 5 and np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        h = dt[0]
        out = np.gradient(values, t, axis=0, edge_order=2)
        out[2:-2] = (values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]) / (12 * h)
        return out
    return np.gradient(values, t, axis=0, edge_order=2)


def _covariant_acceleration(connection, curve):
    if len(curve) < 3:
        raise ValueError("need at least 3 samples")
    U = curve.velocities
    speed = np.hypot(*U.T)
    if np.any(speed <= 1e-14):
        raise PreconditionError("degenerate velocity along the curve")
    dU = _time_derivative(curve.t, U)
    G = connection.values((curve.points[:, 0], curve.points[:, 1]))
    A = dU + np.einsum("abcn,na,nb->nc", G, U, U)
    sl = slice(2, -2) if len(curve) >= 7 else slice(1, -1)
    return A[sl], U[sl], speed[sl]


def unparam_geodesic_residual(connection: ConnectionField, curve: Curve) -> float:
    """Sup over interior samples of ``|A x U| / |U|^3`` with ``A`` the covariant acceleration.

    Zero exactly when the acceleration is tangential, i.e. the curve is a
    geodesic up to reparametrisation.
    """
    A, U, speed = _covariant_acceleration(connection, curve)
    cross = A[:, 0] * U[:, 1] - A[:, 1] * U[:, 0]
    return float(np.max(np.abs(cross) / speed**3))


def affine_residual(connection: ConnectionField, curve: Curve) -> float:
    """Sup of ``|A| / |U|^2``; small only for affinely parametrised geodesics."""
    A, U, speed = _covariant_acceleration(connection, curve)
    return float(np.max(np.hypot(*A.T) / speed**2))


@dataclass(frozen=True)
class JacobiSolution:
    t: np.ndarray
    f: np.ndarray
    fdot: np.ndarray
    points: np.ndarray
    velocities: np.ndarray


def jacobi_f_solutions(connection: ConnectionField, geodesic: Curve, initial=(1.0, 0.0),
                       affine_tol: float = 1e-5, ricci_tol: float = 1e-8) -> JacobiSolution:
    """Solve ``f'' + R_ab U^a U^b f = 0`` along an affinely parametrised geodesic.

    The geodesic is re-integrated from its first sample together with
    ``(f, f')`` by RK4 on the curve's own parameter grid, so the returned
    samples line up with ``geodesic``.  ``initial`` may be a pair or an
    array of shape ``(2, k)`` to propagate several solutions at once.
    """
    if affine_residual(connection, geodesic) > affine_tol:
        raise PreconditionError("curve is not an affinely parametrised geodesic")
    f0 = np.asarray(initial, dtype=float)
    single = f0.ndim == 1
    f0 = f0.reshape(2, -1)
    k = f0.shape[1]

    def rhs(_t, s):
        x, y, u, v = s[0], s[1], s[2], s[3]
        G, R = christoffel_and_ricci(connection, (x, y))
        _check_ricci_symmetric(R, ricci_tol)
        U = (u, v)
        acc = [-sum(G[a, b, c] * U[a] * U[b] for a in IDX for b in IDX) for c in IDX]
        rUU = sum(R[a, b] * U[a] * U[b] for a in IDX for b in IDX)
        f, fd = s[4:4 + k], s[4 + k:]
        return np.concatenate([[u, v, acc[0], acc[1]], fd, -rUU * f])

    t = geodesic.t
    state = np.concatenate([geodesic.points[0], geodesic.velocities[0], f0[0], f0[1]])
    out = np.empty((len(t), len(state)))
    out[0] = state
    for i in range(len(t) - 1):
        state = rk4_step(rhs, t[i], state, t[i + 1] - t[i])
        out[i + 1] = state
    f, fdot = out[:, 4:4 + k], out[:, 4 + k:]
    if single:
        f, fdot = f[:, 0], fdot[:, 0]
    return JacobiSolution(t.copy(), f, fdot, out[:, :2], out[:, 2:4])


def collinearity_residual(points) -> float:
    """Max distance to the total-least-squares line, divided by the bounding-box diagonal."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(P) < 3:
        raise ValueError("need at least 3 points")
    diag = float(np.hypot(*(P.max(axis=0) - P.min(axis=0))))
    if diag == 0.0:
        raise ValueError("all points coincide")
    Q = P - P.mean(axis=0)
    normal = np.linalg.svd(Q, full_matrices=False)[2][-1]
    return float(np.max(np.abs(Q @ normal)) / diag)


def _point_polyline_distance(P, poly):
    a, b = poly[:-1], poly[1:]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    L2 = np.where(L2 == 0, 1.0, L2)
    out = np.empty(len(P))
    for i0 in range(0, len(P), 256):
        p = P[i0:i0 + 256, None, :]
        s = np.clip(np.einsum("pij,ij->pi", p - a, ab) / L2, 0.0, 1.0)
        d = p - (a + s[..., None] * ab)
        out[i0:i0 + 256] = np.sqrt(np.min(np.einsum("pij,pij->pi", d, d), axis=1))
    return out


def _cut(points, s, length):
    i = np.searchsorted(s, length, side="right")
    if i >= len(s):
        return points
    w = (length - s[i - 1]) / (s[i] - s[i - 1])
    return np.vstack([points[:i], points[i - 1] + w * (points[i] - points[i - 1])])


def trace_hausdorff(a, b) -> float:
    """Hausdorff distance of two polylines after cutting both to their common arclength."""
    pa = a.points if isinstance(a, Curve) else np.asarray(a, dtype=float)
    pb = b.points if isinstance(b, Curve) else np.asarray(b, dtype=float)
    sa = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pa, axis=0).T))])
    sb = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pb, axis=0).T))])
    L = min(sa[-1], sb[-1])
    pa, pb = _cut(pa, sa, L), _cut(pb, sb, L)
    return float(max(_point_polyline_distance(pa, pb).max(), _point_polyline_distance(pb, pa).max()))
