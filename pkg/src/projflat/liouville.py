"""The six-parameter family of metrics on the plane whose geodesics are straight lines.

With ``A = r x^2 + 2 p x + s``, ``B = r y^2 + 2 q y + u`` and
``C = r x y + q x + p y + t`` the metric is

    (B dx^2 - 2 C dx dy + A dy^2) / (A B - C^2)^2,

defined where it is positive definite (``B > 0`` and ``A B - C^2 > 0``).
Its Gaussian curvature is the constant ``r(su - t^2) - p^2 u + 2pqt - q^2 s``.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from .errors import DegenerateParamsError
from .geometry import DOMAIN_TOL, MetricField, coords

# points at which the determinant factor is probed for identical vanishing
_PROBES = np.array([[0.0, 0.0], [0.3, -0.2], [-0.7, 0.5], [1.1, 0.9], [-0.4, -1.3], [2.0, -0.6]])


@dataclass(frozen=True)
class LiouvilleParams:
    p: float
    q: float
    r: float
    s: float
    t: float
    u: float

    @classmethod
    def from_sequence(cls, values) -> "LiouvilleParams":
        values = [float(v) for v in values]
        if len(values) != 6:
            raise ValueError(f"expected 6 Liouville parameters (p,q,r,s,t,u), got {len(values)}")
        return cls(*values)

    def as_dict(self) -> dict:
        return dict(zip("pqrstu", astuple(self)))

    def abc(self, x, y):
        """The quadratics ``(A, B, C)``; works on floats, arrays and jets."""
        p, q, r, s, t, u = astuple(self)
        A = r * x * x + 2 * p * x + s
        B = r * y * y + 2 * q * y + u
        C = r * x * y + q * x + p * y + t
        return A, B, C

    def determinant(self, x, y):
        A, B, C = self.abc(x, y)
        return A * B - C * C

    def check(self) -> None:
        """Reject parameters whose determinant factor vanishes identically."""
        # fields may be arrays holding a batch of parameter sets
        ndim = np.broadcast(*astuple(self)).ndim
        probes = _PROBES.reshape((-1, 2) + (1,) * ndim)
        det = self.determinant(probes[:, 0], probes[:, 1])
        if not np.all(np.any(np.abs(det) > DOMAIN_TOL, axis=0)):
            raise DegenerateParamsError(f"degenerate Liouville parameters {self.as_dict()}")


THALES = LiouvilleParams(0.0, 0.0, 1.0, 1.0, 0.0, 1.0)
BELTRAMI = LiouvilleParams(0.0, 0.0, -1.0, 1.0, 0.0, 1.0)
FLAT_MEMBER = LiouvilleParams(0.0, 0.0, 0.0, 1.0, 0.0, 1.0)


def k_formula(params: LiouvilleParams) -> float:
    p, q, r, s, t, u = astuple(params)
    return r * (s * u - t * t) - p * p * u + 2 * p * q * t - q * q * s


def domain_contains(params: LiouvilleParams, point, tol: float = DOMAIN_TOL):
    x, y = coords(point)
    A, B, C = params.abc(x, y)
    return (B > tol) & (A * B - C * C > tol)


def _margin(params: LiouvilleParams):
    def margin(x, y):
        A, B, C = params.abc(x, y)
        return np.minimum(B, A * B - C * C)

    return margin


def liouville_metric(params: LiouvilleParams, name: str | None = None) -> MetricField:
    params.check()

    def components(x, y):
        A, B, C = params.abc(x, y)
        inv = 1 / (A * B - C * C) ** 2
        return B * inv, -C * inv, A * inv

    field = MetricField(components, _margin(params), name or "liouville")
    field.params = params
    return field


def thales() -> MetricField:
    """(1+y^2) dx^2 - 2xy dx dy + (1+x^2) dy^2 over (1+x^2+y^2)^2; K = 1, defined everywhere."""
    return liouville_metric(THALES, "thales")


def beltrami() -> MetricField:
    """(1-y^2) dx^2 + 2xy dx dy + (1-x^2) dy^2 over (1-x^2-y^2)^2; K = -1 on the unit disc."""
    return liouville_metric(BELTRAMI, "beltrami")


def random_params(rng: np.random.Generator, point, min_det: float = 1e-6,
                  max_tries: int = 10_000) -> LiouvilleParams:
    """Draw params uniformly from [-1, 1]^6 until ``point`` is in the domain with det > ``min_det``."""
    x, y = coords(point)
    for _ in range(max_tries):
        params = LiouvilleParams.from_sequence(rng.uniform(-1.0, 1.0, 6))
        if domain_contains(params, (x, y)) and params.determinant(x, y) > min_det:
            return params
    raise RuntimeError("no valid Liouville parameters found")
