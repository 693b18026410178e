"""Built-in metrics and the name registry used by the CLI."""

from __future__ import annotations

from .geometry import MetricField
from .jets import exp
from .liouville import LiouvilleParams, beltrami, liouville_metric, thales

METRIC_NAMES = ("flat", "thales", "beltrami", "poincare", "sphere-stereographic", "bump", "liouville")


def flat() -> MetricField:
    return MetricField(lambda x, y: (1.0, 0.0, 1.0), name="flat")


def poincare() -> MetricField:
    """4 (dx^2 + dy^2) / (1 - x^2 - y^2)^2 on the unit disc, K = -1."""

    def components(x, y):
        f = 4 / (1 - x * x - y * y) ** 2
        return f, 0.0, f

    return MetricField(components, lambda x, y: 1 - x * x - y * y, "poincare")


def sphere_stereographic() -> MetricField:
    """4 (dx^2 + dy^2) / (1 + x^2 + y^2)^2, the unit sphere in stereographic coordinates."""

    def components(x, y):
        f = 4 / (1 + x * x + y * y) ** 2
        return f, 0.0, f

    return MetricField(components, name="sphere-stereographic")


def bump() -> MetricField:
    """exp(2 x^2 y) (dx^2 + dy^2); non-constant curvature, so not projectively flat."""

    def components(x, y):
        f = exp(2 * x * x * y)
        return f, 0.0, f

    return MetricField(components, name="bump")


def builtin_metric(name: str, params: LiouvilleParams | None = None) -> MetricField:
    if name == "liouville":
        if params is None:
            raise ValueError("metric 'liouville' requires params")
        return liouville_metric(params)
    if params is not None:
        raise ValueError(f"metric {name!r} takes no params")
    factories = {
        "flat": flat,
        "thales": thales,
        "beltrami": beltrami,
        "poincare": poincare,
        "sphere-stereographic": sphere_stereographic,
        "bump": bump,
    }
    try:
        return factories[name]()
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; expected one of {', '.join(METRIC_NAMES)}") from None
