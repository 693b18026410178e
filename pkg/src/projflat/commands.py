"""The computations behind each CLI subcommand.

Each ``cmd_*`` function takes a resolved :class:`MetricSpec` and an
effective config dict and returns a :class:`CommandResult`; the click layer
in :mod:`projflat.cli` only parses arguments and writes files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartError, DegenerateParamsError, DomainError, IntegrationError, NotProjectivelyFlatError
from .geodesics import IntegratorSettings, collinearity_residual, integrate_geodesics
from .geometry import MetricField, gaussian_curvature, levi_civita, y_tensor
from .liouville import LiouvilleParams, k_formula
from .metrics import METRIC_NAMES, builtin_metric
from .report import RunReport, csv_text, svg_text
from .tractor import developing_map_batch, parallel_frame

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTEGRATION = 3
EXIT_NOT_FLAT = 4

DEFAULTS = {
    "seed": 42,
    "steps_per_unit": 1000,
    "flatness_threshold": 1e-6,
    "ricci_tol": 1e-8,
    "region_radius": 0.8,
    "center": [0.0, 0.0],
    "samples": 100,
    "mapped_points": 41,
}


class SpecError(ValueError):
    """Malformed command-line or JSON input (exit code 2)."""


@dataclass(frozen=True)
class MetricSpec:
    name: str
    params: LiouvilleParams | None = None

    @classmethod
    def from_json(cls, text: str) -> "MetricSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid metric JSON: {exc}") from None
        if not isinstance(data, dict) or "name" not in data:
            raise SpecError('metric JSON must be an object with a "name" field')
        params = data.get("params")
        if params is not None:
            if not isinstance(params, dict) or set(params) != set("pqrstu"):
                raise SpecError('liouville params must be {"p":..,"q":..,"r":..,"s":..,"t":..,"u":..}')
            params = LiouvilleParams(**{k: float(params[k]) for k in "pqrstu"})
        return cls.validated(data["name"], params)

    @classmethod
    def validated(cls, name: str, params: LiouvilleParams | None = None) -> "MetricSpec":
        if name not in METRIC_NAMES:
            raise SpecError(f"unknown metric {name!r}; expected one of {', '.join(METRIC_NAMES)}")
        if (name == "liouville") != (params is not None):
            raise SpecError("params are required for, and only for, the liouville metric")
        return cls(name, params)

    def build(self) -> MetricField:
        try:
            return builtin_metric(self.name, self.params)
        except DegenerateParamsError as exc:
            raise SpecError(str(exc)) from None

    def as_dict(self) -> dict:
        out = {"name": self.name}
        if self.params is not None:
            out["params"] = self.params.as_dict()
        return out


@dataclass
class CommandResult:
    text: str
    exit_code: int = EXIT_OK
    svg: str | None = None
    report: RunReport | None = None
    extra: dict = field(default_factory=dict)


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` -> ``linspace(lo, hi, n)``."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise SpecError(f"grid must look like lo:hi:n, got {text!r}") from None
    if n < 1:
        raise SpecError("grid needs n >= 1")
    return np.linspace(lo, hi, n)


def parse_pair(text, what: str) -> tuple[float, float]:
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = str(text).split(",")
    try:
        x, y = (float(v) for v in vals)
    except ValueError:
        raise SpecError(f"{what} must be two comma-separated numbers, got {text!r}") from None
    return x, y


def _settings(config) -> IntegratorSettings:
    return IntegratorSettings(steps_per_unit=int(config["steps_per_unit"]))


def _echo(command: str, spec: MetricSpec, config: dict) -> dict:
    return {"metric": spec.as_dict(), **{k: config[k] for k in sorted(config)}}


def _sample_disc(metric: MetricField, rng, center, radius, count, max_factor=200):
    cx, cy = center
    xs, ys = [], []
    attempts = 0
    while len(xs) < count and attempts < max_factor * count:
        batch = max(count, 16)
        r = radius * np.sqrt(rng.uniform(0, 1, batch))
        th = rng.uniform(0, 2 * np.pi, batch)
        px, py = cx + r * np.cos(th), cy + r * np.sin(th)
        ok = metric.contains((px, py))
        xs.extend(px[ok])
        ys.extend(py[ok])
        attempts += batch
    return np.array(xs[:count]), np.array(ys[:count])


# --------------------------------------------------------------------------


def cmd_curvature(spec: MetricSpec, grid_x: np.ndarray, grid_y: np.ndarray, config: dict) -> CommandResult:
    metric = spec.build()
    X, Y = np.meshgrid(grid_x, grid_y, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    inside = np.asarray(metric.contains((X, Y)), dtype=bool)
    omitted = int((~inside).sum())
    X, Y = X[inside], Y[inside]
    rows = []
    if len(X):
        K, res = gaussian_curvature(metric, (X, Y))
        rows = list(zip(X, Y, np.atleast_1d(K), np.atleast_1d(res)))
    text = csv_text(["x", "y", "K", "residual"], rows,
                    comments=[f"metric: {json.dumps(spec.as_dict(), sort_keys=True)}",
                              f"omitted_out_of_domain: {omitted}"])
    return CommandResult(text)


def cmd_flatness(spec: MetricSpec, config: dict) -> CommandResult:
    metric = spec.build()
    n = int(config["samples"])
    if n < 1:
        raise SpecError("samples must be >= 1")
    rng = np.random.default_rng(int(config["seed"]))
    xs, ys = _sample_disc(metric, rng, config["center"], float(config["region_radius"]), n)
    if not len(xs):
        raise SpecError("no in-domain sample points in the requested region")
    Y = y_tensor(levi_civita(metric), (xs, ys), float(config["ricci_tol"])).Y
    per = np.max(np.abs(Y.reshape(8, -1)), axis=0)
    sup = float(per.max())
    verdict = "FLAT" if sup <= float(config["flatness_threshold"]) else "NOT FLAT"
    report = RunReport(
        "flatness", _echo("flatness", spec, config),
        records=[{"x": x, "y": y, "sup_Y": s} for x, y, s in zip(xs, ys, per)],
        summary={"samples": len(xs), "sup_Y": sup, "threshold": float(config["flatness_threshold"]),
                 "verdict": verdict},
    )
    return CommandResult(report.to_json(), report=report)


def cmd_geodesic(spec: MetricSpec, start, direction, t_max: float, config: dict) -> CommandResult:
    metric = spec.build()
    conn = levi_civita(metric)
    if not metric.contains(start):
        raise DomainError(f"start point {start} outside the domain of {spec.name}")
    failure = None
    try:
        curve = integrate_geodesics(conn, [start], [direction], float(t_max), _settings(config))[0]
    except IntegrationError as exc:
        if not exc.partial:
            raise
        curve, failure = exc.partial[0], str(exc)
    col = collinearity_residual(curve.points) if len(curve) >= 3 else float("nan")
    comments = [
        f"metric: {json.dumps(spec.as_dict(), sort_keys=True)}",
        f"start: {start[0]!r},{start[1]!r}",
        f"direction: {direction[0]!r},{direction[1]!r}",
        f"t_max: {float(t_max)!r}",
        f"collinearity_residual: {col:.12g}",
        f"truncated: {str(curve.truncated or failure is not None).lower()}",
    ]
    if curve.truncated:
        comments.append("exit_point: " + ",".join(f"{v:.12g}" for v in curve.exit_point))
    if failure:
        comments.append(f"integration_error: {failure}")
    rows = [(t, p[0], p[1], u[0], u[1]) for t, p, u in zip(curve.t, curve.points, curve.velocities)]
    text = csv_text(["t", "x", "y", "U0", "U1"], rows, comments)
    code = EXIT_INTEGRATION if curve.truncated or failure else EXIT_OK
    return CommandResult(text, code, extra={"curve": curve})


def auto_rays(base, radius: float, n: int, seed: int):
    """``n`` rays from evenly spaced points near the boundary of the working disc
    through seeded interior points."""
    rng = np.random.default_rng(seed)
    bx, by = base
    th = 2 * np.pi * np.arange(n) / n
    starts = np.stack([bx + 0.95 * radius * np.cos(th), by + 0.95 * radius * np.sin(th)], axis=1)
    r = 0.5 * radius * np.sqrt(rng.uniform(0, 1, n))
    phi = rng.uniform(0, 2 * np.pi, n)
    targets = np.stack([bx + r * np.cos(phi), by + r * np.sin(phi)], axis=1)
    d = targets - starts
    return starts, d / np.hypot(*d.T)[:, None]


def parse_batch(text: str) -> int:
    if not text.startswith("auto:"):
        raise SpecError(f"geodesic batch must look like auto:N, got {text!r}")
    try:
        n = int(text[5:])
    except ValueError:
        raise SpecError(f"geodesic batch must look like auto:N, got {text!r}") from None
    if n < 1:
        raise SpecError("auto:N needs N >= 1")
    return n


def cmd_straighten(spec: MetricSpec, base, n_rays: int, config: dict) -> CommandResult:
    metric = spec.build()
    conn = levi_civita(metric)
    radius = float(config["region_radius"])
    if not metric.contains(base):
        raise DomainError(f"base point {base} outside the domain of {spec.name}")
    settings = _settings(config)
    echo = _echo("straighten", spec, config)
    try:
        frame = parallel_frame(conn, base, radius, settings, float(config["flatness_threshold"]),
                               ricci_tol=float(config["ricci_tol"]))
    except NotProjectivelyFlatError as exc:
        report = RunReport("straighten", echo, summary={"verdict": "NOT PROJECTIVELY FLAT", "sup_Y": exc.sup_y,
                                                        "threshold": float(config["flatness_threshold"])})
        return CommandResult(report.to_json(), EXIT_NOT_FLAT, report=report)

    starts, dirs = auto_rays(base, radius, n_rays, int(config["seed"]))
    bx, by = base

    def region(x, y):
        return radius * radius - (np.asarray(x) - bx) ** 2 - (np.asarray(y) - by) ** 2

    curves = integrate_geodesics(conn, starts, dirs, 4.0 * radius, settings, region)
    m = int(config["mapped_points"])
    picks = [np.unique(np.linspace(0, len(c) - 1, min(m, len(c))).round().astype(int)) for c in curves]
    pts = np.vstack([c.points[i] for c, i in zip(curves, picks)])
    H = developing_map_batch(frame, (pts[:, 0], pts[:, 1]))
    bad = np.abs(H[2]) <= 1e-10
    with np.errstate(divide="ignore", invalid="ignore"):
        sx, sy = bx - H[0] / H[2], by - H[1] / H[2]
    mapped = np.stack([sx, sy], axis=1)

    records, originals, images = [], [], []
    offset = 0
    for j, (c, idx) in enumerate(zip(curves, picks)):
        k = len(idx)
        orig = c.points[idx]
        img = mapped[offset:offset + k]
        chart_fail = bool(bad[offset:offset + k].any())
        offset += k
        before = collinearity_residual(c.points)
        after = None if chart_fail else collinearity_residual(img)
        dev = None if chart_fail else float(np.max(np.hypot(*(img - orig).T)))
        originals.append(orig)
        images.append(img if not chart_fail else np.zeros((0, 2)))
        records.append({"index": j, "start": starts[j], "direction": dirs[j], "samples": len(c),
                        "truncated": c.truncated, "before": before, "after": after,
                        "chart_error": chart_fail, "max_displacement": dev})
    afters = [r["after"] for r in records if r["after"] is not None]
    befores = [r["before"] for r in records]
    summary = {
        "verdict": "STRAIGHTENED" if afters and max(afters) <= 1e-5 else "FAILED",
        "sup_Y": frame.sup_y,
        "curves": len(records),
        "chart_errors": sum(r["chart_error"] for r in records),
        "max_after": max(afters) if afters else None,
        "min_before": min(befores),
        "count_before_ge_1e-2": sum(b >= 1e-2 for b in befores),
        "max_displacement": max((r["max_displacement"] for r in records if r["max_displacement"] is not None),
                                default=None),
    }
    report = RunReport("straighten", echo, records, summary)
    return CommandResult(report.to_json(), svg=svg_text(originals, images), report=report)


def cmd_liouville_verify(params: LiouvilleParams, config: dict) -> CommandResult:
    spec = MetricSpec.validated("liouville", params)
    metric = spec.build()
    n = int(config["samples"])
    rng = np.random.default_rng(int(config["seed"]))
    xs, ys = [], []
    attempts = 0
    while len(xs) < n and attempts < 1000 * n:
        px, py = rng.uniform(-1, 1, 2)
        attempts += 1
        if metric.contains((px, py)) and params.determinant(px, py) > 1e-6:
            xs.append(px)
            ys.append(py)
    if not xs:
        raise SpecError("no in-domain sample points in [-1, 1]^2")
    xs, ys = np.array(xs), np.array(ys)
    K, res = gaussian_curvature(metric, (xs, ys))
    kf = k_formula(params)
    dev = np.abs(K - kf) / (1 + abs(kf))
    report = RunReport(
        "liouville-verify", {"params": params.as_dict(), **{k: config[k] for k in sorted(config)}},
        records=[{"x": x, "y": y, "K": k, "residual": r} for x, y, k, r in zip(xs, ys, K, res)],
        summary={"samples": len(xs), "K_formula": kf, "max_relative_deviation": float(dev.max()),
                 "verdict": "PASS" if dev.max() <= 1e-6 else "FAIL"},
    )
    return CommandResult(report.to_json(), report=report)


__all__ = [
    "MetricSpec", "CommandResult", "SpecError", "DEFAULTS",
    "cmd_curvature", "cmd_flatness", "cmd_geodesic", "cmd_straighten", "cmd_liouville_verify",
    "EXIT_OK", "EXIT_USAGE", "EXIT_INTEGRATION", "EXIT_NOT_FLAT",
    "ChartError", "IntegrationError",
]
