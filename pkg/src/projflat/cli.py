"""``projflat`` command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 integration error or
domain exit, 4 metric not projectively flat on the working region.
Config precedence is flags > ``--config`` JSON file > built-in defaults.
"""

from __future__ import annotations

import json
import sys

import click

from .commands import (
    DEFAULTS, EXIT_INTEGRATION, EXIT_USAGE, MetricSpec, SpecError, auto_rays, cmd_curvature,
    cmd_flatness, cmd_geodesic, cmd_liouville_verify, cmd_straighten, parse_batch, parse_grid, parse_pair,
)
from .errors import DegenerateParamsError, DomainError, GeometryError, IntegrationError
from .liouville import LiouvilleParams
from .report import write_or_echo

__all__ = ["main", "auto_rays"]


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise SpecError("config file must hold a JSON object")
    return data


def _effective(config_path, keys, flags: dict) -> dict:
    """Merge defaults, the config file and explicit flags for ``keys``."""
    file_cfg = _load_config(config_path)
    out = {k: DEFAULTS[k] for k in keys if k in DEFAULTS}
    out.update({k: v for k, v in file_cfg.items() if k in keys or k == "metric"})
    out.update({k: v for k, v in flags.items() if v is not None})
    return out


def _metric(name, metric_json, cfg) -> MetricSpec:
    if name and metric_json:
        raise SpecError("use either --metric or --metric-json, not both")
    if metric_json:
        return MetricSpec.from_json(metric_json)
    if name:
        return MetricSpec.validated(name)
    if "metric" in cfg:
        return MetricSpec.from_json(json.dumps(cfg["metric"]))
    raise SpecError("a metric is required (--metric or --metric-json)")


def _run(fn):
    """Map library exceptions onto the exit-code contract."""
    try:
        return fn()
    except (SpecError, DegenerateParamsError, DomainError, ValueError) as exc:
        _fail(EXIT_USAGE, str(exc))
    except IntegrationError as exc:
        _fail(EXIT_INTEGRATION, str(exc))
    except GeometryError as exc:
        _fail(EXIT_USAGE, str(exc))


def _emit(result, out, svg=None):
    write_or_echo(result.text, out)
    if svg and result.svg is not None:
        write_or_echo(result.svg, svg)
    if result.exit_code:
        sys.exit(result.exit_code)


metric_opt = click.option("--metric", "metric_name", default=None, help="Built-in metric name.")
metric_json_opt = click.option("--metric-json", default=None, help='Inline metric spec, e.g. {"name": "flat"}.')
config_opt = click.option("--config", "config_path", default=None, type=click.Path(),
                          help="JSON config file; flags override its values.")
out_opt = click.option("--out", default=None, type=click.Path(), help="Output file (default stdout).")
seed_opt = click.option("--seed", type=int, default=None, help="RNG seed (default 42).")
steps_opt = click.option("--steps-per-unit", type=int, default=None, help="RK4 steps per unit parameter.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Projective flatness of two-dimensional metrics."""


@main.command()
@metric_opt
@metric_json_opt
@config_opt
@out_opt
@click.option("--grid", default=None, help="x grid lo:hi:n (also used for y unless --grid-y).")
@click.option("--grid-y", default=None, help="y grid lo:hi:n.")
def curvature(metric_name, metric_json, config_path, out, grid, grid_y):
    """Gaussian curvature on a grid as CSV."""

    def go():
        cfg = _effective(config_path, {"grid", "grid_y"}, {"grid": grid, "grid_y": grid_y})
        spec = _metric(metric_name, metric_json, cfg)
        gx = parse_grid(cfg.get("grid", "-0.5:0.5:3"))
        gy = parse_grid(cfg["grid_y"]) if cfg.get("grid_y") else gx
        return cmd_curvature(spec, gx, gy, cfg)

    _emit(_run(go), out)


@main.command()
@metric_opt
@metric_json_opt
@config_opt
@out_opt
@seed_opt
@click.option("--samples", type=int, default=None, help="Number of in-domain samples (default 100).")
@click.option("--region-radius", type=float, default=None, help="Sampling disc radius (default 0.8).")
@click.option("--center", default=None, help="Sampling disc centre x,y (default 0,0).")
@click.option("--threshold", "flatness_threshold", type=float, default=None, help="Flatness threshold on sup|Y|.")
def flatness(metric_name, metric_json, config_path, out, seed, samples, region_radius, center, flatness_threshold):
    """Sample sup|Y| and report a FLAT / NOT FLAT verdict."""

    def go():
        keys = {"seed", "samples", "region_radius", "center", "flatness_threshold", "ricci_tol"}
        cfg = _effective(config_path, keys, {
            "seed": seed, "samples": samples, "region_radius": region_radius,
            "center": list(parse_pair(center, "--center")) if center else None,
            "flatness_threshold": flatness_threshold,
        })
        cfg["center"] = list(parse_pair(cfg["center"], "center"))
        spec = _metric(metric_name, metric_json, cfg)
        cfg.pop("metric", None)
        return cmd_flatness(spec, cfg)

    _emit(_run(go), out)


@main.command()
@metric_opt
@metric_json_opt
@config_opt
@out_opt
@steps_opt
@click.option("--start", default=None, help="Start point x,y.")
@click.option("--direction", default=None, help="Initial velocity u,v.")
@click.option("--t-max", type=float, default=None, help="Parameter length.")
def geodesic(metric_name, metric_json, config_path, out, steps_per_unit, start, direction, t_max):
    """Integrate one affinely parameterised geodesic and write it as CSV."""

    def go():
        cfg = _effective(config_path, {"start", "direction", "t_max", "steps_per_unit"}, {
            "start": start, "direction": direction, "t_max": t_max, "steps_per_unit": steps_per_unit})
        spec = _metric(metric_name, metric_json, cfg)
        for key in ("start", "direction", "t_max"):
            if cfg.get(key) is None:
                raise SpecError(f"--{key.replace('_', '-')} is required")
        return cmd_geodesic(spec, parse_pair(cfg["start"], "--start"),
                            parse_pair(cfg["direction"], "--direction"), float(cfg["t_max"]), cfg)

    _emit(_run(go), out)


@main.command()
@metric_opt
@metric_json_opt
@config_opt
@out_opt
@seed_opt
@steps_opt
@click.option("--base", default=None, help="Base point x,y (default 0,0).")
@click.option("--geodesics", default=None, help="Geodesic batch, auto:N (default auto:12).")
@click.option("--region-radius", type=float, default=None, help="Working disc radius (default 0.8).")
@click.option("--threshold", "flatness_threshold", type=float, default=None, help="Flatness threshold on sup|Y|.")
@click.option("--svg", default=None, type=click.Path(), help="Write the SVG picture here.")
def straighten(metric_name, metric_json, config_path, out, seed, steps_per_unit, base, geodesics,
               region_radius, flatness_threshold, svg):
    """Map a batch of geodesics through the developing map."""

    def go():
        keys = {"seed", "steps_per_unit", "base", "geodesics", "region_radius", "flatness_threshold",
                "ricci_tol", "mapped_points"}
        cfg = _effective(config_path, keys, {
            "seed": seed, "steps_per_unit": steps_per_unit, "base": base, "geodesics": geodesics,
            "region_radius": region_radius, "flatness_threshold": flatness_threshold})
        cfg.setdefault("base", [0.0, 0.0])
        cfg.setdefault("geodesics", "auto:12")
        cfg["base"] = list(parse_pair(cfg["base"], "--base"))
        spec = _metric(metric_name, metric_json, cfg)
        cfg.pop("metric", None)
        return cmd_straighten(spec, tuple(cfg["base"]), parse_batch(cfg["geodesics"]), cfg)

    _emit(_run(go), out, svg)


@main.command("liouville-verify")
@config_opt
@out_opt
@seed_opt
@click.option("--params", default=None, help="p,q,r,s,t,u")
@click.option("--samples", type=int, default=None, help="Number of in-domain samples (default 100).")
def liouville_verify(config_path, out, seed, params, samples):
    """Compare the curvature of a Liouville metric with the closed-form K."""

    def go():
        cfg = _effective(config_path, {"seed", "samples", "params"}, {
            "seed": seed, "samples": samples, "params": params})
        raw = cfg.pop("params", None)
        if raw is None:
            raise SpecError("--params is required")
        if isinstance(raw, dict):
            lp = LiouvilleParams(**{k: float(raw[k]) for k in "pqrstu"})
        else:
            vals = raw.split(",") if isinstance(raw, str) else raw
            if len(vals) != 6:
                raise SpecError("--params needs six comma-separated numbers")
            try:
                lp = LiouvilleParams.from_sequence([float(v) for v in vals])
            except ValueError:
                raise SpecError(f"bad --params {raw!r}") from None
        lp.check()
        return cmd_liouville_verify(lp, cfg)

    _emit(_run(go), out)
