"""Straighten auto geodesic batches for the curved built-in metrics and save reports and pictures.

    python3 scripts/straighten_demo.py --out results/straighten
"""

import argparse
from dataclasses import asdict, dataclass, field
from pathlib import Path

from projflat.commands import DEFAULTS, MetricSpec, cmd_straighten


@dataclass
class StraightenConfig:
    metrics: tuple = ("poincare", "sphere-stereographic", "beltrami", "thales")
    base: tuple = (0.0, 0.0)
    rays: int = 12
    overrides: dict = field(default_factory=dict)


def run(cfg: StraightenConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    config = {**DEFAULTS, **cfg.overrides}
    print(f"{'metric':22s} {'min before':>11s} {'max after':>11s} {'verdict':>14s}")
    for name in cfg.metrics:
        res = cmd_straighten(MetricSpec.validated(name), cfg.base, cfg.rays, config)
        (out / f"{name}.json").write_text(res.text)
        if res.svg:
            (out / f"{name}.svg").write_text(res.svg)
        s = res.report.summary
        print(f"{name:22s} {s.get('min_before', float('nan')):11.3e} {s.get('max_after') or float('nan'):11.3e} "
              f"{s['verdict']:>14s}")
    print(f"config: {asdict(cfg)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/straighten"))
    ap.add_argument("--rays", type=int, default=12)
    ap.add_argument("--steps-per-unit", type=int, default=DEFAULTS["steps_per_unit"])
    args = ap.parse_args()
    run(StraightenConfig(rays=args.rays, overrides={"steps_per_unit": args.steps_per_unit}), args.out)
