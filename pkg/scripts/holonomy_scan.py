"""Holonomy deviation of square loops against loop size: ~ area * |Y| for the bump metric, ~ 0 for flat ones.

    python3 scripts/holonomy_scan.py
"""

import argparse
from dataclasses import dataclass

import numpy as np

from projflat.geodesics import IntegratorSettings
from projflat.geometry import levi_civita, y_tensor
from projflat.metrics import builtin_metric
from projflat.tractor import holonomy


@dataclass
class ScanConfig:
    metrics: tuple = ("bump", "poincare", "sphere-stereographic")
    centre: tuple = (0.3, 0.3)
    sides: tuple = (0.05, 0.1, 0.2, 0.4)
    steps_per_unit: int = 300


def run(cfg: ScanConfig):
    settings = IntegratorSettings(steps_per_unit=cfg.steps_per_unit)
    cx, cy = cfg.centre
    print(f"{'metric':22s} {'side':>6s} {'deviation':>11s} {'dev/area':>10s}")
    for name in cfg.metrics:
        conn = levi_civita(builtin_metric(name))
        y = y_tensor(conn, cfg.centre).sup
        for a in cfg.sides:
            h = a / 2
            loop = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h), (cx - h, cy - h)]
            dev = np.max(np.abs(holonomy(conn, loop, settings) - np.eye(3)))
            print(f"{name:22s} {a:6.2f} {dev:11.3e} {dev / a**2:10.3e}")
        print(f"{'':22s} sup|Y| at centre: {y:.3e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps-per-unit", type=int, default=300)
    args = ap.parse_args()
    run(ScanConfig(steps_per_unit=args.steps_per_unit))
