"""Sweep random Liouville members: curvature-law error and sup|Y| against distance from the degenerate set.

    python3 scripts/liouville_sweep.py --members 500 --out results/liouville_sweep.csv
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from projflat.geometry import gaussian_curvature, levi_civita, y_tensor
from projflat.liouville import LiouvilleParams, k_formula, liouville_metric, random_params
from projflat.report import csv_text


@dataclass
class SweepConfig:
    members: int = 500
    seed: int = 42
    spread: float = 0.5


def run(cfg: SweepConfig):
    rng = np.random.default_rng(cfg.seed)
    pts = rng.uniform(-cfg.spread, cfg.spread, (cfg.members, 2))
    params = [random_params(rng, tuple(p)) for p in pts]
    batch = LiouvilleParams(*[np.array([getattr(p, k) for p in params]) for k in "pqrstu"])
    metric = liouville_metric(batch)
    x, y = pts[:, 0], pts[:, 1]
    K = gaussian_curvature(metric, (x, y)).K
    ref = np.array([k_formula(p) for p in params])
    Y = np.max(np.abs(y_tensor(levi_civita(metric), (x, y)).Y), axis=(0, 1, 2))
    D = batch.determinant(x, y)
    rows = list(zip(x, y, D, ref, np.abs(K - ref) / (1 + np.abs(ref)), Y))
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--members", type=int, default=500)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()
    rows = run(SweepConfig(members=args.members, seed=args.seed))
    arr = np.array(rows)
    print(f"max relative K error: {arr[:, 4].max():.3e}")
    for lo, hi in ((1e-6, 1e-3), (1e-3, 1e-2), (1e-2, 1e-1), (1e-1, np.inf)):
        sel = (arr[:, 2] >= lo) & (arr[:, 2] < hi)
        if sel.any():
            print(f"AB-C^2 in [{lo:g}, {hi:g}): n={sel.sum():4d}  max sup|Y| = {arr[sel, 5].max():.3e}")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(csv_text(["x", "y", "det", "K_formula", "rel_K_error", "sup_Y"], rows))
