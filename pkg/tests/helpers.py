import numpy as np

from projflat.liouville import LiouvilleParams, random_params


def stack_params(params, column=False):
    """One LiouvilleParams whose fields are arrays, evaluated member-wise against a matching point batch.

    ``column=True`` gives shape ``(n, 1)`` so each member meets a row of points.
    """
    shape = (-1, 1) if column else (-1,)
    return LiouvilleParams(*[np.array([getattr(p, k) for p in params]).reshape(shape) for k in "pqrstu"])


def random_members(rng, n, spread=0.5):
    """``n`` random valid params, each paired with an in-domain point."""
    pts = rng.uniform(-spread, spread, (n, 2))
    return [random_params(rng, tuple(p)) for p in pts], pts


def unit_directions(metric, pts, dirs):
    """Rescale ``dirs`` to unit speed in ``metric`` at ``pts`` (member-wise for batched metrics)."""
    g = metric.values((pts[:, 0], pts[:, 1]))
    speed = np.sqrt(np.einsum("abn,na,nb->n", g, dirs, dirs))
    return dirs / speed[:, None]
