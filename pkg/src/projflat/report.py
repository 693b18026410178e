"""Deterministic CSV / JSON / SVG emission.

Number policy: every emitted number is formatted with 12 significant digits
(``format(v, ".12g")``), negative zero is written as ``0``, and JSON floats
are round-tripped through the same formatting.  No timestamps anywhere.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np


def fmt(v) -> str:
    v = float(v)
    if v == 0.0:
        return "0"
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


def clean(obj):
    """Make ``obj`` JSON-ready: numpy scalars/arrays to lists, floats to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return fmt(v)
        return float(fmt(v))
    return obj


def config_hash(command: str, config: dict) -> str:
    blob = json.dumps({"command": command, "config": clean(config)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunReport:
    command: str
    config: dict
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": clean(self.config),
            "config_hash": config_hash(self.command, self.config),
            "records": clean(self.records),
            "summary": clean(self.summary),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _svg_coord(v) -> str:
    s = f"{float(v):.6f}"
    return "0.000000" if s == "-0.000000" else s


def svg_text(original: Sequence[np.ndarray], straightened: Sequence[np.ndarray]) -> str:
    """Original curves and their straightened images as two layers over a shared viewBox.

    The viewBox is the data extent plus a 5% margin; y is flipped so the
    picture has the usual orientation.
    """
    curves = [c for c in list(original) + list(straightened) if len(c)]
    pts = np.vstack(curves) if curves else np.zeros((1, 2))
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - 0.05 * span, hi + 0.05 * span
    w, h = hi - lo
    stroke = max(w, h) / 400
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="600" height="{_svg_coord(600 * h / w)}" '
        f'viewBox="{_svg_coord(lo[0])} {_svg_coord(-hi[1])} {_svg_coord(w)} {_svg_coord(h)}">',
    ]
    for name, group, colour in (("original", original, "#1f77b4"), ("straightened", straightened, "#d62728")):
        out.append(f'<g id="{name}" class="{name}" fill="none" stroke="{colour}" '
                   f'stroke-width="{_svg_coord(stroke)}">')
        for i, c in enumerate(group):
            if len(c) < 2:
                continue
            pts = " ".join(f"{_svg_coord(x)},{_svg_coord(-y)}" for x, y in c)
            out.append(f'<polyline class="curve-{i}" points="{pts}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_or_echo(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        import click

        click.echo(text, nl=False)


def as_list(x: Any) -> list:
    return [float(v) for v in np.ravel(x)]
