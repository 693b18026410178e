"""Pinned CLI invocations whose outputs are kept byte-for-byte in ``golden/``.

Regenerate with ``PROJFLAT_REGEN_GOLDEN=1 pytest tests/test_cli.py``.
"""

import os
from dataclasses import dataclass
from pathlib import Path

from click.testing import CliRunner

from projflat.cli import main

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("PROJFLAT_REGEN_GOLDEN") == "1"
BELTRAMI_JSON = '{"name": "liouville", "params": {"p": 0, "q": 0, "r": -1, "s": 1, "t": 0, "u": 1}}'


@dataclass(frozen=True)
class Case:
    name: str
    args: tuple
    exit_code: int
    svg: bool = False


CASES = [
    Case("curvature_beltrami", ("curvature", "--metric", "beltrami", "--grid=-0.5:0.5:3"), 0),
    Case("curvature_poincare_omitted", ("curvature", "--metric", "poincare", "--grid=-1:1:5"), 0),
    Case("curvature_bump", ("curvature", "--metric", "bump", "--grid=-0.6:0.6:3", "--grid-y=0:0.6:2"), 0),
    Case("curvature_unknown_metric", ("curvature", "--metric", "hyperbolic"), 2),
    Case("flatness_thales", ("flatness", "--metric", "thales", "--samples", "20"), 0),
    Case("flatness_bump", ("flatness", "--metric", "bump", "--samples", "20"), 0),
    Case("flatness_liouville_json", ("flatness", "--metric-json", BELTRAMI_JSON, "--samples", "10"), 0),
    Case("flatness_config", ("flatness", "--config", str(GOLDEN / "flatness_config.json"), "--samples", "15"), 0),
    Case("flatness_bad_json", ("flatness", "--metric-json", '{"name": "liouville"}'), 2),
    Case("geodesic_flat", ("geodesic", "--metric", "flat", "--start", "0,0", "--direction", "1,1",
                           "--t-max", "1", "--steps-per-unit", "20"), 0),
    Case("geodesic_blowup", ("geodesic", "--metric", "thales", "--start", "0,0", "--direction", "1,0",
                             "--t-max", "2", "--steps-per-unit", "50"), 3),
    Case("geodesic_start_outside", ("geodesic", "--metric", "poincare", "--start", "1.5,0", "--direction", "1,0",
                                    "--t-max", "1"), 2),
    Case("straighten_flat", ("straighten", "--metric", "flat", "--geodesics", "auto:4", "--steps-per-unit", "100"),
         0, svg=True),
    Case("straighten_bump", ("straighten", "--metric", "bump", "--steps-per-unit", "100"), 4),
    Case("straighten_bad_batch", ("straighten", "--metric", "flat", "--geodesics", "12"), 2),
    Case("liouville_thales", ("liouville-verify", "--params", "0,0,1,1,0,1", "--samples", "10"), 0),
    Case("liouville_degenerate", ("liouville-verify", "--params", "0,0,0,0,0,0"), 2),
]


def run_case(case: Case, tmp: Path) -> dict[str, bytes]:
    """Run one case; returns the produced artefacts keyed by golden-file suffix."""
    args = list(case.args)
    svg_path = tmp / f"{case.name}.svg"
    if case.svg:
        args += ["--svg", str(svg_path)]
    result = CliRunner().invoke(main, args)
    if result.exception and not isinstance(result.exception, SystemExit):
        raise result.exception
    out = {"exit": f"{result.exit_code}\n".encode(), "out": result.stdout_bytes, "err": result.stderr_bytes}
    if case.svg:
        out["svg"] = svg_path.read_bytes()
    return out


def compare(case: Case, produced: dict[str, bytes]) -> list[str]:
    """Names of golden artefacts that differ (writing them instead when regenerating)."""
    bad = []
    for suffix, data in produced.items():
        path = GOLDEN / f"{case.name}.{suffix}"
        if REGEN:
            path.write_bytes(data)
        elif not path.exists() or path.read_bytes() != data:
            bad.append(path.name)
    return bad
