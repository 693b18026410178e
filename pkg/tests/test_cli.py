import json

import numpy as np
import pytest
from click.testing import CliRunner

from cli_cases import CASES, compare, run_case
from projflat.cli import main
from projflat.commands import (DEFAULTS, MetricSpec, SpecError, auto_rays, cmd_geodesic, parse_batch, parse_grid,
                               parse_pair)


@pytest.mark.parametrize("case", CASES, ids=[c.name for c in CASES])
def test_golden(case, tmp_path):
    produced = run_case(case, tmp_path)
    assert int(produced["exit"]) == case.exit_code, produced["err"]
    assert compare(case, produced) == []


def test_every_exit_code_and_subcommand_covered():
    assert {c.exit_code for c in CASES} == {0, 2, 3, 4}
    assert {c.args[0] for c in CASES} == {"curvature", "flatness", "geodesic", "straighten", "liouville-verify"}


@pytest.mark.parametrize("case", [c for c in CASES if c.exit_code in (0, 3, 4)][:6], ids=lambda c: c.name)
def test_deterministic(case, tmp_path):
    a = run_case(case, tmp_path)
    b = run_case(case, tmp_path)
    assert a == b


def run(*args):
    return CliRunner().invoke(main, list(args))


def test_curvature_examples():
    res = run("curvature", "--metric", "flat", "--grid=-1:1:4")
    rows = [line.split(",") for line in res.stdout.splitlines() if line[0] not in "#x"]
    assert len(rows) == 16 and all(r[2] == "0" for r in rows)
    res = run("curvature", "--metric", "bump", "--grid=-0.8:0.8:5")
    K = [float(line.split(",")[2]) for line in res.stdout.splitlines() if line[0] not in "#x"]
    assert max(K) - min(K) >= 1e-2


def test_flatness_verdicts():
    out = json.loads(run("flatness", "--metric", "thales").stdout)
    assert out["summary"]["verdict"] == "FLAT" and out["summary"]["sup_Y"] <= 1e-7
    assert out["summary"]["samples"] == 100
    out = json.loads(run("flatness", "--metric", "bump").stdout)
    assert out["summary"]["verdict"] == "NOT FLAT"


def test_flatness_random_liouville(rng):
    from projflat.liouville import random_params

    p = random_params(rng, (0.0, 0.0))
    spec = json.dumps({"name": "liouville", "params": p.as_dict()})
    out = json.loads(run("flatness", "--metric-json", spec, "--samples", "30", "--region-radius", "0.1").stdout)
    assert out["summary"]["verdict"] == "FLAT"


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"metric": {"name": "thales"}, "samples": 7, "seed": 3}))
    out = json.loads(run("flatness", "--config", str(cfg), "--seed", "5").stdout)
    assert out["config"]["samples"] == 7
    assert out["config"]["seed"] == 5
    assert out["config"]["flatness_threshold"] == DEFAULTS["flatness_threshold"]
    assert out["config"]["metric"] == {"name": "thales"}


def test_out_option(tmp_path):
    path = tmp_path / "k.csv"
    res = run("curvature", "--metric", "flat", "--grid=0:1:2", "--out", str(path))
    assert res.exit_code == 0 and res.stdout == ""
    assert path.read_text().startswith("# metric")


def test_geodesic_examples():
    res = run("geodesic", "--metric", "flat", "--start", "0,0", "--direction", "1,1", "--t-max", "1")
    last = res.stdout.strip().splitlines()[-1].split(",")
    assert [float(v) for v in last[:3]] == [1, 1, 1]

    def header(args):
        out = run("geodesic", *args).stdout
        return float(next(line for line in out.splitlines() if "collinearity" in line).split(":")[1])

    assert header(["--metric", "beltrami", "--start", "0.2,0", "--direction", "1,3", "--t-max", "0.5"]) <= 1e-7
    assert header(["--metric", "poincare", "--start", "0.5,0", "--direction", "0,1", "--t-max", "2"]) >= 1e-2


def test_geodesic_integration_error_keeps_last_good_sample():
    # x = tan t along the Thales x-axis, which leaves every chart at t = pi/2
    res = run("geodesic", "--metric", "thales", "--start", "0,0", "--direction", "1,0", "--t-max", "2",
              "--steps-per-unit", "50")
    assert res.exit_code == 3
    assert "# integration_error:" in res.stdout
    rows = [line.split(",") for line in res.stdout.splitlines() if line[0] not in "#t"]
    values = np.array(rows, dtype=float)
    assert np.all(np.isfinite(values)) and values[-1, 0] < 2
    early = values[values[:, 0] <= 1.2]
    assert np.allclose(early[:, 1], np.tan(early[:, 0]), rtol=1e-5)


def test_usage_errors():
    assert run("geodesic", "--metric", "flat").exit_code == 2
    assert run("curvature", "--metric", "flat", "--grid", "1:2").exit_code == 2
    assert run("curvature").exit_code == 2
    assert run("curvature", "--metric", "flat", "--metric-json", '{"name": "flat"}').exit_code == 2
    assert run("flatness", "--metric-json", "{not json").exit_code == 2
    assert run("liouville-verify", "--params", "1,2").exit_code == 2


def test_metric_spec_validation():
    with pytest.raises(SpecError):
        MetricSpec.validated("liouville")
    with pytest.raises(SpecError):
        MetricSpec.from_json('{"name": "flat", "params": {"p": 0, "q": 0, "r": 0, "s": 1, "t": 0, "u": 1}}')
    spec = MetricSpec.from_json(
        '{"name": "liouville", "params": {"p": 0, "q": 0, "r": 1, "s": 1, "t": 0, "u": 1}}')
    assert spec.as_dict()["params"]["r"] == 1.0


def test_parsers():
    assert np.allclose(parse_grid("-1:1:3"), [-1, 0, 1])
    assert parse_pair("0.5,-2", "x") == (0.5, -2.0)
    assert parse_batch("auto:7") == 7
    for bad in ("auto:0", "auto:x", "7"):
        with pytest.raises(SpecError):
            parse_batch(bad)


def test_auto_rays_layout():
    starts, dirs = auto_rays((0.1, -0.2), 0.8, 6, 42)
    assert np.allclose(np.hypot(starts[:, 0] - 0.1, starts[:, 1] + 0.2), 0.76)
    assert np.allclose(np.hypot(*dirs.T), 1)
    again = auto_rays((0.1, -0.2), 0.8, 6, 42)
    assert np.array_equal(starts, again[0]) and np.array_equal(dirs, again[1])


def test_cmd_geodesic_direct():
    res = cmd_geodesic(MetricSpec.validated("flat"), (0.0, 0.0), (1.0, 2.0), 1.0, {"steps_per_unit": 10})
    assert res.exit_code == 0
    assert res.extra["curve"].points[-1] == pytest.approx([1, 2])
