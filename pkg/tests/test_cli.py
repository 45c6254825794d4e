import json
from pathlib import Path

import numpy as np
import pytest

from drrange import cli

INSTANCES = Path(__file__).resolve().parents[1] / "instances"

TWO_BALLS = {
    "schema": 1, "dim": 2,
    "A": {"op": "normal_cone", "set": {"type": "ball", "center": [0, 0], "radius": 1}},
    "B": {"op": "normal_cone", "set": {"type": "ball", "center": [4, 0], "radius": 1}},
    "run": {"x0": [0, 7], "steps": 3000},
}


def write(tmp_path, data, name="inst.json"):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(p)


def test_run_two_balls(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", write(tmp_path, TWO_BALLS), "--out", str(out)]) == 0
    s = json.loads((out / "summary.json").read_text())
    np.testing.assert_allclose(s["v"], [-2.0, 0.0], atol=1e-3)
    assert s["diff_monotone"] and not s["converged"]
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header.startswith("step,x0,x1,")
    assert json.loads(capsys.readouterr().out) == s


def test_run_consistent_converges(capsys):
    assert cli.main(["run", str(INSTANCES / "consistent_balls.json")]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["converged"] and np.linalg.norm(s["v"]) <= 1e-8


def test_run_is_deterministic(tmp_path):
    path = write(tmp_path, {**TWO_BALLS, "run": {"steps": 500}})
    outs = []
    for i in range(2):
        d = tmp_path / f"o{i}"
        assert cli.main(["run", path, "--seed", "7", "--out", str(d)]) == 0
        outs.append(((d / "summary.json").read_bytes(), (d / "trace.csv").read_bytes()))
    assert outs[0] == outs[1]


def test_diagnose_examples(tmp_path, capsys):
    out = tmp_path / "d"
    assert cli.main(["diagnose", str(INSTANCES / "affine_singleton.json"), "--out", str(out)]) == 0
    r = json.loads((out / "report.json").read_text())
    np.testing.assert_allclose(r["v_D"], [0, 1], atol=1e-12)
    np.testing.assert_allclose(r["v_R"], [3, 0], atol=1e-12)
    assert r["condition"] == "AffineDomRan"
    capsys.readouterr()
    assert cli.main(["diagnose", str(INSTANCES / "two_balls.json")]) == 0
    r = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(r["v"], [-2, 0], atol=1e-3)


def test_probe_examples(capsys):
    assert cli.main(["probe", str(INSTANCES / "two_balls.json"), "--w=-3,0"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "InClosure"
    assert cli.main(["probe", str(INSTANCES / "two_balls.json")]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "NotInClosure"


@pytest.mark.parametrize("data, fragment", [
    ("{not json", "invalid JSON"),
    ({**TWO_BALLS, "schema": 9}, "schema"),
    ({k: v for k, v in TWO_BALLS.items() if k != "B"}, "B:"),
    ({**TWO_BALLS, "A": {"op": "normal_cone", "set": {"type": "ball", "center": [0, 0], "radius": -1}}}, "A:"),
    ({**TWO_BALLS, "A": {"op": "no_such_op"}}, "A:"),
    ({**TWO_BALLS, "dim": 3}, "dim"),
    ({**TWO_BALLS, "run": {"x0": [1, 2, 3]}}, "run.x0"),
    ({"schema": 1, "product": {"factors": [
        {"op": "normal_cone", "set": {"type": "box", "lower": [0], "upper": [1]}},
        {"op": "normal_cone", "set": {"type": "box", "lower": [2]}}]}}, "product.factors[1]"),
])
def test_malformed_instances_exit_2(tmp_path, capsys, data, fragment):
    assert cli.main(["run", write(tmp_path, data)]) == 2
    assert fragment in capsys.readouterr().err


def test_missing_file_and_bad_arguments(tmp_path):
    assert cli.main(["run", str(tmp_path / "absent.json")]) == 2
    assert cli.main(["frobnicate"]) == 2
    assert cli.main(["probe", str(INSTANCES / "two_balls.json"), "--w", "a,b"]) == 2
    assert cli.main(["probe", str(INSTANCES / "two_balls.json"), "--w", "1,2,3"]) == 2


def test_numerical_failure_exit_3(tmp_path):
    bad = write(tmp_path, '{"schema": 1, "dim": 2, "A": %s, "B": %s, "run": {"x0": [NaN, 0], "steps": 200}}'
                % (json.dumps(TWO_BALLS["A"]), json.dumps(TWO_BALLS["B"])))
    assert cli.main(["run", bad]) == 3
    sched = write(tmp_path, {**TWO_BALLS, "probe": {"w": [0, 0], "n_schedule": [4, 2]}}, "s.json")
    assert cli.main(["probe", sched]) == 3


def test_descriptor_refusal_exit_4(capsys):
    assert cli.main(["diagnose", str(INSTANCES / "product_intervals.json")]) == 4
    assert "closed-form" in capsys.readouterr().err


def test_product_instance_runs(capsys):
    assert cli.main(["run", str(INSTANCES / "product_intervals.json")]) == 0
    np.testing.assert_allclose(json.loads(capsys.readouterr().out)["v"], [-2, 0, 2], atol=1e-3)


def test_verify_examples_and_injected_fault(tmp_path, capsys):
    assert cli.main(["verify-examples", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "verify.json").read_text())
    assert rows and all(r["passed"] for r in rows)
    capsys.readouterr()
    assert cli.main(["verify-examples", "--inject-fault", "gamma_mismatch"]) == 1
    assert "FAIL  skew pair" in capsys.readouterr().out


def test_fault_flag_is_hidden(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["verify-examples", "--help"])
    assert "inject" not in capsys.readouterr().out
