import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from dcengine.cli import main
from dcengine.dataset import ResponseDataset


@pytest.fixture()
def runner():
    return CliRunner()


def _design_args(out, levels="2,2", sets="4", seed="5", extra=()):
    return ["design", "--levels", levels, "--sets", sets, "--seed", seed,
            "--out", str(out), *extra]


# ---------------------------------------------------------------------------
# design
# ---------------------------------------------------------------------------

def test_design_writes_json(runner, tmp_path):
    out = tmp_path / "d.json"
    result = runner.invoke(main, _design_args(out))
    assert result.exit_code == 0, result.output
    assert "K=2" in result.output
    assert "criterion (d-error)" in result.output
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert len(doc["design"]["rows"]) == 8


def test_design_reruns_are_byte_identical(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert runner.invoke(main, _design_args(a)).exit_code == 0
    assert runner.invoke(main, _design_args(b)).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_design_bayesian_with_priors(runner, tmp_path):
    out = tmp_path / "d.json"
    result = runner.invoke(main, _design_args(
        out, extra=["--bayesian", "--priors", "0.5,-0.5", "--draws", "20"]))
    assert result.exit_code == 0, result.output
    assert "criterion (db-error)" in result.output


def test_design_priors_length_mismatch_exits_2(runner, tmp_path):
    result = runner.invoke(main, _design_args(
        tmp_path / "d.json", extra=["--priors", "0.5"]))
    assert result.exit_code == 2
    assert "K=2" in result.output  # error message names the expected length


def test_design_infeasible_settings_exit_2(runner, tmp_path):
    result = runner.invoke(main, _design_args(tmp_path / "d.json", sets="1"))
    assert result.exit_code == 2
    assert "too few sets" in result.output


def test_design_bad_levels_exit_2(runner, tmp_path):
    result = runner.invoke(main, _design_args(tmp_path / "d.json", levels="2,x"))
    assert result.exit_code == 2


def test_design_degenerate_space_exits_3(runner, tmp_path):
    result = runner.invoke(main, [
        "design", "--levels", "2", "--sets", "1", "--seed", "0",
        "--priors", "2000", "--out", str(tmp_path / "d.json"),
    ])
    assert result.exit_code == 3


# ---------------------------------------------------------------------------
# decode
# ---------------------------------------------------------------------------

def test_decode_to_stdout(runner, tmp_path):
    out = tmp_path / "d.json"
    runner.invoke(main, _design_args(out))
    result = runner.invoke(main, ["decode", "--in", str(out)])
    assert result.exit_code == 0
    assert result.output.startswith("Choice set 1")


def test_decode_with_custom_names(runner, tmp_path):
    out = tmp_path / "d.json"
    runner.invoke(main, _design_args(out))
    names = tmp_path / "names.json"
    names.write_text(json.dumps({
        "attribute_names": ["Speed", "Cost"],
        "level_names": [["slow", "fast"], ["low", "high"]],
    }))
    result = runner.invoke(main, ["decode", "--in", str(out),
                                  "--names", str(names)])
    assert result.exit_code == 0
    assert "Speed:" in result.output
    assert "fast" in result.output or "slow" in result.output


def test_decode_missing_file_exits_2(runner, tmp_path):
    result = runner.invoke(main, ["decode", "--in", str(tmp_path / "nope.json")])
    assert result.exit_code == 2


def test_decode_corrupt_file_exits_2(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    result = runner.invoke(main, ["decode", "--in", str(bad)])
    assert result.exit_code == 2


# ---------------------------------------------------------------------------
# simulate + estimate + wtp pipeline
# ---------------------------------------------------------------------------

def _pipeline(runner, tmp_path, beta="0.8,-0.5", n="400"):
    design = tmp_path / "d.json"
    data = tmp_path / "data.csv"
    assert runner.invoke(main, _design_args(design)).exit_code == 0
    result = runner.invoke(main, ["simulate", "--design", str(design),
                                  "--beta", beta, "--n", n, "--seed", "3",
                                  "--out", str(data)])
    assert result.exit_code == 0, result.output
    return design, data


def test_simulate_writes_long_format(runner, tmp_path):
    _, data = _pipeline(runner, tmp_path, n="10")
    frame = pd.read_csv(data)
    assert list(frame.columns) == ["gid", "respondent", "alt", "choice", "attr1.2", "attr2.2"]
    assert len(frame) == 10 * 4 * 2
    assert frame.groupby("gid")["choice"].sum().eq(1).all()


def test_simulate_beta_length_mismatch_exits_2(runner, tmp_path):
    design = tmp_path / "d.json"
    runner.invoke(main, _design_args(design))
    result = runner.invoke(main, ["simulate", "--design", str(design),
                                  "--beta", "1", "--n", "5", "--seed", "0",
                                  "--out", str(tmp_path / "x.csv")])
    assert result.exit_code == 2


def test_estimate_recovers_truth(runner, tmp_path):
    _, data = _pipeline(runner, tmp_path)
    json_out = tmp_path / "est.json"
    result = runner.invoke(main, ["estimate", "--data", str(data),
                                  "--json", str(json_out)])
    assert result.exit_code == 0, result.output
    assert "converged: True" in result.output
    doc = json.loads(json_out.read_text())
    for coef, truth in zip(doc["coefficients"], (0.8, -0.5)):
        assert abs(coef["estimate"] - truth) <= 3 * coef["std_error"]
        assert coef["ci_low"] <= coef["estimate"] <= coef["ci_high"]


def test_estimate_covariate_subset(runner, tmp_path):
    _, data = _pipeline(runner, tmp_path, n="100")
    result = runner.invoke(main, ["estimate", "--data", str(data),
                                  "--covariates", "attr1.2"])
    assert result.exit_code == 0
    assert "attr2.2" not in result.output


def test_estimate_unknown_covariate_exits_2(runner, tmp_path):
    _, data = _pipeline(runner, tmp_path, n="20")
    result = runner.invoke(main, ["estimate", "--data", str(data),
                                  "--covariates", "nope"])
    assert result.exit_code == 2


def test_estimate_separated_data_exits_3(runner, tmp_path):
    # the alternative carrying x=1 is always chosen
    n = 30
    frame = pd.DataFrame({
        "gid": np.repeat(np.arange(1, n + 1), 2),
        "respondent": np.repeat(np.arange(1, n + 1), 2),
        "alt": np.tile([1, 2], n),
        "choice": np.tile([1, 0], n),
        "x": np.tile([1.0, 0.0], n),
    })
    path = tmp_path / "sep.csv"
    path.write_text(ResponseDataset(frame=frame).to_csv())
    result = runner.invoke(main, ["estimate", "--data", str(path)])
    assert result.exit_code == 3


def test_estimate_collinear_data_exits_3(runner, tmp_path):
    _, data = _pipeline(runner, tmp_path, n="20")
    frame = pd.read_csv(data)
    frame["a.copy"] = frame["attr1.2"]
    dup = tmp_path / "dup.csv"
    frame.to_csv(dup, index=False)
    result = runner.invoke(main, ["estimate", "--data", str(dup)])
    assert result.exit_code == 3
    assert "rank deficient" in result.output


def test_price_recoding_flow(runner, tmp_path):
    # treat b.1 as a price dummy: base 100, level "1" worth 200
    _, data = _pipeline(runner, tmp_path)
    result = runner.invoke(main, [
        "estimate", "--data", str(data),
        "--price-columns", "attr2.2", "--price-levels", "100,200",
    ])
    assert result.exit_code == 0, result.output
    assert "cont_price" in result.output


def test_price_levels_without_columns_exits_2(runner, tmp_path):
    _, data = _pipeline(runner, tmp_path, n="10")
    result = runner.invoke(main, ["estimate", "--data", str(data),
                                  "--price-levels", "100,200"])
    assert result.exit_code == 2


def test_wtp_command(runner, tmp_path):
    _, data = _pipeline(runner, tmp_path)
    result = runner.invoke(main, [
        "wtp", "--data", str(data),
        "--price-columns", "attr2.2", "--price-levels", "100,200",
        "--price", "cont_price", "--targets", "attr1.2",
    ])
    assert result.exit_code == 0, result.output
    assert "attr1.2" in result.output
    assert "WTP" in result.output


def test_wtp_unknown_target_exits_2(runner, tmp_path):
    _, data = _pipeline(runner, tmp_path, n="100")
    result = runner.invoke(main, ["wtp", "--data", str(data),
                                  "--price", "attr2.2", "--targets", "nope"])
    assert result.exit_code == 2
