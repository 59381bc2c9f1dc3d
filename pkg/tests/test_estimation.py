import numpy as np
import pandas as pd
import pytest

import dcengine as dce
from dcengine.dataset import ResponseDataset
from dcengine.errors import InvalidInputError, RankDeficiencyError, SeparationError
from dcengine.estimation import (
    EstimationResult,
    coefficient_plot_data,
    fit_conditional_logit,
    log_likelihood,
    recode_price_continuous,
    wtp,
)
from dcengine.estimation import _ll_grad_neghess, _task_groups
from dcengine.optimizer import generate_design


@pytest.fixture(scope="module")
def small_design(small_settings):
    return generate_design(small_settings).design


@pytest.fixture(scope="module")
def small_data(small_design):
    return dce.simulate_choices(small_design, np.array([0.6, -0.4]), 400, seed=21)


@pytest.fixture(scope="module")
def small_fit(small_data, small_design):
    return fit_conditional_logit(small_data, list(small_design.column_names))


# ---------------------------------------------------------------------------
# Price recoding
# ---------------------------------------------------------------------------

def _price_dataset():
    # two tasks, two alternatives, price attribute with levels 100/150/200
    frame = pd.DataFrame({
        "gid": [1, 1, 2, 2],
        "respondent": [1, 1, 1, 1],
        "alt": [1, 2, 1, 2],
        "choice": [1, 0, 0, 1],
        "cost.150": [1.0, 0.0, 0.0, 0.0],
        "cost.200": [0.0, 1.0, 0.0, 0.0],
        "other": [0.0, 1.0, 1.0, 0.0],
    })
    return ResponseDataset(frame=frame)


def test_recode_price_values():
    data = recode_price_continuous(
        _price_dataset(), ["cost.150", "cost.200"],
        {"cost.150": 150.0, "cost.200": 200.0}, base_value=100.0,
    )
    assert data.frame["cont_price"].tolist() == [150.0, 200.0, 100.0, 100.0]


def test_recode_price_registry():
    data = recode_price_continuous(
        _price_dataset(), ["cost.150", "cost.200"],
        {"cost.150": 150.0, "cost.200": 200.0}, base_value=100.0,
    )
    assert "cont_price" in data.covariates
    assert "cost.150" not in data.covariates
    assert "cost.150" not in data.frame.columns


def test_recode_price_missing_column():
    with pytest.raises(InvalidInputError, match="cost.999"):
        recode_price_continuous(
            _price_dataset(), ["cost.999"], {"cost.999": 1.0}, 0.0
        )


def test_recode_price_missing_value():
    with pytest.raises(InvalidInputError, match="cost.200"):
        recode_price_continuous(
            _price_dataset(), ["cost.150", "cost.200"], {"cost.150": 150.0}, 100.0
        )


# ---------------------------------------------------------------------------
# Conditional logit fit
# ---------------------------------------------------------------------------

def test_fit_recovers_near_truth(small_fit):
    # beta-hat within 3 standard errors of the simulation truth
    truth = np.array([0.6, -0.4])
    assert np.all(np.abs(small_fit.coefficients.beta - truth)
                  <= 3.0 * small_fit.std_errors)
    assert small_fit.converged


def test_gradient_vanishes_at_optimum(small_data, small_fit):
    covs = list(small_fit.coefficients.names)
    frame, starts, task_of = _task_groups(small_data.frame)
    X = frame[covs].to_numpy(float)
    y = frame["choice"].to_numpy(float)
    _, grad, _ = _ll_grad_neghess(X, y, starts, task_of, small_fit.coefficients.beta)
    assert np.max(np.abs(grad)) < 1e-6


def test_gradient_matches_finite_differences(small_data):
    covs = ["a.1", "b.1"]
    frame, starts, task_of = _task_groups(small_data.frame)
    X = frame[covs].to_numpy(float)
    y = frame["choice"].to_numpy(float)
    rng = np.random.default_rng(7)
    h = 1e-6
    for _ in range(10):
        beta = rng.normal(scale=0.8, size=2)
        _, grad, _ = _ll_grad_neghess(X, y, starts, task_of, beta)
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (log_likelihood(small_data, covs, beta + e)
                  - log_likelihood(small_data, covs, beta - e)) / (2 * h)
            assert grad[k] == pytest.approx(fd, rel=1e-5)


def test_null_beta_estimates_stay_small(small_design):
    data = dce.simulate_choices(small_design, np.zeros(2), 1000, seed=31)
    est = fit_conditional_logit(data, list(small_design.column_names))
    assert np.all(np.abs(est.coefficients.beta) < 3.0 * est.std_errors)


def test_duplicate_column_raises_rank_error(small_data):
    frame = small_data.frame.copy()
    frame["a.copy"] = frame["a.1"]
    data = ResponseDataset(frame=frame)
    with pytest.raises(RankDeficiencyError) as err:
        fit_conditional_logit(data, ["a.1", "b.1", "a.copy"])
    assert any(c in ("a.1", "a.copy") for c in err.value.columns)


def test_constant_within_task_column_rejected(small_data):
    # a column identical across the alternatives of every task adds a
    # constant to each utility and is unidentifiable
    frame = small_data.frame.copy()
    frame["const"] = 1.0
    data = ResponseDataset(frame=frame)
    with pytest.raises(RankDeficiencyError, match="const"):
        fit_conditional_logit(data, ["a.1", "b.1", "const"])


def test_separation_detected():
    # the alternative carrying x=1 is always chosen
    n = 40
    frame = pd.DataFrame({
        "gid": np.repeat(np.arange(1, n + 1), 2),
        "respondent": np.repeat(np.arange(1, n + 1), 2),
        "alt": np.tile([1, 2], n),
        "choice": np.tile([1, 0], n),
        "x": np.tile([1.0, 0.0], n),
    })
    with pytest.raises(SeparationError):
        fit_conditional_logit(ResponseDataset(frame=frame), ["x"])


def test_parameter_recovery_improves_with_n(small_design):
    truth = np.array([0.6, -0.4])
    better = 0
    for rep in range(20):
        small = dce.simulate_choices(small_design, truth, 250, seed=1000 + rep)
        large = dce.simulate_choices(small_design, truth, 4000, seed=2000 + rep)
        err_small = np.linalg.norm(
            fit_conditional_logit(small, list(small_design.column_names)).coefficients.beta - truth
        )
        err_large = np.linalg.norm(
            fit_conditional_logit(large, list(small_design.column_names)).coefficients.beta - truth
        )
        if err_large < err_small:
            better += 1
    assert better >= 18


def test_dataset_invariants_enforced():
    frame = pd.DataFrame({
        "gid": [1, 1], "respondent": [1, 1], "alt": [1, 2],
        "choice": [1, 1], "x": [0.0, 1.0],
    })
    with pytest.raises(InvalidInputError, match="exactly one choice"):
        fit_conditional_logit(ResponseDataset(frame=frame), ["x"])


def test_unknown_covariate_rejected(small_data):
    with pytest.raises(InvalidInputError, match="nope"):
        fit_conditional_logit(small_data, ["nope"])


# ---------------------------------------------------------------------------
# WTP
# ---------------------------------------------------------------------------

def _manual_result(names, beta, vcov):
    beta = np.asarray(beta, float)
    vcov = np.asarray(vcov, float)
    se = np.sqrt(np.diag(vcov))
    return EstimationResult(
        coefficients=dce.Coefficients(names=tuple(names), beta=beta),
        vcov=vcov,
        std_errors=se,
        z_values=np.zeros_like(beta),
        p_values=np.ones_like(beta),
        log_likelihood=0.0,
        iterations=1,
        converged=True,
    )


def test_wtp_point_arithmetic():
    est = _manual_result(["lvl", "price"], [0.5, -0.01], np.zeros((2, 2)))
    result = wtp(est, "price", ["lvl"])
    entry = result.entries[0]
    assert entry.estimate == pytest.approx(50.0)
    assert entry.std_error == 0.0
    assert entry.ci_low == entry.ci_high == pytest.approx(50.0)


def test_wtp_zero_coefficient():
    est = _manual_result(["lvl", "price"], [0.0, -0.5], np.eye(2) * 0.01)
    assert wtp(est, "price", ["lvl"]).entries[0].estimate == 0.0


def test_wtp_zero_price_rejected():
    est = _manual_result(["lvl", "price"], [0.5, 0.0], np.eye(2))
    with pytest.raises(InvalidInputError, match="zero"):
        wtp(est, "price", ["lvl"])


def test_wtp_price_cannot_be_target():
    est = _manual_result(["lvl", "price"], [0.5, -0.5], np.eye(2))
    with pytest.raises(InvalidInputError):
        wtp(est, "price", ["price"])


def test_wtp_unknown_target():
    est = _manual_result(["lvl", "price"], [0.5, -0.5], np.eye(2))
    with pytest.raises(InvalidInputError, match="base"):
        wtp(est, "price", ["base"])


def test_wtp_ci_width(small_fit):
    result = wtp(small_fit, "b.1", ["a.1"])
    entry = result.entries[0]
    assert entry.ci_high - entry.ci_low == pytest.approx(2 * 1.96 * entry.std_error)
    assert entry.ci_low <= entry.estimate <= entry.ci_high


def test_wtp_se_matches_parametric_bootstrap(small_fit):
    result = wtp(small_fit, "b.1", ["a.1"])
    names = list(small_fit.coefficients.names)
    k, p = names.index("a.1"), names.index("b.1")
    rng = np.random.default_rng(99)
    draws = rng.multivariate_normal(small_fit.coefficients.beta, small_fit.vcov,
                                    size=10_000)
    boot = -draws[:, k] / draws[:, p]
    assert result.entries[0].std_error == pytest.approx(boot.std(ddof=1), rel=0.10)


# ---------------------------------------------------------------------------
# Plot data
# ---------------------------------------------------------------------------

def test_plot_data_arithmetic():
    est = _manual_result(["x"], [1.0], [[0.25]])
    (name, b, lo, hi), = coefficient_plot_data(est)
    assert (name, b) == ("x", 1.0)
    assert lo == pytest.approx(1.0 - 1.96 * 0.5)
    assert hi == pytest.approx(1.0 + 1.96 * 0.5)


def test_plot_data_count_and_order(small_fit):
    data = coefficient_plot_data(small_fit)
    assert [d[0] for d in data] == list(small_fit.coefficients.names)


def test_plot_data_zero_se():
    est = _manual_result(["x"], [2.0], [[0.0]])
    (_, b, lo, hi), = coefficient_plot_data(est)
    assert lo == hi == b == 2.0
