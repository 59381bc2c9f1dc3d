"""Conditional logit estimation and willingness-to-pay.

Fits the conditional (multinomial) logit by Newton-Raphson with analytic
gradient and Hessian, starting from zero and halving steps whenever a
full step would decrease the log-likelihood. Willingness to pay is the
coefficient ratio -beta_k / beta_price with delta-method standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats

from .core import Coefficients
from .dataset import BOOKKEEPING_COLUMNS, ResponseDataset
from .errors import InvalidInputError, RankDeficiencyError, SeparationError

GRADIENT_TOL = 1e-6
MAX_ITERATIONS = 100
MAX_STEP_HALVINGS = 20
SEPARATION_BOUND = 50.0
Z_95 = 1.96


@dataclass
class EstimationResult:
    coefficients: Coefficients
    vcov: np.ndarray
    std_errors: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class WtpEntry:
    name: str
    estimate: float
    std_error: float
    ci_low: float
    ci_high: float


@dataclass
class WtpResult:
    price_name: str
    entries: list[WtpEntry]


# ---------------------------------------------------------------------------
# Price recoding
# ---------------------------------------------------------------------------

def recode_price_continuous(data: ResponseDataset, price_columns: list[str],
                            level_values: dict[str, float],
                            base_value: float) -> ResponseDataset:
    """Replace the price attribute's dummy columns with one continuous column.

    ``cont_price`` equals the currency value of the row's price level:
    ``base_value`` when all dummies are zero, otherwise the value mapped
    to the active dummy column.
    """
    if not price_columns:
        raise InvalidInputError("price_columns must be non-empty")
    for col in price_columns:
        if col not in data.covariates:
            raise InvalidInputError(f"price column '{col}' not in the dataset")
        if col not in level_values:
            raise InvalidInputError(f"no currency value given for level '{col}'")
    frame = data.frame
    dummies = frame[price_columns].to_numpy(dtype=float)
    if not np.all(np.isin(dummies, (0.0, 1.0))) or np.any(dummies.sum(axis=1) > 1):
        raise InvalidInputError(
            "price columns are not the dummy columns of a single attribute"
        )
    cont = np.full(len(frame), float(base_value))
    for i, col in enumerate(price_columns):
        cont += dummies[:, i] * (level_values[col] - base_value)

    new_frame = frame.drop(columns=price_columns).copy()
    covariates = []
    inserted = False
    for name in data.covariates:
        if name in price_columns:
            if not inserted:
                covariates.append("cont_price")
                inserted = True
            continue
        covariates.append(name)
    new_frame["cont_price"] = cont
    return ResponseDataset(frame=new_frame[BOOKKEEPING_COLUMNS + covariates],
                           covariates=covariates)


# ---------------------------------------------------------------------------
# Conditional logit
# ---------------------------------------------------------------------------

def _task_groups(frame: pd.DataFrame) -> tuple[pd.DataFrame, np.ndarray, np.ndarray]:
    """Sort rows by task and return (sorted frame, group starts, task index per row)."""
    frame = frame.sort_values("gid", kind="stable").reset_index(drop=True)
    gids = frame["gid"].to_numpy()
    starts = np.flatnonzero(np.r_[True, gids[1:] != gids[:-1]])
    task_of = np.cumsum(np.r_[False, gids[1:] != gids[:-1]])
    return frame, starts, task_of


def _ll_grad_neghess(X: np.ndarray, y: np.ndarray, starts: np.ndarray,
                     task_of: np.ndarray, beta: np.ndarray):
    u = X @ beta
    m = np.maximum.reduceat(u, starts)
    e = np.exp(u - m[task_of])
    denom = np.add.reduceat(e, starts)
    p = e / denom[task_of]
    ll = float(np.sum((u - (m + np.log(denom))[task_of]) * y))
    grad = X.T @ (y - p)
    xp = np.add.reduceat(p[:, None] * X, starts, axis=0)  # (T, K)
    neg_hess = X.T @ (p[:, None] * X) - xp.T @ xp
    return ll, grad, neg_hess


def _separated_columns(X: np.ndarray, y: np.ndarray, starts: np.ndarray,
                       names: list[str]) -> list[str]:
    """Columns that perfectly predict the choice: whenever the column varies
    within a task, the chosen alternative attains its maximum (or always its
    minimum). The likelihood then increases without bound along that
    coordinate."""
    chosen = X[y == 1.0]  # one row per task, in task order
    col_max = np.maximum.reduceat(X, starts, axis=0)
    col_min = np.minimum.reduceat(X, starts, axis=0)
    out = []
    for k, name in enumerate(names):
        varying = col_max[:, k] > col_min[:, k] + 1e-12
        if not varying.any():
            continue
        if np.all(chosen[varying, k] >= col_max[varying, k] - 1e-12):
            out.append(name)
        elif np.all(chosen[varying, k] <= col_min[varying, k] + 1e-12):
            out.append(name)
    return out


def _collinear_columns(Xc: np.ndarray, names: list[str]) -> list[str]:
    """Names of dependent columns found by pivoted QR of the within-task
    centered matrix."""
    _, r, pivots = scipy.linalg.qr(Xc, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = (diag[0] if len(diag) and diag[0] > 0 else 1.0) * max(Xc.shape) * 1e-12
    rank = int(np.sum(diag > tol))
    return [names[i] for i in sorted(pivots[rank:])]


def fit_conditional_logit(data: ResponseDataset,
                          covariate_selection: list[str]) -> EstimationResult:
    """Maximum-likelihood conditional logit over the selected covariates.

    Raises:
        RankDeficiencyError: the within-task design matrix is collinear
            (includes any column constant within every task).
        SeparationError: a coefficient diverged past +/-50 during iteration.

    A fit that hits the iteration cap is returned with ``converged=False``
    rather than raised.
    """
    data.validate()
    if not covariate_selection:
        raise InvalidInputError("select at least one covariate")
    missing = [c for c in covariate_selection if c not in data.frame.columns]
    if missing:
        raise InvalidInputError(f"unknown covariates: {', '.join(missing)}")

    frame, starts, task_of = _task_groups(data.frame)
    X = frame[list(covariate_selection)].to_numpy(dtype=float)
    y = frame["choice"].to_numpy(dtype=float)
    n, k = X.shape

    counts = np.diff(np.r_[starts, n])
    task_means = np.add.reduceat(X, starts, axis=0) / counts[:, None]
    Xc = X - task_means[task_of]
    bad = _collinear_columns(Xc, list(covariate_selection))
    if bad:
        raise RankDeficiencyError(bad)
    separated = _separated_columns(X, y, starts, list(covariate_selection))
    if separated:
        raise SeparationError(
            "these covariates perfectly predict the choice whenever they "
            "vary: " + ", ".join(separated)
        )

    beta = np.zeros(k)
    ll, grad, neg_hess = _ll_grad_neghess(X, y, starts, task_of, beta)
    converged = False
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        if np.max(np.abs(grad)) < GRADIENT_TOL:
            converged = True
            iterations -= 1
            break
        try:
            step = np.linalg.solve(neg_hess, grad)
        except np.linalg.LinAlgError:
            raise RankDeficiencyError(_collinear_columns(Xc, list(covariate_selection))
                                      or list(covariate_selection))
        scale = 1.0
        for _ in range(MAX_STEP_HALVINGS + 1):
            candidate = beta + scale * step
            new_ll, new_grad, new_neg_hess = _ll_grad_neghess(
                X, y, starts, task_of, candidate)
            if new_ll >= ll or scale <= 2.0 ** -MAX_STEP_HALVINGS:
                break
            scale /= 2.0
        beta, ll, grad, neg_hess = candidate, new_ll, new_grad, new_neg_hess
        if np.max(np.abs(beta)) > SEPARATION_BOUND:
            raise SeparationError(
                "a coefficient diverged during iteration; the data likely "
                "separate the choice perfectly for some level"
            )
    else:
        converged = np.max(np.abs(grad)) < GRADIENT_TOL

    try:
        vcov = np.linalg.inv(neg_hess)
    except np.linalg.LinAlgError:
        raise RankDeficiencyError(list(covariate_selection))
    std_errors = np.sqrt(np.clip(np.diag(vcov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(std_errors > 0, beta / std_errors, np.inf * np.sign(beta))
    p = 2.0 * stats.norm.sf(np.abs(z))
    return EstimationResult(
        coefficients=Coefficients(names=tuple(covariate_selection), beta=beta),
        vcov=vcov,
        std_errors=std_errors,
        z_values=z,
        p_values=p,
        log_likelihood=ll,
        iterations=iterations,
        converged=converged,
    )


def log_likelihood(data: ResponseDataset, covariate_selection: list[str],
                   beta: np.ndarray) -> float:
    """Conditional logit log-likelihood at an arbitrary beta (used by tests
    as a finite-difference oracle target)."""
    frame, starts, task_of = _task_groups(data.frame)
    X = frame[list(covariate_selection)].to_numpy(dtype=float)
    y = frame["choice"].to_numpy(dtype=float)
    ll, _, _ = _ll_grad_neghess(X, y, starts, task_of, np.asarray(beta, dtype=float))
    return ll


# ---------------------------------------------------------------------------
# Willingness to pay
# ---------------------------------------------------------------------------

def wtp(est: EstimationResult, price_name: str,
        target_names: list[str]) -> WtpResult:
    """Willingness to pay of each target level relative to its base level.

    WTP_k = -beta_k / beta_price, with the delta-method variance
    Var_k/bp^2 + bk^2 Var_p/bp^4 - 2 bk Cov_kp/bp^3 and a 1.96-sigma CI.
    """
    names = list(est.coefficients.names)
    if price_name not in names:
        raise InvalidInputError(f"unknown price coefficient '{price_name}'")
    if not target_names:
        raise InvalidInputError("no WTP targets given")
    p_idx = names.index(price_name)
    bp = float(est.coefficients.beta[p_idx])
    if abs(bp) < 1e-12:
        raise InvalidInputError(
            "price coefficient is numerically zero; WTP is undefined"
        )
    entries = []
    for name in target_names:
        if name == price_name:
            raise InvalidInputError("the price coefficient cannot be a WTP target")
        if name not in names:
            raise InvalidInputError(f"unknown WTP target '{name}'")
        k_idx = names.index(name)
        bk = float(est.coefficients.beta[k_idx])
        var_k = float(est.vcov[k_idx, k_idx])
        var_p = float(est.vcov[p_idx, p_idx])
        cov_kp = float(est.vcov[k_idx, p_idx])
        point = -bk / bp
        variance = (var_k / bp**2 + bk**2 * var_p / bp**4
                    - 2.0 * bk * cov_kp / bp**3)
        se = float(np.sqrt(max(variance, 0.0)))
        entries.append(WtpEntry(
            name=name, estimate=point, std_error=se,
            ci_low=point - Z_95 * se, ci_high=point + Z_95 * se,
        ))
    return WtpResult(price_name=price_name, entries=entries)


def coefficient_plot_data(est: EstimationResult) -> list[tuple[str, float, float, float]]:
    """(name, estimate, ci_low, ci_high) per coefficient, in model order."""
    out = []
    for name, b, se in zip(est.coefficients.names, est.coefficients.beta,
                           est.std_errors):
        out.append((name, float(b), float(b - Z_95 * se), float(b + Z_95 * se)))
    return out
