"""Core choice-model math.

Attribute dummy coding, multinomial logit probabilities, Fisher
information, D-error and Bayesian DB-error, seeded prior draws, settings
validation, and synthetic choice simulation. Everything here is a pure
function of its inputs (seeds included), so concurrent use is safe.

Conventions
-----------
- Dummy coding omits the FIRST listed level of each attribute (the base),
  giving K = sum(L_a - 1) columns named ``attribute.level``.
- An opt-out alternative is an all-zero coded row appended to each choice
  set; it carries no parameter of its own.
- Singular information matrices yield a D-error of ``+inf`` rather than an
  exception: such designs are maximally bad, not fatal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .dataset import ResponseDataset
from .errors import InvalidInputError

SYMMETRY_TOL = 1e-10
DETERMINANT_CUTOFF = 1e-300


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AttributeSpec:
    """One attribute with its ordered level labels (first label = base level)."""

    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))

    def check(self) -> list[str]:
        problems = []
        if not self.name:
            problems.append("attribute name must be non-empty")
        if len(self.levels) < 2:
            problems.append(f"attribute '{self.name}' needs at least 2 levels")
        if any(not lv for lv in self.levels):
            problems.append(f"attribute '{self.name}' has an empty level label")
        if len(set(self.levels)) != len(self.levels):
            problems.append(f"attribute '{self.name}' has duplicate level labels")
        return problems


@dataclass(frozen=True)
class PriorSpec:
    """Prior on the coefficient vector used for (Bayesian) design evaluation.

    ``mean`` has length K; ``covariance`` is K x K symmetric PSD. ``n_draws``
    controls the Monte Carlo size of the DB-error.
    """

    mean: np.ndarray
    covariance: np.ndarray
    n_draws: int = 100
    draw_seed_offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "covariance", np.asarray(self.covariance, dtype=float))

    @staticmethod
    def default(n_params: int) -> "PriorSpec":
        """Zero mean, identity covariance."""
        return PriorSpec(mean=np.zeros(n_params), covariance=np.eye(n_params))

    def check(self, n_params: int | None = None) -> list[str]:
        problems = []
        mean = self.mean
        cov = self.covariance
        if mean.ndim != 1:
            problems.append("prior mean must be a vector")
            return problems
        k = len(mean)
        if n_params is not None and k != n_params:
            problems.append(
                f"prior mean has length {k} but the design has {n_params} parameters"
            )
        if cov.shape != (k, k):
            problems.append(f"prior covariance must be {k}x{k}, got {cov.shape}")
        elif not np.allclose(cov, cov.T, atol=SYMMETRY_TOL):
            problems.append("prior covariance is not symmetric")
        if self.n_draws < 1:
            problems.append("n_draws must be at least 1")
        return problems


@dataclass(frozen=True)
class DesignSettings:
    """Everything needed to generate a design: attributes, set shape, priors, seed."""

    attributes: tuple[AttributeSpec, ...]
    n_alts: int
    n_sets: int
    opt_out: bool = False
    bayesian: bool = False
    priors: PriorSpec | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if self.priors is None and self.attributes:
            object.__setattr__(self, "priors", PriorSpec.default(self.n_params))

    @property
    def level_counts(self) -> list[int]:
        return [len(a.levels) for a in self.attributes]

    @property
    def n_params(self) -> int:
        return sum(len(a.levels) - 1 for a in self.attributes)


@dataclass(frozen=True)
class Coefficients:
    """Named coefficient vector over the coded columns."""

    names: tuple[str, ...]
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        beta = np.asarray(self.beta, dtype=float)
        object.__setattr__(self, "beta", beta)
        if len(self.names) != len(beta):
            raise InvalidInputError(
                f"{len(self.names)} names but {len(beta)} coefficients"
            )


@dataclass
class CodedDesign:
    """A dummy-coded design matrix with set/alternative indexing.

    ``matrix`` stacks one row per (set, alternative); rows are grouped by
    set in ascending set order, alternatives in ascending order within a
    set. When ``opt_out`` is true the last alternative of each set is the
    all-zero opt-out row and ``alts_per_set`` includes it.
    """

    column_names: list[str]
    levels_per_attribute: list[int]
    matrix: np.ndarray
    set_index: np.ndarray
    alt_index: np.ndarray
    n_sets: int
    alts_per_set: int
    opt_out: bool

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.set_index = np.asarray(self.set_index, dtype=int)
        self.alt_index = np.asarray(self.alt_index, dtype=int)

    @property
    def n_params(self) -> int:
        return len(self.column_names)

    @property
    def n_coded_alts(self) -> int:
        """Alternatives per set excluding the opt-out row."""
        return self.alts_per_set - 1 if self.opt_out else self.alts_per_set

    def rows_for_set(self, s: int) -> np.ndarray:
        """All coded rows of set ``s`` (1-based), opt-out included."""
        return self.matrix[self.set_index == s]

    def attribute_column_slices(self) -> list[slice]:
        """Contiguous column block of each attribute, in attribute order."""
        slices = []
        offset = 0
        for levels in self.levels_per_attribute:
            slices.append(slice(offset, offset + levels - 1))
            offset += levels - 1
        return slices

    def check(self) -> list[str]:
        """All violated CodedDesign invariants, empty when valid."""
        problems = []
        k = sum(l - 1 for l in self.levels_per_attribute)
        if len(self.column_names) != k:
            problems.append(
                f"expected {k} columns from the level structure, got {len(self.column_names)}"
            )
        if self.matrix.shape != (self.n_sets * self.alts_per_set, len(self.column_names)):
            problems.append(
                f"matrix shape {self.matrix.shape} does not match "
                f"{self.n_sets} sets x {self.alts_per_set} alternatives"
            )
            return problems
        pairs = list(zip(self.set_index.tolist(), self.alt_index.tolist()))
        expected = [
            (s, j)
            for s in range(1, self.n_sets + 1)
            for j in range(1, self.alts_per_set + 1)
        ]
        if sorted(pairs) != expected:
            problems.append("every (set, alt) pair must appear exactly once")
        if pairs != expected:
            problems.append("rows must be grouped by set in ascending order")
        slices = self.attribute_column_slices()
        for i, row in enumerate(self.matrix):
            is_opt_out = self.opt_out and self.alt_index[i] == self.alts_per_set
            if is_opt_out:
                if np.any(row != 0):
                    problems.append(f"opt-out row {i} is not all-zero")
                continue
            for a, sl in enumerate(slices):
                block = row[sl]
                if not np.all(np.isin(block, (0.0, 1.0))) or block.sum() > 1:
                    problems.append(
                        f"row {i} is not a valid dummy coding for attribute {a}"
                    )
        for s in range(1, self.n_sets + 1):
            mask = self.set_index == s
            if self.opt_out:
                mask = mask & (self.alt_index != self.alts_per_set)
            rows = self.matrix[mask]
            if len(np.unique(rows, axis=0)) != len(rows):
                problems.append(f"set {s} contains duplicate alternatives")
        return problems


@dataclass(frozen=True)
class ChoiceProbabilities:
    """MNL choice probabilities for one choice set."""

    set_index: int
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))


# ---------------------------------------------------------------------------
# Combinatorics and coding
# ---------------------------------------------------------------------------

def count_full_factorial(level_counts: list[int]) -> int:
    """Number of distinct profiles: the product of the level counts."""
    if not level_counts:
        raise InvalidInputError("level_counts must be non-empty")
    if any(c < 2 for c in level_counts):
        raise InvalidInputError("every attribute needs at least 2 levels")
    out = 1
    for c in level_counts:
        out *= c
    return out


def count_unordered_pairs(n_profiles: int) -> int:
    """Number of two-alternative choice sets over ``n_profiles`` profiles."""
    if n_profiles < 2:
        raise InvalidInputError("need at least 2 profiles to form a pair")
    return n_profiles * (n_profiles - 1) // 2


@dataclass(frozen=True)
class CodingMap:
    """Mapping from (attribute, level) to dummy column; base levels map nowhere."""

    column_names: tuple[str, ...]
    levels_per_attribute: tuple[int, ...]
    column_of: dict = field(hash=False, default_factory=dict)  # (attr_idx, level_idx>=1) -> col

    @property
    def n_params(self) -> int:
        return len(self.column_names)


def dummy_code(settings: DesignSettings) -> CodingMap:
    """Build the dummy-coding map for the settings' attributes.

    The first listed level of each attribute is the omitted base; every
    other level gets one column named ``attrName.levelName``.
    """
    names = []
    column_of = {}
    col = 0
    for a, attr in enumerate(settings.attributes):
        for l, level in enumerate(attr.levels):
            if l == 0:
                continue
            names.append(f"{attr.name}.{level}")
            column_of[(a, l)] = col
            col += 1
    return CodingMap(
        column_names=tuple(names),
        levels_per_attribute=tuple(settings.level_counts),
        column_of=column_of,
    )


def validate_settings(settings: DesignSettings) -> list[str]:
    """Every violated settings rule as a message; empty list means ok.

    Never raises: incompatible settings (e.g. too few sets for the number
    of parameters) come back as human-readable messages.
    """
    problems = []
    if len(settings.attributes) < 1:
        problems.append("at least one attribute is required")
        return problems
    for attr in settings.attributes:
        problems.extend(attr.check())
    names = [a.name for a in settings.attributes]
    if len(set(names)) != len(names):
        problems.append("attribute names must be distinct")
    if settings.n_alts < 2:
        problems.append("need at least 2 alternatives per choice set")
    if settings.n_sets < 1:
        problems.append("need at least 1 choice set")
    if problems:
        return problems

    k = settings.n_params
    full = count_full_factorial(settings.level_counts)
    if settings.n_alts > full:
        problems.append(
            f"{settings.n_alts} alternatives per set exceeds the "
            f"full factorial of {full} distinct profiles"
        )
    if settings.n_sets * (settings.n_alts - 1) < k:
        problems.append(
            f"too few sets: {settings.n_sets} sets with {settings.n_alts} "
            f"alternatives identify at most {settings.n_sets * (settings.n_alts - 1)} "
            f"parameters but the design has {k}"
        )
    if settings.priors is not None:
        problems.extend(settings.priors.check(k))
    if settings.seed < 0:
        problems.append("seed must be a non-negative integer")
    return problems


# ---------------------------------------------------------------------------
# MNL probabilities and information
# ---------------------------------------------------------------------------

def softmax(utilities: np.ndarray) -> np.ndarray:
    """Overflow-safe softmax along the last axis."""
    u = np.asarray(utilities, dtype=float)
    m = u.max(axis=-1, keepdims=True)
    e = np.exp(u - m)
    return e / e.sum(axis=-1, keepdims=True)


def mnl_probabilities(set_rows: np.ndarray, beta: Coefficients | np.ndarray,
                      set_index: int = 0) -> ChoiceProbabilities:
    """MNL choice probabilities for one choice set.

    Args:
        set_rows: (J, K) coded rows of the set.
        beta: coefficient vector of length K.
    """
    b = beta.beta if isinstance(beta, Coefficients) else np.asarray(beta, dtype=float)
    rows = np.asarray(set_rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise InvalidInputError("a choice set needs at least 2 alternatives")
    if rows.shape[1] != len(b):
        raise InvalidInputError(
            f"coded rows have {rows.shape[1]} columns but beta has {len(b)}"
        )
    return ChoiceProbabilities(set_index=set_index, probs=softmax(rows @ b))


def set_information(set_rows: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Fisher information contribution of one choice set, batched over betas.

    Args:
        set_rows: (J, K) coded rows.
        betas: (R, K) coefficient draws.

    Returns:
        (R, K, K) array: X' (diag(p_r) - p_r p_r') X per draw.
    """
    X = np.asarray(set_rows, dtype=float)
    B = np.atleast_2d(np.asarray(betas, dtype=float))
    P = softmax(B @ X.T)  # (R, J)
    PX = P @ X  # (R, K)
    term1 = np.einsum("rj,jk,jl->rkl", P, X, X, optimize=True)
    return term1 - PX[:, :, None] * PX[:, None, :]


def fisher_information(design: CodedDesign, beta: Coefficients | np.ndarray) -> np.ndarray:
    """MNL Fisher information M = sum_s X_s' (diag(p_s) - p_s p_s') X_s."""
    b = beta.beta if isinstance(beta, Coefficients) else np.asarray(beta, dtype=float)
    if len(b) != design.n_params:
        raise InvalidInputError(
            f"beta has length {len(b)} but the design has {design.n_params} parameters"
        )
    m = np.zeros((design.n_params, design.n_params))
    for s in range(1, design.n_sets + 1):
        m += set_information(design.rows_for_set(s), b[None, :])[0]
    return m


def d_error_from_information(info: np.ndarray) -> np.ndarray:
    """det(M)^(-1/K) per information matrix; +inf for (near-)singular M.

    Accepts a single (K, K) matrix or an (R, K, K) batch.
    """
    m = np.asarray(info, dtype=float)
    single = m.ndim == 2
    if single:
        m = m[None, :, :]
    k = m.shape[-1]
    det = np.linalg.det(m)
    out = np.full(len(det), np.inf)
    ok = np.isfinite(det) & (det > DETERMINANT_CUTOFF)
    out[ok] = det[ok] ** (-1.0 / k)
    return out[0] if single else out


def d_error(design: CodedDesign, beta: Coefficients | np.ndarray) -> float:
    """D-error of the design at ``beta``; lower is better, +inf if singular."""
    return float(d_error_from_information(fisher_information(design, beta)))


def draw_priors(prior: PriorSpec, seed: int) -> np.ndarray:
    """R draws from N(mean, covariance), deterministic given (prior, seed).

    Uses Cholesky when the covariance is positive definite and an
    eigendecomposition fallback for PSD-but-singular matrices.
    """
    problems = prior.check()
    if problems:
        raise InvalidInputError("; ".join(problems))
    cov = prior.covariance
    k = len(prior.mean)
    eigvals = np.linalg.eigvalsh(cov)
    if eigvals.min() < -1e-8:
        raise InvalidInputError("prior covariance is not positive semi-definite")
    try:
        root = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(cov)
        root = vecs * np.sqrt(np.clip(vals, 0.0, None))
    rng = np.random.default_rng(seed + prior.draw_seed_offset)
    z = rng.standard_normal((prior.n_draws, k))
    return prior.mean + z @ root.T


def db_error(design: CodedDesign, prior: PriorSpec, seed: int) -> float:
    """Bayesian DB-error: the mean D-error over prior draws.

    With a zero covariance this reduces exactly to the D-error at the
    prior mean. Returns +inf if any draw yields a singular design.
    """
    betas = draw_priors(prior, seed)
    info = np.zeros((len(betas), design.n_params, design.n_params))
    for s in range(1, design.n_sets + 1):
        info += set_information(design.rows_for_set(s), betas)
    return float(np.mean(d_error_from_information(info)))


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def simulate_choices(design: CodedDesign, true_beta: Coefficients | np.ndarray,
                     n_respondents: int, seed: int) -> ResponseDataset:
    """Sample synthetic respondents answering every set of the design.

    Each respondent answers each set independently with MNL probabilities
    at ``true_beta``. Task identifiers follow
    ``gid = respondent_index * n_sets + set_index`` (respondent index
    0-based, set index 1-based).
    """
    if n_respondents < 1:
        raise InvalidInputError("n_respondents must be at least 1")
    b = true_beta.beta if isinstance(true_beta, Coefficients) else np.asarray(true_beta, dtype=float)
    if len(b) != design.n_params:
        raise InvalidInputError(
            f"beta has length {len(b)} but the design has {design.n_params} parameters"
        )
    rng = np.random.default_rng(seed)
    s_count, j_count = design.n_sets, design.alts_per_set
    probs = np.stack(
        [softmax(design.rows_for_set(s) @ b) for s in range(1, s_count + 1)]
    )  # (S, J)
    cum = probs.cumsum(axis=1)
    # (n, S): index of the sampled alternative per respondent and set
    u = rng.random((n_respondents, s_count))
    chosen = np.empty((n_respondents, s_count), dtype=int)
    for s in range(s_count):
        chosen[:, s] = np.searchsorted(cum[s], u[:, s])
    chosen = np.clip(chosen, 0, j_count - 1)

    n_rows = n_respondents * s_count * j_count
    resp = np.repeat(np.arange(1, n_respondents + 1), s_count * j_count)
    sets = np.tile(np.repeat(np.arange(1, s_count + 1), j_count), n_respondents)
    alts = np.tile(np.arange(1, j_count + 1), n_respondents * s_count)
    gid = (resp - 1) * s_count + sets
    choice = np.zeros(n_rows, dtype=int)
    flat_choice_idx = (np.arange(n_respondents * s_count) * j_count
                       + chosen.reshape(-1))
    choice[flat_choice_idx] = 1

    covariates = np.tile(design.matrix, (n_respondents, 1))
    frame = pd.DataFrame({"gid": gid, "respondent": resp, "alt": alts, "choice": choice})
    for i, name in enumerate(design.column_names):
        frame[name] = covariates[:, i]
    return ResponseDataset(frame=frame, covariates=list(design.column_names))
