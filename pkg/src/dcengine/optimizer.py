"""Seeded coordinate-exchange search for D- and DB-efficient designs.

The search walks every (set, alternative, attribute) coordinate in a fixed
lexicographic order, tries each level of that attribute, and accepts a
swap only when it improves the criterion by more than the tolerance and
does not duplicate another alternative in the same set. Multiple random
starts guard against local optima; everything is deterministic given the
settings seed.

The Bayesian criterion reuses one fixed prior-draw matrix per run so the
objective is a fixed function of the design and accepted exchanges are
exactly monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    CodedDesign,
    CodingMap,
    DesignSettings,
    d_error_from_information,
    draw_priors,
    dummy_code,
    set_information,
    validate_settings,
)
from .errors import DegenerateDesignSpaceError, InvalidInputError


@dataclass(frozen=True)
class OptimizerConfig:
    n_starts: int = 5
    max_passes: int = 20
    improvement_tolerance: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1 or self.max_passes < 1:
            raise InvalidInputError("n_starts and max_passes must be at least 1")
        if self.improvement_tolerance <= 0:
            raise InvalidInputError("improvement_tolerance must be positive")


@dataclass
class OptimResult:
    design: CodedDesign
    criterion_value: float
    criterion_kind: str  # "d" or "db"
    passes_used: int
    start_index: int
    error_trace: list[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Level-array representation
# ---------------------------------------------------------------------------
# Internally a candidate design is an (S, J, A) integer array of level
# indices; coding to the dummy matrix happens on demand.

def _code_row(levels_row: np.ndarray, coding: CodingMap) -> np.ndarray:
    x = np.zeros(coding.n_params)
    for a, l in enumerate(levels_row):
        if l > 0:
            x[coding.column_of[(a, int(l))]] = 1.0
    return x


def _code_set(set_levels: np.ndarray, coding: CodingMap, opt_out: bool) -> np.ndarray:
    rows = [_code_row(r, coding) for r in set_levels]
    if opt_out:
        rows.append(np.zeros(coding.n_params))
    return np.stack(rows)


def coded_design_from_levels(settings: DesignSettings, levels: np.ndarray) -> CodedDesign:
    """Materialize the dummy-coded design for an (S, J, A) level array."""
    coding = dummy_code(settings)
    j_total = settings.n_alts + (1 if settings.opt_out else 0)
    matrix = np.concatenate(
        [_code_set(levels[s], coding, settings.opt_out) for s in range(settings.n_sets)]
    )
    set_index = np.repeat(np.arange(1, settings.n_sets + 1), j_total)
    alt_index = np.tile(np.arange(1, j_total + 1), settings.n_sets)
    return CodedDesign(
        column_names=list(coding.column_names),
        levels_per_attribute=list(coding.levels_per_attribute),
        matrix=matrix,
        set_index=set_index,
        alt_index=alt_index,
        n_sets=settings.n_sets,
        alts_per_set=j_total,
        opt_out=settings.opt_out,
    )


def _random_levels(settings: DesignSettings, rng: np.random.Generator) -> np.ndarray:
    """Uniform random level assignment with no duplicate alternatives per set.

    Duplicates are resampled up to 1000 times; after that one attribute of
    the duplicate is cycled to the next level, which always terminates
    because n_alts never exceeds the full factorial.
    """
    counts = settings.level_counts
    s_count, j_count, a_count = settings.n_sets, settings.n_alts, len(counts)
    levels = np.empty((s_count, j_count, a_count), dtype=int)
    for s in range(s_count):
        for j in range(j_count):
            levels[s, j] = [rng.integers(c) for c in counts]
        attempts = 0
        while True:
            dup = _first_duplicate(levels[s])
            if dup is None:
                break
            if attempts < 1000:
                levels[s, dup] = [rng.integers(c) for c in counts]
                attempts += 1
            else:
                for a in range(a_count):
                    levels[s, dup, a] = (levels[s, dup, a] + 1) % counts[a]
                    if _first_duplicate(levels[s]) is None:
                        break
    return levels


def _first_duplicate(set_levels: np.ndarray) -> int | None:
    seen = {}
    for j, row in enumerate(map(tuple, set_levels)):
        if row in seen:
            return j
        seen[row] = j
    return None


def random_initial_design(settings: DesignSettings, rng: np.random.Generator) -> CodedDesign:
    """A uniformly random valid starting design."""
    return coded_design_from_levels(settings, _random_levels(settings, rng))


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

class _Criterion:
    """Incremental D/DB criterion over cached per-set information blocks."""

    def __init__(self, coded_sets: list[np.ndarray], betas: np.ndarray):
        self.betas = betas
        self.per_set = [set_information(x, betas) for x in coded_sets]
        self.total = np.sum(self.per_set, axis=0)

    def value(self) -> float:
        return float(np.mean(d_error_from_information(self.total)))

    def try_replace(self, s: int, new_rows: np.ndarray) -> tuple[float, np.ndarray]:
        """Criterion value if set ``s`` were replaced; no state change."""
        info = set_information(new_rows, self.betas)
        return float(np.mean(d_error_from_information(self.total - self.per_set[s] + info))), info

    def replace(self, s: int, info: np.ndarray) -> None:
        self.total = self.total - self.per_set[s] + info
        self.per_set[s] = info


def coordinate_exchange(settings: DesignSettings,
                        config: OptimizerConfig | None = None) -> OptimResult:
    """Multi-start coordinate exchange minimizing the D- or DB-error.

    The criterion is the D-error at the prior mean when
    ``settings.bayesian`` is false, otherwise the DB-error over one fixed
    draw matrix seeded from ``settings.seed``. Deterministic given
    (settings, config).

    Raises:
        InvalidInputError: settings fail validation.
        DegenerateDesignSpaceError: every start ended singular.
    """
    problems = validate_settings(settings)
    if problems:
        raise InvalidInputError("; ".join(problems))
    if config is None:
        config = OptimizerConfig(seed=settings.seed)

    coding = dummy_code(settings)
    counts = settings.level_counts
    if settings.bayesian:
        betas = draw_priors(settings.priors, settings.seed)
        kind = "db"
    else:
        betas = settings.priors.mean[None, :]
        kind = "d"

    best: OptimResult | None = None
    for start in range(config.n_starts):
        rng = np.random.default_rng([config.seed, start])
        levels = _random_levels(settings, rng)
        coded_sets = [_code_set(levels[s], coding, settings.opt_out)
                      for s in range(settings.n_sets)]
        criterion = _Criterion(coded_sets, betas)
        current = criterion.value()
        trace = [current]
        passes = 0
        for _ in range(config.max_passes):
            passes += 1
            changed = False
            for s in range(settings.n_sets):
                for j in range(settings.n_alts):
                    for a in range(len(counts)):
                        incumbent = levels[s, j, a]
                        best_level, best_value, best_info = incumbent, current, None
                        for lv in range(counts[a]):
                            if lv == incumbent:
                                continue
                            levels[s, j, a] = lv
                            if _first_duplicate(levels[s]) is not None:
                                continue
                            rows = _code_set(levels[s], coding, settings.opt_out)
                            value, info = criterion.try_replace(s, rows)
                            if value < best_value - config.improvement_tolerance:
                                best_level, best_value, best_info = lv, value, info
                        levels[s, j, a] = best_level
                        if best_info is not None:
                            criterion.replace(s, best_info)
                            current = best_value
                            trace.append(current)
                            changed = True
            if not changed:
                break
        result = OptimResult(
            design=coded_design_from_levels(settings, levels),
            criterion_value=current,
            criterion_kind=kind,
            passes_used=passes,
            start_index=start,
            error_trace=trace,
        )
        if best is None or (result.criterion_value, result.start_index) < (
            best.criterion_value, best.start_index
        ):
            best = result
    if not np.isfinite(best.criterion_value):
        raise DegenerateDesignSpaceError(
            "every start produced a singular information matrix; "
            "add choice sets or reduce the number of parameters"
        )
    return best


def generate_design(settings: DesignSettings) -> OptimResult:
    """Coordinate exchange with the default configuration, seeded from the settings."""
    return coordinate_exchange(settings, OptimizerConfig(seed=settings.seed))
