"""Long-format choice response data.

One row per (task, alternative); ``gid`` identifies one choice task (one
respondent answering one set), ``choice`` is 1 on the chosen row and 0
elsewhere, and every column after the four bookkeeping columns is a
covariate.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import pandas as pd

from .errors import InvalidInputError

BOOKKEEPING_COLUMNS = ["gid", "respondent", "alt", "choice"]


@dataclass
class ResponseDataset:
    frame: pd.DataFrame
    covariates: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.covariates:
            self.covariates = [
                c for c in self.frame.columns if c not in BOOKKEEPING_COLUMNS
            ]

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def n_tasks(self) -> int:
        return self.frame["gid"].nunique()

    def check(self) -> list[str]:
        """All violated dataset invariants; empty when valid."""
        problems = []
        missing = [c for c in BOOKKEEPING_COLUMNS if c not in self.frame.columns]
        if missing:
            problems.append(f"missing columns: {', '.join(missing)}")
            return problems
        for name in self.covariates:
            if name not in self.frame.columns:
                problems.append(f"covariate column '{name}' not present")
        if not self.frame["choice"].isin([0, 1]).all():
            problems.append("choice must be 0 or 1")
        if len(self.frame):
            by_task = self.frame.groupby("gid")
            sizes = by_task.size()
            if (sizes < 2).any():
                bad = sizes[sizes < 2].index.tolist()
                problems.append(f"tasks with fewer than 2 alternatives: {bad[:5]}")
            chosen = by_task["choice"].sum()
            if (chosen != 1).any():
                bad = chosen[chosen != 1].index.tolist()
                problems.append(f"tasks without exactly one choice: {bad[:5]}")
        return problems

    def validate(self) -> "ResponseDataset":
        problems = self.check()
        if problems:
            raise InvalidInputError("; ".join(problems))
        return self

    def to_csv(self) -> str:
        columns = BOOKKEEPING_COLUMNS + self.covariates
        return self.frame[columns].to_csv(index=False)

    @staticmethod
    def from_csv(text: str | bytes) -> "ResponseDataset":
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        try:
            frame = pd.read_csv(io.StringIO(text))
        except Exception as exc:
            raise InvalidInputError(f"could not parse responses CSV: {exc}") from exc
        missing = [c for c in BOOKKEEPING_COLUMNS if c not in frame.columns]
        if missing:
            raise InvalidInputError(
                f"responses CSV is missing columns: {', '.join(missing)}"
            )
        return ResponseDataset(frame=frame)

    @staticmethod
    def empty(covariates: list[str]) -> "ResponseDataset":
        frame = pd.DataFrame(
            {c: pd.Series(dtype=float) for c in BOOKKEEPING_COLUMNS + list(covariates)}
        )
        frame["gid"] = frame["gid"].astype(int)
        return ResponseDataset(frame=frame, covariates=list(covariates))
