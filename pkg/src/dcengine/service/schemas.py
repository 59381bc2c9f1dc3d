"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..core import AttributeSpec, DesignSettings, PriorSpec


class AttributeIn(BaseModel):
    name: str
    levels: list[str] = Field(min_length=1)


class PriorIn(BaseModel):
    mean: list[float]
    covariance: Optional[list[list[float]]] = None  # defaults to identity
    n_draws: int = 100
    draw_seed_offset: int = 0


class DesignSettingsIn(BaseModel):
    attributes: list[AttributeIn] = Field(min_length=1)
    n_alts: int = 2
    n_sets: int
    opt_out: bool = False
    bayesian: bool = False
    priors: Optional[PriorIn] = None
    seed: int = 0

    def to_settings(self) -> DesignSettings:
        priors = None
        if self.priors is not None:
            mean = np.asarray(self.priors.mean, dtype=float)
            cov = (np.asarray(self.priors.covariance, dtype=float)
                   if self.priors.covariance is not None else np.eye(len(mean)))
            priors = PriorSpec(mean=mean, covariance=cov,
                               n_draws=self.priors.n_draws,
                               draw_seed_offset=self.priors.draw_seed_offset)
        return DesignSettings(
            attributes=tuple(
                AttributeSpec(name=a.name, levels=tuple(a.levels))
                for a in self.attributes
            ),
            n_alts=self.n_alts,
            n_sets=self.n_sets,
            opt_out=self.opt_out,
            bayesian=self.bayesian,
            priors=priors,
            seed=self.seed,
        )


class DesignCreateRequest(BaseModel):
    settings: DesignSettingsIn


class DesignSummary(BaseModel):
    design_id: str
    job_id: str
    criterion_value: float
    criterion_kind: Literal["d", "db"]
    n_params: int
    n_sets: int
    n_alts: int
    opt_out: bool
    passes_used: int
    start_index: int


class JobStatus(BaseModel):
    job_id: str
    status: Literal["done", "failed"]
    result_id: Optional[str] = None
    detail: Optional[str] = None


class SerialModeIn(BaseModel):
    kind: Literal["none", "per_respondent", "per_batch"] = "none"
    batch_size: int = 5


class SurveyCreateRequest(BaseModel):
    design_id: str
    intro_text: str = ""
    final_text: str = ""
    alternative_labels: Optional[list[str]] = None
    serial_mode: SerialModeIn = SerialModeIn()
    regen_draws: int = 30


class SurveySummary(BaseModel):
    survey_id: str
    design_id: str
    closed: bool
    completed_respondents: int
    design_version: int
    serial_mode: SerialModeIn
    n_sets: int
    regeneration_log: list[str] = []


class AlternativeOut(BaseModel):
    label: str
    attributes: list[dict[str, str]]  # [{"name": ..., "level": ...}]


class ChoiceSetOut(BaseModel):
    set_index: int
    total_sets: int
    alternatives: list[AlternativeOut]


class SessionStartResponse(BaseModel):
    session_id: str
    respondent_id: int
    design_version: int
    intro_text: str
    choice_set: ChoiceSetOut


class SessionStateResponse(BaseModel):
    session_id: str
    respondent_id: int
    design_version: int
    completed: bool
    total_sets: int
    intro_text: str
    final_text: Optional[str] = None
    choice_set: Optional["ChoiceSetOut"] = None


class AnswerRequest(BaseModel):
    choice: int  # 1-based alternative index


class AnswerResponse(BaseModel):
    completed: bool
    choice_set: Optional[ChoiceSetOut] = None
    final_text: Optional[str] = None
    design_regenerated: bool = False


class PriceRecodeIn(BaseModel):
    columns: list[str]
    values: dict[str, float]
    base_value: float


class EstimationRequest(BaseModel):
    survey_id: Optional[str] = None
    responses_csv: Optional[str] = None
    covariates: Optional[list[str]] = None  # default: every covariate column
    price_recode: Optional[PriceRecodeIn] = None


class CoefficientOut(BaseModel):
    name: str
    estimate: float
    std_error: float
    z_value: float
    p_value: float
    ci_low: float
    ci_high: float


class EstimationOut(BaseModel):
    coefficients: list[CoefficientOut]
    log_likelihood: float
    iterations: int
    converged: bool


class WtpRequest(EstimationRequest):
    price: str
    targets: list[str]


class WtpEntryOut(BaseModel):
    name: str
    estimate: float
    std_error: float
    ci_low: float
    ci_high: float


class WtpOut(BaseModel):
    price: str
    entries: list[WtpEntryOut]
    estimation: EstimationOut
