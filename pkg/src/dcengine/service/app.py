"""HTTP/JSON facade over the design, survey, and estimation modules.

State lives in a file-backed store (one JSON document per design/survey,
written atomically), so killing and restarting the process reproduces the
same responses. All randomness is seeded from request bodies; nothing
depends on wall-clock or process identity.
"""

from __future__ import annotations

import json
import threading
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .. import codec
from ..codec import DecodedChoiceSet
from ..core import validate_settings
from ..dataset import ResponseDataset
from ..errors import (
    DCEError,
    DegenerateDesignSpaceError,
    EstimationError,
    InvalidInputError,
    SchemaError,
    SurveyStateError,
)
from ..estimation import (
    coefficient_plot_data,
    fit_conditional_logit,
    recode_price_continuous,
    wtp,
)
from ..optimizer import generate_design
from ..serial import SerialMode, Survey, SurveyDefinition
from ..serialize import settings_from_dict, settings_to_dict
from .schemas import (
    AlternativeOut,
    AnswerRequest,
    AnswerResponse,
    ChoiceSetOut,
    CoefficientOut,
    DesignCreateRequest,
    DesignSummary,
    EstimationOut,
    EstimationRequest,
    JobStatus,
    SerialModeIn,
    SessionStartResponse,
    SessionStateResponse,
    SurveyCreateRequest,
    SurveySummary,
    WtpEntryOut,
    WtpOut,
    WtpRequest,
)
from .storage import Store


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _choice_set_out(decoded: DecodedChoiceSet, total_sets: int) -> ChoiceSetOut:
    return ChoiceSetOut(
        set_index=decoded.set_index,
        total_sets=total_sets,
        alternatives=[
            AlternativeOut(
                label=label,
                attributes=[{"name": a, "level": l} for a, l in pairs],
            )
            for label, pairs in decoded.alternatives
        ],
    )


def _estimation_out(est) -> EstimationOut:
    plot = coefficient_plot_data(est)
    return EstimationOut(
        coefficients=[
            CoefficientOut(
                name=name,
                estimate=float(b),
                std_error=float(se),
                z_value=float(z),
                p_value=float(p),
                ci_low=lo,
                ci_high=hi,
            )
            for (name, b, lo, hi), se, z, p in zip(
                plot, est.std_errors, est.z_values, est.p_values
            )
        ],
        log_likelihood=est.log_likelihood,
        iterations=est.iterations,
        converged=est.converged,
    )


def create_app(data_dir: str | Path = "data", ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="dcengine", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = Store(data_dir)
    surveys: dict[str, Survey] = {}
    locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
    registry_lock = threading.Lock()

    @app.exception_handler(DCEError)
    async def _dce_error(request: Request, exc: DCEError):
        if isinstance(exc, DegenerateDesignSpaceError):
            status = 500
        elif isinstance(exc, SurveyStateError):
            status = 409
        else:
            status = 422
        return Response(
            content=json.dumps({"detail": str(exc)}),
            status_code=status,
            media_type="application/json",
        )

    # -- designs -------------------------------------------------------------

    @app.post("/designs", response_model=DesignSummary, status_code=201)
    def create_design(body: DesignCreateRequest):
        settings = body.settings.to_settings()
        problems = validate_settings(settings)
        if problems:
            raise HTTPException(status_code=422, detail=problems)
        design_id = store.next_id("designs", "dsg")
        job_id = store.next_id("jobs", "job")
        try:
            result = generate_design(settings)
        except DegenerateDesignSpaceError as exc:
            store.save("jobs", job_id, {"job_id": job_id, "status": "failed",
                                        "detail": str(exc)})
            raise
        labeled = codec.label_from_settings(result.design, settings)
        summary = DesignSummary(
            design_id=design_id,
            job_id=job_id,
            criterion_value=result.criterion_value,
            criterion_kind=result.criterion_kind,
            n_params=result.design.n_params,
            n_sets=result.design.n_sets,
            n_alts=settings.n_alts,
            opt_out=settings.opt_out,
            passes_used=result.passes_used,
            start_index=result.start_index,
        )
        doc = {
            "design_id": design_id,
            "created_at": _now(),
            "settings": settings_to_dict(settings),
            "summary": summary.model_dump(),
            "design": json.loads(codec.export_design(
                labeled, "json",
                metadata={"criterion_value": result.criterion_value,
                          "criterion_kind": result.criterion_kind,
                          "passes_used": result.passes_used,
                          "start_index": result.start_index},
            )),
        }
        store.save("designs", design_id, doc)
        store.save("jobs", job_id, {"job_id": job_id, "status": "done",
                                    "result_id": design_id})
        return summary

    def _load_design_doc(design_id: str) -> dict:
        doc = store.load("designs", design_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"no design '{design_id}'")
        return doc

    @app.get("/designs")
    def list_designs():
        return {"designs": store.list_ids("designs")}

    @app.get("/designs/{design_id}")
    def get_design(design_id: str, view: str = "labeled", format: str = "json",
                   request: Request = None):
        doc = _load_design_doc(design_id)
        labeled = codec.import_design(json.dumps(doc["design"]), "json")
        if view == "coded":
            if format == "csv":
                return Response(
                    content=codec.export_design(labeled, "csv"),
                    media_type="text/csv",
                    headers={"Content-Disposition":
                             f'attachment; filename="{design_id}.csv"'},
                )
            return doc["design"]
        if view == "labeled":
            return doc
        if view == "decoded":
            decoded = codec.decode_design(labeled)
            accept = request.headers.get("accept", "") if request else ""
            if format == "text" or "text/plain" in accept:
                return PlainTextResponse(codec.decoded_to_text(decoded))
            total = labeled.coded.n_sets
            return {
                "design_id": design_id,
                "sets": [_choice_set_out(d, total).model_dump() for d in decoded],
            }
        raise HTTPException(status_code=422,
                            detail="view must be coded, labeled, or decoded")

    @app.get("/jobs/{job_id}", response_model=JobStatus)
    def get_job(job_id: str):
        doc = store.load("jobs", job_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"no job '{job_id}'")
        return JobStatus(**doc)

    # -- surveys -------------------------------------------------------------

    def _get_survey(survey_id: str) -> Survey:
        with registry_lock:
            if survey_id in surveys:
                return surveys[survey_id]
        doc = store.load("surveys", survey_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"no survey '{survey_id}'")
        survey = Survey.from_dict(doc["state"])
        with registry_lock:
            surveys.setdefault(survey_id, survey)
            return surveys[survey_id]

    def _persist_survey(survey_id: str, survey: Survey, design_id: str) -> None:
        store.save("surveys", survey_id, {
            "survey_id": survey_id,
            "design_id": design_id,
            "updated_at": _now(),
            "state": survey.to_dict(),
        })

    def _survey_design_id(survey_id: str) -> str:
        doc = store.load("surveys", survey_id)
        return doc["design_id"] if doc else ""

    @app.post("/surveys", response_model=SurveySummary, status_code=201)
    def create_survey(body: SurveyCreateRequest):
        design_doc = _load_design_doc(body.design_id)
        labeled = codec.import_design(json.dumps(design_doc["design"]), "json")
        settings = settings_from_dict(design_doc["settings"])
        definition = SurveyDefinition(
            design=labeled,
            settings=settings,
            intro_text=body.intro_text,
            final_text=body.final_text,
            alternative_labels=body.alternative_labels or [],
            serial_mode=SerialMode(kind=body.serial_mode.kind,
                                   batch_size=body.serial_mode.batch_size),
            regen_draws=body.regen_draws,
        )
        survey = Survey(definition)
        survey_id = store.next_id("surveys", "svy")
        with registry_lock:
            surveys[survey_id] = survey
        _persist_survey(survey_id, survey, body.design_id)
        return _survey_summary(survey_id, survey, body.design_id)

    def _survey_summary(survey_id: str, survey: Survey, design_id: str) -> SurveySummary:
        return SurveySummary(
            survey_id=survey_id,
            design_id=design_id,
            closed=survey.closed,
            completed_respondents=survey.completed_respondents,
            design_version=len(survey.design_history) - 1,
            serial_mode=SerialModeIn(
                kind=survey.definition.serial_mode.kind,
                batch_size=survey.definition.serial_mode.batch_size,
            ),
            n_sets=survey.n_sets,
            regeneration_log=survey.regeneration_log,
        )

    @app.get("/surveys/{survey_id}", response_model=SurveySummary)
    def get_survey(survey_id: str):
        survey = _get_survey(survey_id)
        return _survey_summary(survey_id, survey, _survey_design_id(survey_id))

    @app.post("/surveys/{survey_id}/sessions", response_model=SessionStartResponse,
              status_code=201)
    def start_session(survey_id: str):
        survey = _get_survey(survey_id)
        with locks[survey_id]:
            session_id, first_set, intro = survey.start_session()
            session = survey.sessions[session_id]
            _persist_survey(survey_id, survey, _survey_design_id(survey_id))
        return SessionStartResponse(
            session_id=f"{survey_id}.{session_id}",
            respondent_id=session.respondent_id,
            design_version=session.design_version,
            intro_text=intro,
            choice_set=_choice_set_out(first_set, survey.n_sets),
        )

    @app.get("/sessions/{session_token}", response_model=SessionStateResponse)
    def session_state(session_token: str):
        if "." not in session_token:
            raise HTTPException(status_code=404, detail="unknown session")
        survey_id, session_id = session_token.split(".", 1)
        survey = _get_survey(survey_id)
        if session_id not in survey.sessions:
            raise HTTPException(status_code=404, detail="unknown session")
        session, next_set = survey.session_state(session_id)
        return SessionStateResponse(
            session_id=session_token,
            respondent_id=session.respondent_id,
            design_version=session.design_version,
            completed=session.completed,
            total_sets=survey.n_sets,
            intro_text=survey.definition.intro_text,
            final_text=(survey.definition.final_text if session.completed else None),
            choice_set=(_choice_set_out(next_set, survey.n_sets)
                        if next_set else None),
        )

    @app.post("/sessions/{session_token}/answers", response_model=AnswerResponse)
    def submit_answer(session_token: str, body: AnswerRequest):
        if "." not in session_token:
            raise HTTPException(status_code=404, detail="unknown session")
        survey_id, session_id = session_token.split(".", 1)
        survey = _get_survey(survey_id)
        if session_id not in survey.sessions:
            raise HTTPException(status_code=404, detail="unknown session")
        with locks[survey_id]:
            outcome = survey.submit_answer(session_id, body.choice)
            _persist_survey(survey_id, survey, _survey_design_id(survey_id))
        return AnswerResponse(
            completed=outcome.completed,
            choice_set=(_choice_set_out(outcome.next_set, survey.n_sets)
                        if outcome.next_set else None),
            final_text=outcome.final_text,
            design_regenerated=outcome.design_regenerated,
        )

    @app.post("/surveys/{survey_id}/close", response_model=SurveySummary)
    def close_survey(survey_id: str):
        survey = _get_survey(survey_id)
        with locks[survey_id]:
            survey.close_survey()
            _persist_survey(survey_id, survey, _survey_design_id(survey_id))
        return _survey_summary(survey_id, survey, _survey_design_id(survey_id))

    @app.get("/surveys/{survey_id}/responses")
    def survey_responses(survey_id: str):
        survey = _get_survey(survey_id)
        return Response(
            content=survey.responses().to_csv(),
            media_type="text/csv",
            headers={"Content-Disposition":
                     f'attachment; filename="{survey_id}-responses.csv"'},
        )

    # -- estimation ----------------------------------------------------------

    def _resolve_dataset(body: EstimationRequest) -> ResponseDataset:
        if body.responses_csv is not None:
            return ResponseDataset.from_csv(body.responses_csv)
        if body.survey_id is not None:
            return _get_survey(body.survey_id).responses()
        raise HTTPException(status_code=422,
                            detail="provide responses_csv or survey_id")

    def _fit(body: EstimationRequest):
        data = _resolve_dataset(body)
        if body.price_recode is not None:
            pr = body.price_recode
            data = recode_price_continuous(data, pr.columns, pr.values, pr.base_value)
        covariates = body.covariates or list(data.covariates)
        return fit_conditional_logit(data, covariates)

    @app.post("/estimations", response_model=EstimationOut)
    def estimate(body: EstimationRequest):
        return _estimation_out(_fit(body))

    @app.post("/wtp", response_model=WtpOut)
    def wtp_endpoint(body: WtpRequest):
        est = _fit(body)
        result = wtp(est, body.price, body.targets)
        return WtpOut(
            price=result.price_name,
            entries=[WtpEntryOut(name=e.name, estimate=e.estimate,
                                 std_error=e.std_error, ci_low=e.ci_low,
                                 ci_high=e.ci_high)
                     for e in result.entries],
            estimation=_estimation_out(est),
        )

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
