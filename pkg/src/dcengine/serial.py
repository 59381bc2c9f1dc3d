"""Live survey orchestration with optional serial design regeneration.

A :class:`Survey` sequences choice tasks per respondent and accumulates
long-format responses. In serial modes it re-fits the conditional logit
on everything collected so far and regenerates the design for subsequent
respondents, either after every completed respondent or after every
batch of B. Respondents always finish on the design they started with;
only new sessions pick up a regenerated design.

Estimation failures during a regeneration trigger never abort the survey:
the old design is kept and the reason logged.
"""

from __future__ import annotations

import dataclasses
import json
import threading
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import codec
from .codec import DecodedChoiceSet, LabeledDesign, decode_design
from .core import DesignSettings, PriorSpec
from .dataset import BOOKKEEPING_COLUMNS, ResponseDataset
from .errors import DCEError, InvalidInputError, SurveyStateError
from .estimation import fit_conditional_logit
from .optimizer import generate_design
from .serialize import prior_from_dict, prior_to_dict, settings_from_dict, settings_to_dict

VCOV_REGULARIZATION = 1e-6

SERIAL_KINDS = ("none", "per_respondent", "per_batch")


@dataclass(frozen=True)
class SerialMode:
    kind: str = "none"
    batch_size: int = 5

    def __post_init__(self):
        if self.kind not in SERIAL_KINDS:
            raise InvalidInputError(
                f"serial mode must be one of {', '.join(SERIAL_KINDS)}"
            )
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be at least 1")


@dataclass
class SurveyDefinition:
    design: LabeledDesign
    settings: DesignSettings
    intro_text: str = ""
    final_text: str = ""
    alternative_labels: list[str] = field(default_factory=list)
    serial_mode: SerialMode = SerialMode()
    # Monte Carlo size of the DB-criterion during live regeneration; kept
    # below the offline default so a survey never stalls between respondents.
    regen_draws: int = 30

    def __post_init__(self):
        if not self.alternative_labels:
            self.alternative_labels = [
                f"Option {j}" for j in range(1, self.design.coded.n_coded_alts + 1)
            ]
            if self.design.coded.opt_out:
                self.alternative_labels.append(codec.DEFAULT_OPT_OUT_LABEL)
        if len(self.alternative_labels) != self.design.coded.alts_per_set:
            raise InvalidInputError(
                f"{len(self.alternative_labels)} alternative labels for "
                f"{self.design.coded.alts_per_set} alternatives per set"
            )


@dataclass
class DesignVersion:
    switched_at: int  # completed respondents when this design was adopted
    design: LabeledDesign
    prior: PriorSpec | None


@dataclass
class Session:
    session_id: str
    respondent_id: int
    design_version: int  # index into design_history
    next_set: int  # 1-based; n_sets + 1 once finished
    completed: bool = False


@dataclass
class AnswerOutcome:
    completed: bool
    next_set: DecodedChoiceSet | None = None
    final_text: str | None = None
    design_regenerated: bool = False


class Survey:
    """Mutable state of one fielded survey.

    Mutations are serialized by an internal lock, so one Survey instance
    can safely back concurrent sessions.
    """

    def __init__(self, definition: SurveyDefinition):
        self.definition = definition
        self.design_history: list[DesignVersion] = [
            DesignVersion(0, definition.design, definition.settings.priors)
        ]
        self.completed_respondents = 0
        self.closed = False
        self.sessions: dict[str, Session] = {}
        self.regeneration_log: list[str] = []
        self._rows: list[dict] = []
        self._next_respondent = 1
        self._next_session = 1
        self._lock = threading.RLock()

    @property
    def current_design(self) -> LabeledDesign:
        return self.design_history[-1].design

    @property
    def n_sets(self) -> int:
        return self.definition.design.coded.n_sets

    # -- session flow -------------------------------------------------------

    def start_session(self) -> tuple[str, DecodedChoiceSet, str]:
        """Open a session for a new respondent and return its first set."""
        with self._lock:
            if self.closed:
                raise SurveyStateError("survey is closed")
            session = Session(
                session_id=f"sess-{self._next_session}",
                respondent_id=self._next_respondent,
                design_version=len(self.design_history) - 1,
                next_set=1,
            )
            self._next_session += 1
            self._next_respondent += 1
            self.sessions[session.session_id] = session
            return (session.session_id, self._decoded_set(session, 1),
                    self.definition.intro_text)

    def submit_answer(self, session_id: str, chosen_alt: int) -> AnswerOutcome:
        """Record one answer (1-based alternative index) and advance.

        After the respondent's last set, the respondent is completed and a
        serial design update may fire; the outcome then carries the final
        text instead of a next set.
        """
        with self._lock:
            if self.closed:
                raise SurveyStateError("survey is closed")
            session = self.sessions.get(session_id)
            if session is None:
                raise InvalidInputError(f"unknown session '{session_id}'")
            if session.completed:
                raise SurveyStateError("this respondent already finished the survey")
            design = self.design_history[session.design_version].design.coded
            if not 1 <= chosen_alt <= design.alts_per_set:
                raise InvalidInputError(
                    f"choice {chosen_alt} out of range 1..{design.alts_per_set}"
                )
            s = session.next_set
            gid = (session.respondent_id - 1) * self.n_sets + s
            rows = design.rows_for_set(s)
            for j in range(1, design.alts_per_set + 1):
                record = {
                    "gid": gid,
                    "respondent": session.respondent_id,
                    "alt": j,
                    "choice": 1 if j == chosen_alt else 0,
                }
                for name, value in zip(design.column_names, rows[j - 1]):
                    record[name] = float(value)
                self._rows.append(record)
            session.next_set += 1
            if session.next_set <= self.n_sets:
                return AnswerOutcome(
                    completed=False, next_set=self._decoded_set(session, session.next_set)
                )
            session.completed = True
            self.completed_respondents += 1
            regenerated = self.maybe_update_design()
            return AnswerOutcome(
                completed=True,
                final_text=self.definition.final_text,
                design_regenerated=regenerated,
            )

    def session_state(self, session_id: str) -> tuple[Session, DecodedChoiceSet | None]:
        """Current progress of a session: the session record plus the next
        choice set still to answer (None once the respondent finished)."""
        with self._lock:
            session = self.sessions.get(session_id)
            if session is None:
                raise InvalidInputError(f"unknown session '{session_id}'")
            next_set = None
            if not session.completed:
                next_set = self._decoded_set(session, session.next_set)
            return session, next_set

    def close_survey(self) -> ResponseDataset:
        """Stop accepting sessions and hand back everything collected."""
        with self._lock:
            self.closed = True
            return self.responses()

    def responses(self) -> ResponseDataset:
        columns = self.definition.design.coded.column_names
        if not self._rows:
            return ResponseDataset.empty(list(columns))
        frame = pd.DataFrame(self._rows)[BOOKKEEPING_COLUMNS + list(columns)]
        return ResponseDataset(frame=frame, covariates=list(columns))

    # -- serial regeneration ------------------------------------------------

    def maybe_update_design(self) -> bool:
        """Regenerate the design if the serial mode's trigger fires.

        Fits the conditional logit on all accumulated responses and, when
        it converges with a PSD covariance, regenerates a Bayesian design
        around the estimates. Any failure keeps the current design.
        """
        mode = self.definition.serial_mode
        if mode.kind == "none":
            return False
        if mode.kind == "per_batch" and self.completed_respondents % mode.batch_size:
            return False
        columns = list(self.definition.design.coded.column_names)
        try:
            est = fit_conditional_logit(self.responses(), columns)
        except DCEError as exc:
            self.regeneration_log.append(
                f"after respondent {self.completed_respondents}: estimation "
                f"failed ({exc}); design kept"
            )
            return False
        if not est.converged:
            self.regeneration_log.append(
                f"after respondent {self.completed_respondents}: fit did not "
                f"converge; design kept"
            )
            return False
        vcov = (est.vcov + est.vcov.T) / 2.0
        if np.linalg.eigvalsh(vcov).min() < -1e-8:
            self.regeneration_log.append(
                f"after respondent {self.completed_respondents}: covariance "
                f"not PSD; design kept"
            )
            return False
        prior = PriorSpec(
            mean=est.coefficients.beta,
            covariance=vcov + VCOV_REGULARIZATION * np.eye(len(columns)),
            n_draws=self.definition.regen_draws,
        )
        settings = dataclasses.replace(
            self.definition.settings,
            bayesian=True,
            priors=prior,
            seed=self.definition.settings.seed + self.completed_respondents,
        )
        try:
            result = generate_design(settings)
        except DCEError as exc:
            self.regeneration_log.append(
                f"after respondent {self.completed_respondents}: regeneration "
                f"failed ({exc}); design kept"
            )
            return False
        labeled = codec.label_design(
            result.design,
            self.definition.design.attribute_names,
            self.definition.design.level_names,
        )
        self.design_history.append(
            DesignVersion(self.completed_respondents, labeled, prior)
        )
        return True

    # -- helpers -------------------------------------------------------------

    def _decoded_set(self, session: Session, s: int) -> DecodedChoiceSet:
        design = self.design_history[session.design_version].design
        return decode_design(design, self.definition.alternative_labels)[s - 1]

    # -- persistence ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "definition": {
                "design": json.loads(
                    codec.export_design(self.definition.design, "json")
                ),
                "settings": settings_to_dict(self.definition.settings),
                "intro_text": self.definition.intro_text,
                "final_text": self.definition.final_text,
                "alternative_labels": self.definition.alternative_labels,
                "serial_mode": {
                    "kind": self.definition.serial_mode.kind,
                    "batch_size": self.definition.serial_mode.batch_size,
                },
                "regen_draws": self.definition.regen_draws,
            },
            "design_history": [
                {
                    "switched_at": v.switched_at,
                    "design": json.loads(codec.export_design(v.design, "json")),
                    "prior": prior_to_dict(v.prior) if v.prior else None,
                }
                for v in self.design_history
            ],
            "completed_respondents": self.completed_respondents,
            "closed": self.closed,
            "regeneration_log": self.regeneration_log,
            "rows": self._rows,
            "next_respondent": self._next_respondent,
            "next_session": self._next_session,
            "sessions": [dataclasses.asdict(s) for s in self.sessions.values()],
        }

    @staticmethod
    def from_dict(doc: dict) -> "Survey":
        d = doc["definition"]
        definition = SurveyDefinition(
            design=codec.import_design(json.dumps(d["design"]), "json"),
            settings=settings_from_dict(d["settings"]),
            intro_text=d["intro_text"],
            final_text=d["final_text"],
            alternative_labels=list(d["alternative_labels"]),
            serial_mode=SerialMode(**d["serial_mode"]),
            regen_draws=int(d.get("regen_draws", 30)),
        )
        survey = Survey(definition)
        survey.design_history = [
            DesignVersion(
                switched_at=v["switched_at"],
                design=codec.import_design(json.dumps(v["design"]), "json"),
                prior=prior_from_dict(v["prior"]) if v.get("prior") else None,
            )
            for v in doc["design_history"]
        ]
        survey.completed_respondents = doc["completed_respondents"]
        survey.closed = doc["closed"]
        survey.regeneration_log = list(doc.get("regeneration_log", []))
        survey._rows = [dict(r) for r in doc["rows"]]
        survey._next_respondent = doc["next_respondent"]
        survey._next_session = doc["next_session"]
        survey.sessions = {
            s["session_id"]: Session(**s) for s in doc.get("sessions", [])
        }
        return survey
