"""Discrete choice experiment engine.

Design generation (D-/DB-error coordinate exchange), design labeling and
decoding, live surveys with serial regeneration, conditional logit
estimation, and willingness to pay.
"""

from .core import (
    AttributeSpec,
    ChoiceProbabilities,
    CodedDesign,
    Coefficients,
    DesignSettings,
    PriorSpec,
    count_full_factorial,
    count_unordered_pairs,
    d_error,
    db_error,
    draw_priors,
    dummy_code,
    fisher_information,
    mnl_probabilities,
    simulate_choices,
    validate_settings,
)
from .codec import (
    DecodedChoiceSet,
    LabeledDesign,
    decode_design,
    decoded_to_text,
    export_design,
    import_design,
    label_design,
    label_from_settings,
)
from .dataset import ResponseDataset
from .estimation import (
    EstimationResult,
    WtpResult,
    coefficient_plot_data,
    fit_conditional_logit,
    recode_price_continuous,
    wtp,
)
from .optimizer import (
    OptimizerConfig,
    OptimResult,
    coordinate_exchange,
    generate_design,
    random_initial_design,
)
from .serial import AnswerOutcome, SerialMode, Survey, SurveyDefinition

__all__ = [name for name in dir() if not name.startswith("_")]
