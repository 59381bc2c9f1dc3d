"""Exception hierarchy shared across the package."""


class DCEError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(DCEError):
    """An argument violates a documented precondition."""


class CorruptDesignError(DCEError):
    """A coded design matrix violates the dummy-coding invariants."""


class SchemaError(DCEError):
    """An imported file is malformed or has an unsupported schema version."""


class DegenerateDesignSpaceError(DCEError):
    """Every optimizer start ended with a singular information matrix."""


class EstimationError(DCEError):
    """Base class for estimation failures."""


class RankDeficiencyError(EstimationError):
    """The model matrix is collinear; carries the offending column names."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(
            "model matrix is rank deficient; collinear columns: "
            + ", ".join(self.columns)
        )


class SeparationError(EstimationError):
    """A coefficient diverged during iteration (quasi-complete separation)."""


class SurveyStateError(DCEError):
    """A survey operation was attempted in an invalid state."""
