import numpy as np
import pytest

from dcengine import AttributeSpec, DesignSettings, PriorSpec


@pytest.fixture(scope="session")
def vaccine_attributes():
    """Four attributes with 3, 2, 3, 3 levels (first level = base)."""
    return (
        AttributeSpec("Effectiveness", ("70%", "80%", "90%")),
        AttributeSpec("Required dosage", ("1 dose", "2 doses")),
        AttributeSpec(
            "Adverse events",
            ("1 in 100 patients", "1 in 500 patients", "1 in 1000 patients"),
        ),
        AttributeSpec("Out-of-pocket cost", ("100", "150", "200")),
    )


@pytest.fixture(scope="session")
def vaccine_settings(vaccine_attributes):
    """16 paired sets with opt-out, zero priors, seed 9999 (K = 7)."""
    return DesignSettings(
        attributes=vaccine_attributes,
        n_alts=2,
        n_sets=16,
        opt_out=True,
        bayesian=False,
        seed=9999,
    )


@pytest.fixture(scope="session")
def tiny_settings():
    """Two binary attributes, two paired sets, no opt-out (K = 2)."""
    return DesignSettings(
        attributes=(
            AttributeSpec("a", ("0", "1")),
            AttributeSpec("b", ("0", "1")),
        ),
        n_alts=2,
        n_sets=2,
        seed=11,
    )


@pytest.fixture(scope="session")
def small_settings():
    """Two binary attributes, four paired sets; enough data to estimate."""
    return DesignSettings(
        attributes=(
            AttributeSpec("a", ("0", "1")),
            AttributeSpec("b", ("0", "1")),
        ),
        n_alts=2,
        n_sets=4,
        seed=5,
    )


@pytest.fixture(scope="session")
def identity_prior():
    return PriorSpec(mean=np.zeros(2), covariance=np.eye(2), n_draws=20)
