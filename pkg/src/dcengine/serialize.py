"""Plain-dict (JSON-ready) conversions for settings and priors.

Used by the file-backed service store and the survey snapshots; the
design itself travels through :mod:`dcengine.codec`'s JSON schema.
"""

from __future__ import annotations

import numpy as np

from .core import AttributeSpec, DesignSettings, PriorSpec


def prior_to_dict(prior: PriorSpec) -> dict:
    return {
        "mean": [float(v) for v in prior.mean],
        "covariance": [[float(v) for v in row] for row in prior.covariance],
        "n_draws": int(prior.n_draws),
        "draw_seed_offset": int(prior.draw_seed_offset),
    }


def prior_from_dict(doc: dict) -> PriorSpec:
    return PriorSpec(
        mean=np.asarray(doc["mean"], dtype=float),
        covariance=np.asarray(doc["covariance"], dtype=float),
        n_draws=int(doc.get("n_draws", 100)),
        draw_seed_offset=int(doc.get("draw_seed_offset", 0)),
    )


def settings_to_dict(settings: DesignSettings) -> dict:
    return {
        "attributes": [
            {"name": a.name, "levels": list(a.levels)} for a in settings.attributes
        ],
        "n_alts": settings.n_alts,
        "n_sets": settings.n_sets,
        "opt_out": settings.opt_out,
        "bayesian": settings.bayesian,
        "priors": prior_to_dict(settings.priors) if settings.priors else None,
        "seed": settings.seed,
    }


def settings_from_dict(doc: dict) -> DesignSettings:
    priors = doc.get("priors")
    return DesignSettings(
        attributes=tuple(
            AttributeSpec(name=a["name"], levels=tuple(a["levels"]))
            for a in doc["attributes"]
        ),
        n_alts=int(doc["n_alts"]),
        n_sets=int(doc["n_sets"]),
        opt_out=bool(doc.get("opt_out", False)),
        bayesian=bool(doc.get("bayesian", False)),
        priors=prior_from_dict(priors) if priors else None,
        seed=int(doc.get("seed", 0)),
    )
