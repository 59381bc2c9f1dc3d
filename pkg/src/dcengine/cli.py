"""Command-line driver: design, decode, simulate, estimate, wtp, serve.

Every command is deterministic given its flags; all randomness is seeded
explicitly. Exit codes: 0 success, 2 usage/validation problems, 3
numerical failures during estimation or design search.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import codec
from .core import AttributeSpec, DesignSettings, PriorSpec, simulate_choices, validate_settings
from .dataset import ResponseDataset
from .errors import DCEError, EstimationError, DegenerateDesignSpaceError, InvalidInputError
from .estimation import (
    coefficient_plot_data,
    fit_conditional_logit,
    recode_price_continuous,
    wtp as compute_wtp,
)
from .optimizer import generate_design
from .serialize import settings_to_dict

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        _fail(EXIT_VALIDATION, f"expected comma-separated integers, got '{text}'")


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        _fail(EXIT_VALIDATION, f"expected comma-separated numbers, got '{text}'")


@click.group()
def main():
    """Discrete choice experiment toolkit."""


@main.command()
@click.option("--levels", required=True, help="Level counts, e.g. 3,2,3,3.")
@click.option("--alts", default=2, show_default=True, help="Alternatives per choice set.")
@click.option("--sets", required=True, type=int, help="Number of choice sets.")
@click.option("--opt-out", is_flag=True, help="Append an opt-out alternative to every set.")
@click.option("--bayesian", is_flag=True, help="Minimize the Bayesian DB-error.")
@click.option("--priors", default=None, help="Prior means, e.g. 0,0,0,0,0,0,0.")
@click.option("--draws", default=100, show_default=True, help="Prior draws for the DB-error.")
@click.option("--seed", default=0, show_default=True, help="Random seed.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output design JSON.")
def design(levels, alts, sets, opt_out, bayesian, priors, draws, seed, out_path):
    """Generate a D- or DB-efficient design and write it as JSON."""
    counts = _parse_ints(levels)
    if not counts:
        _fail(EXIT_VALIDATION, "--levels must list at least one attribute")
    attributes = tuple(
        AttributeSpec(name=f"attr{i + 1}",
                      levels=tuple(str(l + 1) for l in range(count)))
        for i, count in enumerate(counts)
    )
    k = sum(c - 1 for c in counts)
    prior = None
    if priors is not None:
        mean = np.asarray(_parse_floats(priors))
        if len(mean) != k:
            _fail(EXIT_VALIDATION,
                  f"--priors has {len(mean)} values but the design has K={k} parameters")
        prior = PriorSpec(mean=mean, covariance=np.eye(k), n_draws=draws)
    settings = DesignSettings(
        attributes=attributes, n_alts=alts, n_sets=sets, opt_out=opt_out,
        bayesian=bayesian, priors=prior, seed=seed,
    )
    problems = validate_settings(settings)
    if problems:
        _fail(EXIT_VALIDATION, "; ".join(problems))
    try:
        result = generate_design(settings)
    except DegenerateDesignSpaceError as exc:
        _fail(EXIT_NUMERICAL, str(exc))
    labeled = codec.label_from_settings(result.design, settings)
    payload = codec.export_design(
        labeled, "json",
        metadata={
            "settings": settings_to_dict(settings),
            "criterion_value": result.criterion_value,
            "criterion_kind": result.criterion_kind,
            "passes_used": result.passes_used,
        },
    )
    with open(out_path, "wb") as fh:
        fh.write(payload)
    click.echo(f"K={k}")
    click.echo(f"criterion ({result.criterion_kind}-error): {result.criterion_value:.6g}")
    click.echo(f"design written to {out_path}")


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(), help="Design JSON file.")
@click.option("--names", "names_path", default=None, type=click.Path(),
              help="JSON file with attribute_names and level_names.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Write the plain-text choice sets here (default: stdout).")
def decode(in_path, names_path, out_path):
    """Decode a design matrix into plain-text choice sets."""
    labeled = _load_design(in_path)
    if names_path is not None:
        try:
            with open(names_path) as fh:
                names = json.load(fh)
            labeled = codec.label_design(
                labeled.coded, names["attribute_names"], names["level_names"]
            )
        except FileNotFoundError:
            _fail(EXIT_VALIDATION, f"names file not found: {names_path}")
        except (KeyError, json.JSONDecodeError) as exc:
            _fail(EXIT_VALIDATION, f"bad names file: {exc}")
        except InvalidInputError as exc:
            _fail(EXIT_VALIDATION, str(exc))
    text = codec.decoded_to_text(codec.decode_design(labeled))
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
        click.echo(f"decoded design written to {out_path}")
    else:
        click.echo(text)


def _load_design(path: str) -> codec.LabeledDesign:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        _fail(EXIT_VALIDATION, f"design file not found: {path}")
    fmt = "csv" if path.endswith(".csv") else "json"
    try:
        return codec.import_design(data, fmt)
    except DCEError as exc:
        _fail(EXIT_VALIDATION, str(exc))


@main.command()
@click.option("--design", "design_path", required=True, type=click.Path())
@click.option("--beta", required=True, help="True coefficients, comma-separated.")
@click.option("--n", "n_respondents", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def simulate(design_path, beta, n_respondents, seed, out_path):
    """Simulate synthetic respondents answering a design."""
    labeled = _load_design(design_path)
    b = np.asarray(_parse_floats(beta))
    try:
        data = simulate_choices(labeled.coded, b, n_respondents, seed)
    except InvalidInputError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    with open(out_path, "w") as fh:
        fh.write(data.to_csv())
    click.echo(f"{data.n_tasks} tasks from {n_respondents} respondents "
               f"written to {out_path}")


def _load_dataset(path: str) -> ResponseDataset:
    try:
        with open(path) as fh:
            return ResponseDataset.from_csv(fh.read())
    except FileNotFoundError:
        _fail(EXIT_VALIDATION, f"data file not found: {path}")
    except InvalidInputError as exc:
        _fail(EXIT_VALIDATION, str(exc))


def _prepare(data_path, covariates, price_columns, price_levels):
    data = _load_dataset(data_path)
    if (price_columns is None) != (price_levels is None):
        _fail(EXIT_VALIDATION,
              "--price-columns and --price-levels must be given together")
    if price_columns is not None:
        columns = [c.strip() for c in price_columns.split(",") if c.strip()]
        values = _parse_floats(price_levels)
        if len(values) != len(columns) + 1:
            _fail(EXIT_VALIDATION,
                  "--price-levels needs the base value first, then one value "
                  "per price column")
        try:
            data = recode_price_continuous(
                data, columns, dict(zip(columns, values[1:])), values[0]
            )
        except InvalidInputError as exc:
            _fail(EXIT_VALIDATION, str(exc))
    selected = ([c.strip() for c in covariates.split(",") if c.strip()]
                if covariates else list(data.covariates))
    return data, selected


def _fit_or_exit(data, selected):
    try:
        return fit_conditional_logit(data, selected)
    except EstimationError as exc:
        _fail(EXIT_NUMERICAL, str(exc))
    except InvalidInputError as exc:
        _fail(EXIT_VALIDATION, str(exc))


def _print_table(est):
    width = max(len(n) for n in est.coefficients.names)
    click.echo(f"{'coefficient':<{width}}  {'estimate':>10}  {'std.err':>10}  "
               f"{'z':>8}  {'p':>8}")
    for name, b, se, z, p in zip(est.coefficients.names, est.coefficients.beta,
                                 est.std_errors, est.z_values, est.p_values):
        click.echo(f"{name:<{width}}  {b:>10.4f}  {se:>10.4f}  {z:>8.3f}  {p:>8.4f}")
    click.echo(f"log-likelihood: {est.log_likelihood:.4f}  "
               f"iterations: {est.iterations}  converged: {est.converged}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--covariates", default=None, help="Comma-separated subset (default: all).")
@click.option("--price-columns", default=None,
              help="Price dummy columns to recode, e.g. cost.150,cost.200.")
@click.option("--price-levels", default=None,
              help="Currency values, base level first, e.g. 100,150,200.")
@click.option("--json", "json_path", default=None, type=click.Path(),
              help="Also write the full result (with CI plot data) as JSON.")
def estimate(data_path, covariates, price_columns, price_levels, json_path):
    """Fit the conditional logit and print the coefficient table."""
    data, selected = _prepare(data_path, covariates, price_columns, price_levels)
    est = _fit_or_exit(data, selected)
    _print_table(est)
    if json_path:
        doc = {
            "coefficients": [
                {"name": n, "estimate": float(b), "std_error": float(se),
                 "z_value": float(z), "p_value": float(p),
                 "ci_low": lo, "ci_high": hi}
                for (n, b, lo, hi), se, z, p in zip(
                    coefficient_plot_data(est), est.std_errors,
                    est.z_values, est.p_values)
            ],
            "log_likelihood": est.log_likelihood,
            "iterations": est.iterations,
            "converged": est.converged,
        }
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=2)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--covariates", default=None)
@click.option("--price-columns", default=None)
@click.option("--price-levels", default=None)
@click.option("--price", required=True, help="Name of the price coefficient.")
@click.option("--targets", required=True, help="Comma-separated target coefficients.")
def wtp(data_path, covariates, price_columns, price_levels, price, targets):
    """Estimate and print willingness to pay per target level."""
    data, selected = _prepare(data_path, covariates, price_columns, price_levels)
    est = _fit_or_exit(data, selected)
    target_list = [t.strip() for t in targets.split(",") if t.strip()]
    try:
        result = compute_wtp(est, price, target_list)
    except InvalidInputError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    width = max(len(e.name) for e in result.entries)
    click.echo(f"{'level':<{width}}  {'WTP':>10}  {'std.err':>10}  "
               f"{'ci low':>10}  {'ci high':>10}")
    for e in result.entries:
        click.echo(f"{e.name:<{width}}  {e.estimate:>10.4f}  {e.std_error:>10.4f}  "
                   f"{e.ci_low:>10.4f}  {e.ci_high:>10.4f}")


@main.command()
@click.option("--data-dir", default="data", show_default=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True,
              help="Bind address (loopback by default).")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--ui-dir", default=None, type=click.Path(),
              help="Optional directory of built frontend assets to serve at /ui.")
def serve(data_dir, host, port, ui_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir, ui_dir=ui_dir), host=host, port=port)


if __name__ == "__main__":
    main()
