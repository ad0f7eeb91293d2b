"""Command-line interface: analyze biomarker CSVs, run simulations, print truths.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np
import pandas as pd

from . import __version__
from .cutoffs import Criterion, bootstrap_analysis, cutoff_posterior_multi, optimize_cutoff
from .estimators import MODEL_REGISTRY, Sample, default_search_interval
from .exceptions import NumericFailureError, RoccutError
from .roc_core import HIGHER_IS_DISEASED, LOWER_IS_DISEASED, delong_auc
from .simharness import (
    COVARIATE_MECHANISMS,
    LEVELS,
    NO_COVARIATE_MECHANISMS,
    Mechanism,
    SimStudySpec,
    run_study,
    true_values,
)

_BAYES_MODELS = ("bn", "pv", "semipv")
_BOOT_MODELS = ("emp", "nonpar", "bigamma")
_ALL_CRITERIA = ("j", "er", "cz", "iu")

EXIT_DATA = 3
EXIT_NUMERIC = 4


class _CliError(click.ClickException):
    def __init__(self, message, code):
        super().__init__(message)
        self.exit_code = code


def _fail_data(msg):
    raise _CliError(msg, EXIT_DATA)


@click.group()
@click.version_option(__version__, prog_name="roccut")
def main():
    """ROC models and optimal biomarker cutoffs."""


def _read_sample(path, value_col, group_col, covariate_col, direction):
    try:
        frame = pd.read_csv(path)
    except Exception as exc:  # malformed CSV
        _fail_data(f"could not parse {path}: {exc}")
    for col in [value_col, group_col] + ([covariate_col] if covariate_col else []):
        if col not in frame.columns:
            _fail_data(f"missing column {col!r} in {path}")
    values = pd.to_numeric(frame[value_col], errors="coerce").to_numpy()
    if np.isnan(values).any():
        row = int(np.argwhere(np.isnan(values))[0])
        _fail_data(f"non-numeric value in column {value_col!r} at row {row}")
    groups = frame[group_col].to_numpy()
    bad = ~np.isin(groups, (0, 1))
    if bad.any():
        row = int(np.argwhere(bad)[0])
        _fail_data(f"group column must be coded 0/1; found {groups[row]!r} at row {row}")
    covariate = None
    if covariate_col:
        covariate = pd.to_numeric(frame[covariate_col], errors="coerce").to_numpy()
        if np.isnan(covariate).any():
            row = int(np.argwhere(np.isnan(covariate))[0])
            _fail_data(f"non-numeric covariate at row {row}")
    mask1 = groups.astype(int) == 1
    if mask1.sum() < 3 or (~mask1).sum() < 3:
        _fail_data("need at least 3 rows per group")
    flipped = False
    if direction == "auto":
        flipped = delong_auc(values[~mask1], values[mask1]) < 0.5
    elif direction == "low":
        flipped = True
    orientation = LOWER_IS_DISEASED if flipped else HIGHER_IS_DISEASED
    sample = Sample.from_arrays(values, groups.astype(int), covariate, orientation)
    return sample, flipped


def _analyze_rows(sample, models, criteria, at_values, mcmc_kwargs, n_boot, seed):
    rows = []
    norm_sample, flipped = sample.normalized()
    search = default_search_interval(norm_sample)
    for model_key in models:
        if model_key in _BAYES_MODELS:
            cls = MODEL_REGISTRY[model_key]
            est = cls(seed=seed, **mcmc_kwargs).fit_sample(sample)
            ats = list(at_values) if sample.has_covariate else [None]
            for at in ats:
                summ = est.auc_summary(at_x=at)
                rows.append((model_key, "auc", at, summ.mean, summ.lo, summ.hi))
                results = cutoff_posterior_multi(est, criteria, at_x=at, search=search)
                for crit in criteria:
                    res = results[Criterion.from_key(crit)]
                    rows.append((model_key, crit, at, res.c_star, res.interval[0], res.interval[1]))
        else:
            if sample.has_covariate:
                raise _CliError(
                    f"model {model_key!r} cannot accommodate covariates", 2
                )
            metrics = bootstrap_analysis(sample, model_key, criteria, n_boot=n_boot, seed=seed)
            rows.append((model_key, "auc", None) + metrics["auc"])
            for crit in criteria:
                rows.append((model_key, crit, None) + metrics[crit])
    frame = pd.DataFrame(rows, columns=["model", "metric", "at", "estimate", "lo", "hi"])
    return frame


def _emit_report(frame, flipped, output, json_path, meta):
    display = frame.copy()
    for col in ("estimate", "lo", "hi"):
        display[col] = display[col].round(3)
    if output:
        display.to_csv(output, index=False)
    payload = {
        "kind": "analysis",
        "direction_flipped": bool(flipped),
        "config": meta,
        "results": [
            {
                "model": r.model,
                "metric": r.metric,
                "at": None if pd.isna(r.at) else float(r.at),
                "estimate": float(r.estimate),
                "lo": float(r.lo),
                "hi": float(r.hi),
            }
            for r in frame.itertuples()
        ],
    }
    if json_path:
        with open(json_path, "w") as fh:
            json.dump(payload, fh, indent=2)
    click.echo(display.to_string(index=False))
    if flipped:
        click.echo("note: direction flipped (lower values indicate disease); "
                   "cutoffs are reported on the original scale")


@main.command("analyze")
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "models", multiple=True,
              type=click.Choice(sorted(MODEL_REGISTRY)), default=("emp",), show_default=True)
@click.option("--criterion", "criteria", multiple=True,
              type=click.Choice(_ALL_CRITERIA + ("all",)), default=("all",), show_default=True)
@click.option("--value-col", default="value", show_default=True)
@click.option("--group-col", default="group", show_default=True)
@click.option("--covariate", "covariate_col", default=None, help="Covariate column name.")
@click.option("--at", "at_values", multiple=True, type=float,
              help="Covariate level(s) to evaluate (repeatable).")
@click.option("--direction", type=click.Choice(["auto", "high", "low"]), default="auto",
              show_default=True)
@click.option("--chains", default=2, show_default=True)
@click.option("--iters", default=6000, show_default=True)
@click.option("--burnin", default=1000, show_default=True)
@click.option("--thin", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--bootstrap", "n_boot", default=1000, show_default=True,
              help="Bootstrap resamples for emp/nonpar/bigamma intervals.")
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Write the report table as CSV.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None,
              help="Write the full-precision report as JSON.")
@click.option("--dump-draws", type=click.Path(dir_okay=False), default=None,
              help="Write retained MCMC draws of the last Bayesian model fitted.")
def cmd_analyze(input_csv, models, criteria, value_col, group_col, covariate_col,
                at_values, direction, chains, iters, burnin, thin, seed, n_boot,
                output, json_path, dump_draws):
    """Estimate AUC and optimal cutoffs for a biomarker CSV."""
    if covariate_col and not at_values:
        raise click.UsageError("--covariate requires at least one --at level")
    if at_values and not covariate_col:
        raise click.UsageError("--at requires --covariate")
    crits = list(_ALL_CRITERIA) if "all" in criteria else list(dict.fromkeys(criteria))
    mcmc_kwargs = {"chains": chains, "iterations": iters, "burn_in": burnin, "thin": thin}
    try:
        sample, flipped = _read_sample(input_csv, value_col, group_col, covariate_col, direction)
        frame = _analyze_rows(sample, models, crits, at_values, mcmc_kwargs, n_boot, seed)
        if dump_draws:
            bayes_models = [m for m in models if m in _BAYES_MODELS]
            if not bayes_models:
                raise click.UsageError("--dump-draws needs a Bayesian model (bn/pv/semipv)")
            cls = MODEL_REGISTRY[bayes_models[-1]]
            cls(seed=seed, **mcmc_kwargs).fit_sample(sample).dump_draws(dump_draws)
    except _CliError:
        raise
    except click.UsageError:
        raise
    except NumericFailureError as exc:
        raise _CliError(f"numeric failure: {exc}", EXIT_NUMERIC) from exc
    except RoccutError as exc:
        raise _CliError(str(exc), EXIT_DATA) from exc
    meta = {
        "input": str(input_csv),
        "models": list(models),
        "criteria": crits,
        "direction": direction,
        "seed": seed,
    }
    _emit_report(frame, flipped, output, json_path, meta)


@main.command("simulate")
@click.option("--mechanism", "mechanisms", multiple=True, required=True,
              type=click.Choice(NO_COVARIATE_MECHANISMS + COVARIATE_MECHANISMS))
@click.option("--level", "levels", multiple=True, type=click.Choice(LEVELS),
              default=LEVELS, show_default=True)
@click.option("--n", "sample_sizes", multiple=True, type=int, default=(50, 100),
              show_default=True)
@click.option("--replicates", default=200, show_default=True)
@click.option("--models", "models", multiple=True, type=click.Choice(sorted(MODEL_REGISTRY)),
              default=("emp", "bn"), show_default=True)
@click.option("--criteria", "criteria", multiple=True, type=click.Choice(_ALL_CRITERIA + ("all",)),
              default=("all",), show_default=True)
@click.option("--at", "at_values", multiple=True, type=float, default=(0.0, 1.0),
              show_default=True, help="Covariate levels for covariate mechanisms.")
@click.option("--seed", default=0, show_default=True)
@click.option("--jobs", default=-1, show_default=True)
@click.option("--preset", type=click.Choice(["desk"]), default=None,
              help="'desk' reproduces the desk-scale acceptance configuration.")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None)
def cmd_simulate(mechanisms, levels, sample_sizes, replicates, models, criteria,
                 at_values, seed, jobs, preset, output, json_path):
    """Run a bias replication study and write median/IQR bias tables."""
    crits = list(_ALL_CRITERIA) if "all" in criteria else list(dict.fromkeys(criteria))
    if preset == "desk":
        mechanisms = ("bn_equal", "bn_unequal", "mixed_ii")
        levels = ("medium",)
        sample_sizes = (100,)
        replicates = 200
        models = ("emp", "bn")
        crits = ["j"]
    try:
        spec = SimStudySpec(
            mechanisms=tuple(mechanisms),
            levels=tuple(levels),
            sample_sizes=tuple(sample_sizes),
            replicates=replicates,
            models=tuple(models),
            criteria=tuple(crits),
            at_values=tuple(at_values),
            seed=seed,
            jobs=jobs,
        )
        result = run_study(spec)
    except RoccutError as exc:
        raise click.UsageError(str(exc)) from exc
    if output:
        result.to_csv(output)
    if json_path:
        result.to_json(json_path)
    show = result.table.copy()
    for col in ("truth", "median_bias", "iqr"):
        show[col] = show[col].round(3)
    click.echo(show.to_string(index=False))


@main.command("truth")
@click.argument("mechanism", type=click.Choice(NO_COVARIATE_MECHANISMS + COVARIATE_MECHANISMS))
@click.argument("level", type=click.Choice(LEVELS), required=False)
@click.option("--at", "at_x", type=float, default=None, help="Covariate level.")
def cmd_truth(mechanism, level, at_x):
    """Print the analytic AUC and four optimal cutoffs of a mechanism."""
    covariate = mechanism in COVARIATE_MECHANISMS
    if covariate and level is not None:
        raise click.UsageError(f"{mechanism} does not take an AUC level")
    if covariate and at_x is None:
        raise click.UsageError(f"{mechanism} requires --at X")
    if not covariate and at_x is not None:
        raise click.UsageError(f"{mechanism} has no covariate; drop --at")
    if not covariate and level is None:
        raise click.UsageError(f"{mechanism} requires a level: {', '.join(LEVELS)}")
    tv = true_values(Mechanism(mechanism, level), at_x=at_x)
    label = f"{mechanism} {level}" if level else f"{mechanism} x={at_x:g}"
    click.echo(f"mechanism: {label}")
    click.echo(f"AUC {tv.auc:.3f}")
    for crit in _ALL_CRITERIA:
        click.echo(f"{crit.upper()} {tv.cutoff(crit):.3f}")


if __name__ == "__main__":
    main()
