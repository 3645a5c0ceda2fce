"""Command-line entry point: ingest, run, report.

A run directory is created by `run` and owned by it: manifest.json is
written before any record, records stream into records/, and reruns with
the same manifest skip completed records.  Reports are pure functions of
the record set.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import re
import sys
from datetime import datetime, timezone

import click

from . import __version__, dataset, experiments, reports, stats

MANIFEST_NAME = "manifest.json"
RECORDS_DIR = "records"

REPORT_KINDS = ("averages", "features", "best", "curves", "stats", "baseline")


def _log(message: str) -> None:
    click.echo(message, err=True)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@click.group()
@click.version_option(__version__)
def main():
    """GA-SVM toolkit: joint feature and hyperparameter search for binary classifiers."""


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--target", default="Heroin", show_default=True,
              help="Drug whose row is highlighted in the report.")
@click.option("--expect-table1", is_flag=True,
              help="Exit nonzero unless counts match the published distribution table.")
def ingest(data_path, target, expect_table1):
    """Parse the survey file and report per-drug user counts and percentages."""
    try:
        records = dataset.load_records(data_path)
    except dataset.ParseError as exc:
        _log(f"parse error: {exc}")
        sys.exit(1)
    counts = dataset.user_counts(records)
    click.echo(f"records: {len(records)}")
    for drug, (count, pct) in counts.items():
        mark = " *" if drug == target else ""
        click.echo(f"{drug}: {count} users ({pct:.2f}%){mark}")
    if expect_table1:
        problems = dataset.check_reported_counts(counts)
        if len(records) != 1885:
            problems.insert(0, f"record count: expected 1885, got {len(records)}")
        if problems:
            for p in problems:
                _log(f"MISMATCH {p}")
            sys.exit(1)
        click.echo(f"all {len(dataset.REPORTED_USER_COUNTS)} reported rows match")


def _load_config(config_path) -> experiments.ExperimentConfig:
    try:
        with open(config_path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"config is not valid JSON: {exc}")
    try:
        return experiments.ExperimentConfig.from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise click.ClickException(str(exc))


def _completed_specs(records_dir: str) -> set[tuple[int, int, int]]:
    done = set()
    if not os.path.isdir(records_dir):
        return done
    pattern = re.compile(r"cond(\d+)_fold(\d+)_rep(\d+)\.json$")
    for name in os.listdir(records_dir):
        m = pattern.fullmatch(name)
        if m:
            done.add(tuple(int(g) for g in m.groups()))
    return done


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=None, type=int, help="Override the config's master seed.")
@click.option("--workers", default=os.cpu_count(), show_default="cpu count", type=int)
def run(config_path, data_path, out_dir, seed, workers):
    """Execute the weight-condition sweep described by a configuration file."""
    cfg = _load_config(config_path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=seed)

    manifest = {
        "configuration": cfg.to_dict(),
        "master_seed": cfg.master_seed,
        "data_sha256": _sha256(data_path),
        "tool_version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    if os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            existing = json.load(fh)
        same = all(existing.get(k) == manifest[k]
                   for k in ("configuration", "master_seed", "data_sha256"))
        if not same:
            raise click.ClickException(
                f"{out_dir} already holds a run with a different manifest; "
                "use a fresh output directory"
            )
        _log("manifest matches an existing run; resuming")
    else:
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=1)

    try:
        records = dataset.load_records(data_path)
    except dataset.ParseError as exc:
        _log(f"parse error: {exc}")
        sys.exit(1)
    ds = dataset.build_matrix(records, cfg.target, cfg.drug_encoding)
    folds = dataset.stratified_folds(ds, cfg.fold_k, cfg.fold_seed)

    records_dir = os.path.join(out_dir, RECORDS_DIR)
    done = _completed_specs(records_dir)
    total = len(cfg.conditions) * cfg.fold_k * cfg.replications_per_fold
    if done:
        _log(f"skipping {len(done)} completed of {total} runs")
    if len(done) == total:
        _log("nothing to do")
        return
    experiments.run_experiment(ds, cfg, records_dir, workers=max(1, workers),
                               folds=folds, log=_log, skip=done)
    _log(f"run directory: {out_dir}")


@main.command()
@click.option("--run-dir", "run_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--kind", required=True, type=click.Choice(REPORT_KINDS))
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False),
              help="Report directory; defaults to <run-dir>/reports.")
@click.option("--data", "data_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Survey file, required for the baseline report.")
def report(run_dir, kind, out_dir, data_path):
    """Emit a CSV report computed from a run directory's records."""
    out_dir = out_dir or os.path.join(run_dir, "reports")
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(run_dir, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise click.ClickException(f"{run_dir} has no {MANIFEST_NAME}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    cfg = experiments.ExperimentConfig.from_dict(manifest["configuration"])
    feature_names = dataset.predictor_names(cfg.target)

    if kind == "baseline":
        if data_path is None:
            raise click.ClickException("the baseline report needs --data")
        if _sha256(data_path) != manifest["data_sha256"]:
            _log("warning: data file differs from the one recorded in the manifest")
        ds = dataset.build_matrix(dataset.load_records(data_path),
                                  cfg.target, cfg.drug_encoding)
        folds = dataset.stratified_folds(ds, cfg.fold_k, cfg.fold_seed)
        baseline = experiments.baseline_svm(ds, folds, solver_cfg=cfg.solver)
        path = os.path.join(out_dir, "baseline.csv")
        reports.write_baseline_csv(baseline, path)
        click.echo(path)
        return

    records, problems = experiments.load_run_records(os.path.join(run_dir, RECORDS_DIR))
    for problem in problems:
        _log(f"skipping record: {problem}")
    if not records:
        raise click.ClickException("no readable records in the run directory")

    if kind == "averages":
        path = os.path.join(out_dir, "averages.csv")
        reports.write_averages_csv(experiments.fold_averages(records), path)
        paths = [path]
    elif kind == "features":
        path = os.path.join(out_dir, "feature_frequency.csv")
        freq = experiments.feature_frequency(records, feature_names)
        reports.write_feature_frequency_csv(freq, feature_names, path)
        paths = [path]
    elif kind == "best":
        rows = experiments.best_models(records)
        path_a = os.path.join(out_dir, "best_models.csv")
        path_b = os.path.join(out_dir, "best_model_features.csv")
        reports.write_best_models_csv(rows, path_a)
        reports.write_best_features_csv(rows, feature_names, path_b)
        paths = [path_a, path_b]
    elif kind == "curves":
        path = os.path.join(out_dir, "curves.csv")
        reports.write_curves_csv(experiments.convergence_curves(records), path)
        paths = [path]
    else:  # stats
        matrix = stats.pairwise_matrix(experiments.sensitivity_groups(records))
        path_a = os.path.join(out_dir, "stats_pairwise.csv")
        path_b = os.path.join(out_dir, "stats_pairwise_holm.csv")
        reports.write_stats_csv(matrix, path_a)
        reports.write_stats_csv(matrix, path_b, holm=True)
        paths = [path_a, path_b]
    for path in paths:
        click.echo(path)


if __name__ == "__main__":
    main()
