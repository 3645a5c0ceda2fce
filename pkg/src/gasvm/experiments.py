"""Sweep orchestration: folds x replications x weight conditions, plus reports.

Every run gets an independent child seed derived from the master seed and
its (condition, fold, replication) coordinates, so a sweep is exactly
reproducible and resumable record by record.  Records are persisted as one
JSON document each; all report tables are pure functions of the record
set.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as t_dist

from . import fitness as fit
from . import svm
from .dataset import Dataset, FoldSplit, stratified_folds
from .ga import GaConfig, GeneBounds, evolve

# The five weight conditions compared in the study, most accuracy-weighted first.
PAPER_CONDITIONS = tuple(
    fit.FitnessWeights(w_accuracy=a, w_features=f)
    for a, f in ((0.8, 0.2), (0.65, 0.35), (0.5, 0.5), (0.35, 0.65), (0.2, 0.8))
)

# All-features reference model: default cost with the study's printed gamma.
DEFAULT_BASELINE_PARAMS = svm.SvmParams(cost=1.0, gamma=0.33)


@dataclass(frozen=True)
class ExperimentConfig:
    conditions: tuple[fit.FitnessWeights, ...] = PAPER_CONDITIONS
    ga: GaConfig = GaConfig()
    fold_k: int = 3
    fold_seed: int = 42
    replications_per_fold: int = 30
    cost_range: tuple[float, float] = (1.0, 100.0)
    gamma_range: tuple[float, float] = (0.01, 10.0)
    target: str = "Heroin"
    drug_encoding: str = "binary"
    solver: svm.SolverConfig = svm.SolverConfig()
    master_seed: int = 7

    def __post_init__(self):
        if not self.conditions:
            raise ValueError("need at least one weight condition")
        if self.replications_per_fold < 1:
            raise ValueError("replications_per_fold must be at least 1")

    def bounds(self, n_features: int) -> GeneBounds:
        return fit.chromosome_bounds(n_features, self.cost_range, self.gamma_range)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "drug_encoding": self.drug_encoding,
            "conditions": [[c.w_accuracy, c.w_features] for c in self.conditions],
            "folds": {"k": self.fold_k, "seed": self.fold_seed},
            "replications_per_fold": self.replications_per_fold,
            "master_seed": self.master_seed,
            "ga": {
                "population_size": self.ga.population_size,
                "max_generations": self.ga.max_generations,
                "elitism_count": self.ga.elitism_count,
                "crossover_rate": self.ga.crossover_rate,
                "mutation_rate": self.ga.mutation_rate,
                "stagnation_limit": self.ga.stagnation_limit,
            },
            "gene_bounds": {"cost": list(self.cost_range), "gamma": list(self.gamma_range)},
            "solver": {"tol": self.solver.tol, "max_iter": self.solver.max_iter},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        problems = _validate_config(doc)
        if problems:
            raise ValueError("invalid configuration:\n  " + "\n  ".join(problems))
        return cls(
            conditions=tuple(
                fit.FitnessWeights(w_accuracy=a, w_features=f)
                for a, f in doc["conditions"]
            ),
            ga=GaConfig(**doc["ga"]),
            fold_k=doc["folds"]["k"],
            fold_seed=doc["folds"]["seed"],
            replications_per_fold=doc["replications_per_fold"],
            cost_range=tuple(doc["gene_bounds"]["cost"]),
            gamma_range=tuple(doc["gene_bounds"]["gamma"]),
            target=doc.get("target", "Heroin"),
            drug_encoding=doc.get("drug_encoding", "binary"),
            solver=svm.SolverConfig(**doc.get("solver", {})),
            master_seed=doc["master_seed"],
        )


def _validate_config(doc: dict) -> list[str]:
    """Field-level checks for a configuration document; returns problem strings."""
    problems = []

    def need(path, key, parent, types):
        if not isinstance(parent, dict) or key not in parent:
            problems.append(f"{path}: missing")
            return None
        v = parent[key]
        if not isinstance(v, types):
            problems.append(f"{path}: expected {types}, got {type(v).__name__}")
            return None
        return v

    conds = need("conditions", "conditions", doc, list)
    if conds is not None:
        for i, c in enumerate(conds):
            if not (isinstance(c, list) and len(c) == 2
                    and all(isinstance(x, (int, float)) for x in c)):
                problems.append(f"conditions[{i}]: expected a [w_accuracy, w_features] pair")
    folds = need("folds", "folds", doc, dict)
    if folds is not None:
        need("folds.k", "k", folds, int)
        need("folds.seed", "seed", folds, int)
    need("replications_per_fold", "replications_per_fold", doc, int)
    need("master_seed", "master_seed", doc, int)
    ga = need("ga", "ga", doc, dict)
    if ga is not None:
        for key in ("population_size", "max_generations", "elitism_count", "stagnation_limit"):
            need(f"ga.{key}", key, ga, int)
        for key in ("crossover_rate", "mutation_rate"):
            need(f"ga.{key}", key, ga, (int, float))
        extra = set(ga) - {"population_size", "max_generations", "elitism_count",
                           "stagnation_limit", "crossover_rate", "mutation_rate", "seed"}
        if extra:
            problems.append(f"ga: unknown keys {sorted(extra)}")
    gb = need("gene_bounds", "gene_bounds", doc, dict)
    if gb is not None:
        for key in ("cost", "gamma"):
            rng = need(f"gene_bounds.{key}", key, gb, list)
            if rng is not None and (len(rng) != 2 or not rng[0] < rng[1]):
                problems.append(f"gene_bounds.{key}: expected [low, high] with low < high")
    return problems


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one GA run on one fold under one weight condition."""

    condition_index: int
    w_accuracy: float
    w_features: float
    fold: int
    replication: int
    seed: int
    generations_run: int
    history: np.ndarray            # (generations_run, 2): best, mean fitness
    best_genes: np.ndarray
    sensitivity: float
    specificity: float
    accuracy_product: float
    feature_count: int
    fitness: float
    selected_features: tuple[str, ...]
    cost: float
    gamma: float
    duration_s: float

    @property
    def label(self) -> str:
        return fit.FitnessWeights(self.w_accuracy, self.w_features).label

    def to_dict(self) -> dict:
        def num(v):
            return None if (isinstance(v, float) and math.isnan(v)) else v

        return {
            "condition_index": self.condition_index,
            "w_accuracy": self.w_accuracy,
            "w_features": self.w_features,
            "fold": self.fold,
            "replication": self.replication,
            "seed": self.seed,
            "generations_run": self.generations_run,
            "history": [[float(b), float(m)] for b, m in self.history],
            "best_genes": [float(g) for g in self.best_genes],
            "sensitivity": num(self.sensitivity),
            "specificity": num(self.specificity),
            "accuracy_product": num(self.accuracy_product),
            "feature_count": self.feature_count,
            "fitness": self.fitness,
            "selected_features": list(self.selected_features),
            "cost": self.cost,
            "gamma": self.gamma,
            "duration_s": self.duration_s,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunRecord":
        def num(v):
            return math.nan if v is None else float(v)

        return cls(
            condition_index=doc["condition_index"],
            w_accuracy=doc["w_accuracy"],
            w_features=doc["w_features"],
            fold=doc["fold"],
            replication=doc["replication"],
            seed=doc["seed"],
            generations_run=doc["generations_run"],
            history=np.array(doc["history"], dtype=float).reshape(-1, 2),
            best_genes=np.array(doc["best_genes"], dtype=float),
            sensitivity=num(doc["sensitivity"]),
            specificity=num(doc["specificity"]),
            accuracy_product=num(doc["accuracy_product"]),
            feature_count=doc["feature_count"],
            fitness=doc["fitness"],
            selected_features=tuple(doc["selected_features"]),
            cost=doc["cost"],
            gamma=doc["gamma"],
            duration_s=doc["duration_s"],
        )


def derive_seed(master_seed: int, condition_index: int, fold: int, replication: int) -> int:
    """Deterministic child seed for one run's coordinates."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(condition_index, fold, replication))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def fold_slices(ds: Dataset, folds: FoldSplit, fold: int):
    tr = folds.train_indices(fold)
    te = folds.test_indices(fold)
    return ds.X[tr], ds.y[tr], ds.X[te], ds.y[te]


def run_single(ds: Dataset, folds: FoldSplit, cfg: ExperimentConfig,
               condition_index: int, fold: int, replication: int) -> RunRecord:
    """One GA run: evolve on (train, test) of the given fold, re-score the winner."""
    condition = cfg.conditions[condition_index]
    seed = derive_seed(cfg.master_seed, condition_index, fold, replication)
    train_X, train_y, test_X, test_y = fold_slices(ds, folds, fold)
    bounds = cfg.bounds(len(ds.feature_names))
    ga_cfg = dataclasses.replace(cfg.ga, seed=seed)

    def fitness_fn(chromosome):
        return fit.evaluate(chromosome, train_X, train_y, test_X, test_y,
                            condition, cfg.solver).fitness

    started = time.perf_counter()
    result = evolve(ga_cfg, bounds, fitness_fn)
    duration = time.perf_counter() - started

    final = fit.evaluate(result.best_chromosome, train_X, train_y, test_X, test_y,
                         condition, cfg.solver)
    return RunRecord(
        condition_index=condition_index,
        w_accuracy=condition.w_accuracy,
        w_features=condition.w_features,
        fold=fold,
        replication=replication,
        seed=seed,
        generations_run=result.generations_run,
        history=result.history,
        best_genes=result.best_chromosome,
        sensitivity=final.sensitivity,
        specificity=final.specificity,
        accuracy_product=final.accuracy_product,
        feature_count=final.feature_count,
        fitness=final.fitness,
        selected_features=final.spec.selected_names(ds.feature_names),
        cost=final.spec.params.cost,
        gamma=final.spec.params.gamma,
        duration_s=duration,
    )


def record_filename(condition_index: int, fold: int, replication: int) -> str:
    return f"cond{condition_index}_fold{fold}_rep{replication}.json"


def save_record(record: RunRecord, records_dir: str) -> str:
    os.makedirs(records_dir, exist_ok=True)
    path = os.path.join(
        records_dir, record_filename(record.condition_index, record.fold, record.replication)
    )
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(record.to_dict(), fh, indent=1)
    os.replace(tmp, path)
    return path


def load_run_records(records_dir: str) -> tuple[list[RunRecord], list[str]]:
    """Read every record document; returns (records, names of corrupt/failed files)."""
    records: list[RunRecord] = []
    problems: list[str] = []
    if not os.path.isdir(records_dir):
        return records, problems
    for name in sorted(os.listdir(records_dir)):
        if not name.endswith(".json"):
            continue
        path = os.path.join(records_dir, name)
        if name.endswith(".failed.json"):
            problems.append(name)
            continue
        try:
            with open(path) as fh:
                records.append(RunRecord.from_dict(json.load(fh)))
        except (ValueError, KeyError, TypeError) as exc:
            problems.append(f"{name}: {exc}")
    records.sort(key=lambda r: (r.condition_index, r.fold, r.replication))
    return records, problems


def _execute_spec(args):
    ds, folds, cfg, ci, fi, ri = args
    try:
        return ("ok", run_single(ds, folds, cfg, ci, fi, ri))
    except Exception as exc:  # individual failures must not kill the sweep
        return ("failed", (ci, fi, ri), f"{type(exc).__name__}: {exc}")


def run_specs(ds: Dataset, folds: FoldSplit, cfg: ExperimentConfig,
              specs: list[tuple[int, int, int]], records_dir: str | None = None,
              workers: int = 1, log=None) -> list[RunRecord]:
    """Execute the given (condition, fold, replication) triples, persisting as they finish."""
    records: list[RunRecord] = []
    failures: list[tuple[tuple[int, int, int], str]] = []

    def consume(outcome):
        if outcome[0] == "ok":
            record = outcome[1]
            if records_dir is not None:
                save_record(record, records_dir)
            records.append(record)
            if log:
                log(f"done cond{record.condition_index} fold{record.fold} "
                    f"rep{record.replication}: fitness {record.fitness:.4f} "
                    f"({record.duration_s:.1f}s)")
        else:
            _, key, message = outcome
            failures.append((key, message))
            if records_dir is not None:
                os.makedirs(records_dir, exist_ok=True)
                failed_name = record_filename(*key).replace(".json", ".failed.json")
                with open(os.path.join(records_dir, failed_name), "w") as fh:
                    json.dump({"spec": list(key), "error": message}, fh)
            if log:
                log(f"FAILED cond{key[0]} fold{key[1]} rep{key[2]}: {message}")

    if workers <= 1:
        for spec in specs:
            consume(_execute_spec((ds, folds, cfg) + spec))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_execute_spec, (ds, folds, cfg) + spec) for spec in specs]
            for future in as_completed(futures):
                consume(future.result())

    records.sort(key=lambda r: (r.condition_index, r.fold, r.replication))
    return records


def run_condition(ds: Dataset, folds: FoldSplit, cfg: ExperimentConfig,
                  condition: fit.FitnessWeights, records_dir: str | None = None,
                  workers: int = 1, log=None) -> list[RunRecord]:
    """All folds x replications for one weight condition."""
    ci = cfg.conditions.index(condition)
    specs = [(ci, fi, ri)
             for fi in range(cfg.fold_k)
             for ri in range(cfg.replications_per_fold)]
    return run_specs(ds, folds, cfg, specs, records_dir, workers, log)


def run_experiment(ds: Dataset, cfg: ExperimentConfig, records_dir: str | None = None,
                   workers: int = 1, folds: FoldSplit | None = None, log=None,
                   skip: set[tuple[int, int, int]] | None = None) -> list[RunRecord]:
    """The full sweep over all conditions; `skip` holds already-completed specs."""
    if folds is None:
        folds = stratified_folds(ds, cfg.fold_k, cfg.fold_seed)
    specs = [(ci, fi, ri)
             for ci in range(len(cfg.conditions))
             for fi in range(cfg.fold_k)
             for ri in range(cfg.replications_per_fold)
             if skip is None or (ci, fi, ri) not in skip]
    return run_specs(ds, folds, cfg, specs, records_dir, workers, log)


# ---------------------------------------------------------------------------
# Reports: pure functions of a record set.

def _by_condition(records: list[RunRecord]) -> dict[int, list[RunRecord]]:
    grouped: dict[int, list[RunRecord]] = {}
    for r in records:
        grouped.setdefault(r.condition_index, []).append(r)
    return dict(sorted(grouped.items()))


def fold_averages(records: list[RunRecord]) -> list[dict]:
    """Per-condition arithmetic means of the per-run final metrics."""
    rows = []
    for ci, group in _by_condition(records).items():
        if not group:
            raise ValueError(f"no records for condition {ci}")
        rows.append({
            "condition_index": ci,
            "label": group[0].label,
            "sensitivity": float(np.mean([r.sensitivity for r in group])),
            "specificity": float(np.mean([r.specificity for r in group])),
            "features": float(np.mean([r.feature_count for r in group])),
            "fitness": float(np.mean([r.fitness for r in group])),
            "n_runs": len(group),
        })
    return rows


def feature_frequency(records: list[RunRecord], feature_names) -> dict:
    """How many runs' best models selected each feature, per condition and pooled."""
    index = {name: i for i, name in enumerate(feature_names)}
    pooled = np.zeros(len(feature_names), dtype=int)
    per_condition: dict[str, np.ndarray] = {}
    for ci, group in _by_condition(records).items():
        counts = np.zeros(len(feature_names), dtype=int)
        for r in group:
            for name in r.selected_features:
                counts[index[name]] += 1
        per_condition[group[0].label] = counts
        pooled += counts
    return {"per_condition": per_condition, "pooled": pooled}


def best_models(records: list[RunRecord]) -> list[dict]:
    """Per condition, the run with maximal accuracy product.

    Ties break toward fewer features, then the lower fold index.
    """
    rows = []
    for ci, group in _by_condition(records).items():
        best = max(
            group,
            key=lambda r: (
                -math.inf if math.isnan(r.accuracy_product) else r.accuracy_product,
                -r.feature_count,
                -r.fold,
            ),
        )
        n_features_total = len(best.best_genes) - 2
        rows.append({
            "condition_index": ci,
            "label": best.label,
            "record": best,
            "sensitivity": best.sensitivity,
            "specificity": best.specificity,
            "fitness": best.fitness,
            "feature_reduction_pct": (1.0 - best.feature_count / n_features_total) * 100.0,
            "cost": best.cost,
            "gamma": best.gamma,
            "selected_features": best.selected_features,
            "total_accuracy_pct": 100.0 * (best.sensitivity + best.specificity),
        })
    return rows


def convergence_curves(records: list[RunRecord]) -> dict[str, dict]:
    """Generation-aligned mean best fitness with a 95% CI half-width.

    Runs that converged early contribute their final best to later
    generations (flat extension), so every run backs every generation.
    """
    out: dict[str, dict] = {}
    for ci, group in _by_condition(records).items():
        horizon = max(r.generations_run for r in group)
        values = np.empty((len(group), horizon))
        for i, r in enumerate(group):
            best = r.history[:, 0]
            values[i, : len(best)] = best
            values[i, len(best):] = best[-1]
        means = values.mean(axis=0)
        n = len(group)
        if n > 1:
            sd = values.std(axis=0, ddof=1)
            halfwidth = t_dist.ppf(0.975, n - 1) * sd / math.sqrt(n)
        else:
            halfwidth = np.zeros(horizon)
        out[group[0].label] = {"mean": means, "ci": halfwidth, "n_runs": n}
    return out


def sensitivity_groups(records: list[RunRecord]) -> list[tuple[str, list[float]]]:
    """Per-condition sensitivity samples, ordered by condition index."""
    return [
        (group[0].label, [r.sensitivity for r in group])
        for group in _by_condition(records).values()
    ]


def baseline_svm(ds: Dataset, folds: FoldSplit,
                 params: svm.SvmParams = DEFAULT_BASELINE_PARAMS,
                 solver_cfg: svm.SolverConfig | None = None) -> dict:
    """All-features SVM with fixed params, metrics averaged across the folds."""
    per_fold = []
    for fold in range(folds.k):
        train_X, train_y, test_X, test_y = fold_slices(ds, folds, fold)
        model = svm.train(train_X, train_y, params, solver_cfg)
        metrics = svm.confusion_metrics(model.predict(test_X), test_y)
        per_fold.append(metrics)
    return {
        "params": params,
        "per_fold": per_fold,
        "sensitivity": float(np.mean([m.sensitivity for m in per_fold])),
        "specificity": float(np.mean([m.specificity for m in per_fold])),
        "accuracy_product": float(np.mean([m.accuracy_product for m in per_fold])),
    }
