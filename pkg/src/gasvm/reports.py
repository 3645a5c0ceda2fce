"""CSV emission for sweep summaries, curves, and the pairwise test matrix."""

from __future__ import annotations

import csv

from .stats import PairwiseMatrix


def _write(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def write_averages_csv(rows: list[dict], path) -> None:
    out = [["Group", "Sensitivity", "Specificity", "Features", "Fit"]]
    for row in rows:
        out.append([
            row["label"],
            f"{row['sensitivity']:.3f}",
            f"{row['specificity']:.3f}",
            f"{row['features']:.3f}",
            f"{row['fitness']:.3f}",
        ])
    _write(path, out)


def write_feature_frequency_csv(freq: dict, feature_names, path) -> None:
    labels = list(freq["per_condition"])
    out = [["Feature"] + labels + ["Pooled"]]
    for i, name in enumerate(feature_names):
        out.append([name]
                   + [int(freq["per_condition"][lab][i]) for lab in labels]
                   + [int(freq["pooled"][i])])
    _write(path, out)


def write_best_models_csv(rows: list[dict], path) -> None:
    out = [["Group", "Sensitivity", "Specificity", "Fit", "FeatureReducePct",
            "SVMCost", "SVMGamma", "TotalAccuracyPct"]]
    for row in rows:
        out.append([
            row["label"],
            f"{row['sensitivity']:.3f}",
            f"{row['specificity']:.3f}",
            f"{row['fitness']:.3f}",
            f"{row['feature_reduction_pct']:.2f}",
            f"{row['cost']:.2f}",
            f"{row['gamma']:.3g}",
            f"{row['total_accuracy_pct']:.1f}",
        ])
    _write(path, out)


def write_best_features_csv(rows: list[dict], feature_names, path) -> None:
    """Feature-by-condition membership grid for the per-condition best models."""
    out = [["Feature"] + [row["label"] for row in rows]]
    for name in feature_names:
        out.append([name] + ["X" if name in row["selected_features"] else ""
                             for row in rows])
    _write(path, out)


def write_curves_csv(curves: dict, path) -> None:
    out = [["Group", "Generation", "MeanBestFitness", "CI95HalfWidth"]]
    for label, curve in curves.items():
        for g, (mean, ci) in enumerate(zip(curve["mean"], curve["ci"]), start=1):
            out.append([label, g, f"{mean:.6f}", f"{ci:.6f}"])
    _write(path, out)


def write_stats_csv(matrix: PairwiseMatrix, path, holm: bool = False) -> None:
    _write(path, matrix.to_rows(holm=holm))


def write_baseline_csv(baseline: dict, path) -> None:
    out = [["Fold", "Sensitivity", "Specificity", "AccuracyProduct"]]
    for i, metrics in enumerate(baseline["per_fold"]):
        out.append([i, f"{metrics.sensitivity:.3f}", f"{metrics.specificity:.3f}",
                    f"{metrics.accuracy_product:.3f}"])
    out.append(["mean", f"{baseline['sensitivity']:.3f}",
                f"{baseline['specificity']:.3f}",
                f"{baseline['accuracy_product']:.3f}"])
    _write(path, out)
