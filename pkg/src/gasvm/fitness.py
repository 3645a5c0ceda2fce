"""Chromosome decoding and the weighted accuracy/feature-count fitness.

A chromosome is 32 genes: 30 feature genes in [0, 1] (cutoff 0.5, the
boundary itself counts as selected), then the SVM cost and kernel-width
genes copied verbatim.  A decoded model is scored as

    fitness = w_accuracy * (sensitivity * specificity) + w_features / n_selected

and an empty feature mask short-circuits to the sentinel -1, strictly
below the attainable range (0, 1], so selection always eliminates it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import svm
from .ga import GeneBounds

EMPTY_MASK_FITNESS = -1.0
N_FEATURE_GENES = 30


@dataclass(frozen=True)
class FitnessWeights:
    w_accuracy: float
    w_features: float

    def __post_init__(self):
        for name in ("w_accuracy", "w_features"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if abs(self.w_accuracy + self.w_features - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    @property
    def label(self) -> str:
        return f"A:{round(self.w_accuracy * 100)} F:{round(self.w_features * 100)}"


@dataclass(frozen=True)
class ModelSpec:
    """Decoded phenotype: boolean feature mask plus concrete SVM parameters."""

    feature_mask: np.ndarray
    params: svm.SvmParams

    @property
    def feature_count(self) -> int:
        return int(self.feature_mask.sum())

    def selected_names(self, feature_names) -> tuple[str, ...]:
        return tuple(n for n, keep in zip(feature_names, self.feature_mask) if keep)


@dataclass(frozen=True)
class EvaluationResult:
    sensitivity: float
    specificity: float
    accuracy_product: float
    feature_count: int
    fitness: float
    spec: ModelSpec


class FitnessEvaluationError(RuntimeError):
    """Solver failure during evaluation, with the offending chromosome attached."""

    def __init__(self, chromosome: np.ndarray, cause: Exception):
        self.chromosome = np.array(chromosome)
        super().__init__(f"evaluation failed for chromosome {chromosome!r}: {cause}")


def chromosome_bounds(n_features: int = N_FEATURE_GENES,
                      cost_range: tuple[float, float] = (1.0, 100.0),
                      gamma_range: tuple[float, float] = (0.01, 10.0)) -> GeneBounds:
    """Gene bounds for the standard layout: feature genes in [0,1], then cost, gamma."""
    low = np.concatenate([np.zeros(n_features), [cost_range[0], gamma_range[0]]])
    high = np.concatenate([np.ones(n_features), [cost_range[1], gamma_range[1]]])
    return GeneBounds(low=low, high=high)


def decode(chromosome: np.ndarray) -> ModelSpec:
    """Feature gene >= 0.5 selects the feature; last two genes are cost and gamma."""
    genes = np.asarray(chromosome, dtype=float)
    if genes.ndim != 1 or len(genes) < 3:
        raise ValueError("chromosome must be a 1-D array of feature genes plus cost and gamma")
    mask = genes[:-2] >= 0.5
    return ModelSpec(feature_mask=mask, params=svm.SvmParams(cost=genes[-2], gamma=genes[-1]))


def encode(mask: np.ndarray, cost: float, gamma: float) -> np.ndarray:
    """Genes reproducing the given phenotype exactly (mask as 0/1 genes)."""
    return np.concatenate([np.asarray(mask, dtype=float), [cost, gamma]])


def accuracy(sensitivity: float, specificity: float) -> float:
    """Scalar accuracy: the product of the two rates."""
    for name, v in (("sensitivity", sensitivity), ("specificity", specificity)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    return sensitivity * specificity


def fitness_score(accuracy_product: float, feature_count: int,
                  weights: FitnessWeights) -> float:
    if feature_count == 0:
        return EMPTY_MASK_FITNESS
    return weights.w_accuracy * accuracy_product + weights.w_features / feature_count


def evaluate(chromosome: np.ndarray,
             train_X: np.ndarray, train_y: np.ndarray,
             test_X: np.ndarray, test_y: np.ndarray,
             weights: FitnessWeights,
             solver_cfg: svm.SolverConfig | None = None) -> EvaluationResult:
    """Train on the masked train slice, score metrics on the masked test slice.

    Zero-feature chromosomes never reach the solver and get the sentinel.
    """
    spec = decode(chromosome)
    if spec.feature_count == 0:
        return EvaluationResult(
            sensitivity=math.nan, specificity=math.nan, accuracy_product=math.nan,
            feature_count=0, fitness=EMPTY_MASK_FITNESS, spec=spec,
        )
    mask = spec.feature_mask
    try:
        model = svm.train(train_X[:, mask], train_y, spec.params, solver_cfg)
        predicted = model.predict(test_X[:, mask])
    except Exception as exc:
        raise FitnessEvaluationError(chromosome, exc) from exc
    metrics = svm.confusion_metrics(predicted, test_y)
    return EvaluationResult(
        sensitivity=metrics.sensitivity,
        specificity=metrics.specificity,
        accuracy_product=metrics.accuracy_product,
        feature_count=spec.feature_count,
        fitness=fitness_score(metrics.accuracy_product, spec.feature_count, weights),
        spec=spec,
    )
