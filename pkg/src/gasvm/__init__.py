"""GA-SVM hybrid: joint feature selection and RBF-SVM hyperparameter search."""

__version__ = "0.1.0"

from .dataset import (
    Dataset,
    FoldSplit,
    Record,
    binarize_usage,
    build_matrix,
    load_records,
    parse_records,
    predictor_names,
    stratified_folds,
    user_counts,
)
from .fitness import (
    EvaluationResult,
    FitnessWeights,
    ModelSpec,
    accuracy,
    chromosome_bounds,
    decode,
    encode,
    evaluate,
    fitness_score,
)
from .ga import GaConfig, GaResult, GeneBounds, evolve, initialize_population
from .svm import (
    ConfusionMetrics,
    SolverConfig,
    SvmParams,
    TrainedSvm,
    confusion_metrics,
    rbf_kernel,
    train,
)
from .stats import TestResult, pairwise_matrix, welch_t_test
from .experiments import (
    PAPER_CONDITIONS,
    ExperimentConfig,
    RunRecord,
    baseline_svm,
    best_models,
    convergence_curves,
    feature_frequency,
    fold_averages,
    run_condition,
    run_experiment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
