"""Uncertainty quantification and supervision over recorded model outputs.

Work with what a deployed network actually produced: record files holding
per-input softmax rows (or regression samples), quantifiers that turn them
into confidence or uncertainty scores, a threshold supervisor calibrated
to a target false positive rate, and joint model+supervisor evaluation.
No deep learning framework is imported anywhere in this package.
"""

from .analysis import (
    RankTable,
    SweepGrid,
    calibrated_evaluation,
    neighborhood_stats,
    rank_order,
    sample_size_sweep,
    sensitivity_correlation,
    stack_grids,
    truncate_samples,
)
from .errors import (
    CalibrationWarning,
    PreconditionError,
    RecordFormatError,
    UndefinedMetricError,
)
from .io import (
    read_config,
    read_grid,
    read_records,
    read_report,
    write_config,
    write_grid,
    write_pgm,
    write_records,
    write_report,
)
from .metrics import (
    ACCURACY,
    CUSTOM,
    MAXIMIZE,
    MEAN_SQUARED_ERROR,
    MINIMIZE,
    EvaluationReport,
    ObjectiveSpec,
    accuracy_objective,
    auroc,
    avgpr,
    binary_supervisor_metrics,
    correctness,
    evaluate_supervised,
    mse_objective,
    point_biserial,
    s_score,
)
from .quantifiers import (
    CONFIDENCE,
    MEAN_VAR,
    MI,
    MS,
    ORIENTATIONS,
    PCS,
    PE,
    POINT_QUANTIFIERS,
    PRED_VAR,
    QUANTIFIERS,
    REGRESSION_QUANTIFIERS,
    SAMPLED_QUANTIFIERS,
    SM,
    SME,
    UNCERTAINTY,
    VR,
    QuantifiedPrediction,
    applicable_quantifiers,
    max_softmax,
    mean_softmax,
    mean_variance,
    mutual_information,
    pcs,
    predictive_entropy,
    predictive_variance,
    quantify,
    quantify_dataset,
    softmax_entropy,
    variation_ratio,
)
from .records import (
    CLASSIFICATION,
    REGRESSION,
    SPLITS,
    Dataset,
    PredictionRecord,
    Violation,
    partition,
    validate_dataset,
)
from .supervisor import (
    ABOVE,
    AT_MOST,
    EPSILON_PRESETS,
    Decision,
    SupervisorConfig,
    apply,
    calibrate_threshold,
)
from .synth import gaussian_cluster_records

__version__ = "0.1.0"

__all__ = [
    "ABOVE", "ACCURACY", "AT_MOST", "CLASSIFICATION", "CONFIDENCE",
    "CUSTOM", "CalibrationWarning", "Dataset", "Decision",
    "EPSILON_PRESETS", "EvaluationReport", "MAXIMIZE", "MEAN_VAR",
    "MEAN_SQUARED_ERROR", "MI", "MINIMIZE", "MS", "ORIENTATIONS",
    "ObjectiveSpec", "PCS", "PE", "POINT_QUANTIFIERS", "PRED_VAR",
    "PreconditionError", "PredictionRecord", "QUANTIFIERS",
    "QuantifiedPrediction", "REGRESSION", "REGRESSION_QUANTIFIERS",
    "RankTable", "RecordFormatError", "SAMPLED_QUANTIFIERS", "SM",
    "SME", "SPLITS", "SupervisorConfig", "SweepGrid", "UNCERTAINTY",
    "UndefinedMetricError", "VR", "Violation", "accuracy_objective",
    "applicable_quantifiers", "apply", "auroc", "avgpr",
    "binary_supervisor_metrics", "calibrate_threshold",
    "calibrated_evaluation", "correctness", "evaluate_supervised",
    "gaussian_cluster_records", "max_softmax", "mean_softmax",
    "mean_variance", "mse_objective", "mutual_information",
    "neighborhood_stats", "partition", "pcs", "point_biserial",
    "predictive_entropy", "predictive_variance", "quantify",
    "quantify_dataset", "rank_order", "read_config", "read_grid",
    "read_records", "read_report", "s_score", "sample_size_sweep",
    "sensitivity_correlation", "stack_grids", "truncate_samples",
    "validate_dataset", "variation_ratio", "write_config", "write_grid",
    "write_pgm", "write_records", "write_report",
]
