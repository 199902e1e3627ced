from .adaptive import EPS_LOSS, LossHistory, adaptive_weights, softmax_factors
from .eval import DEFAULT_K_LIST, TopkTable, evaluate_topk
from .pipeline import PrepareReport, prepare_samples, vocab_from_records
from .loop import (
    SplitModel,
    StepRecord,
    TASK_NAMES,
    TrainConfig,
    TrainLog,
    build_model,
    train_model,
)

__all__ = [
    "EPS_LOSS",
    "LossHistory",
    "adaptive_weights",
    "softmax_factors",
    "PrepareReport",
    "prepare_samples",
    "vocab_from_records",
    "DEFAULT_K_LIST",
    "TopkTable",
    "evaluate_topk",
    "SplitModel",
    "StepRecord",
    "TASK_NAMES",
    "TrainConfig",
    "TrainLog",
    "build_model",
    "train_model",
]
