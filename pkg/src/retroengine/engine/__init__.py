from .predict import (
    ACTION_ORDER,
    BeamConfig,
    Candidate,
    EnergyTrace,
    evaluate_query,
    gate_addresses,
    neg_ln,
    predict_single_step,
    score_assignment,
)
from .surgery import apply_edits

__all__ = [
    "ACTION_ORDER",
    "BeamConfig",
    "Candidate",
    "EnergyTrace",
    "apply_edits",
    "evaluate_query",
    "gate_addresses",
    "neg_ln",
    "predict_single_step",
    "score_assignment",
]
