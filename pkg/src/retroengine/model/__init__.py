from .config import ModelConfig
from .encoder import EncodedGraph, GraphEncoder, rbf
from .featurize import ELEMENTS, GraphFeatures, featurize
from .heads import (
    BondChangeHead,
    HydrogenHead,
    LGCHead,
    LGMHead,
    LossBreakdown,
    bond_loss,
    hydrogen_loss,
    lg_loss,
    lgc_loss,
)
from .model import HeadTensors, RetroModel, TrainSample, make_sample
from .checkpoint import (
    check_compatible,
    load_checkpoint,
    load_model,
    save_checkpoint,
)
from .gradcheck import GradCheckReport, grad_check

__all__ = [
    "ModelConfig",
    "EncodedGraph",
    "GraphEncoder",
    "rbf",
    "ELEMENTS",
    "GraphFeatures",
    "featurize",
    "BondChangeHead",
    "HydrogenHead",
    "LGCHead",
    "LGMHead",
    "LossBreakdown",
    "bond_loss",
    "hydrogen_loss",
    "lg_loss",
    "lgc_loss",
    "HeadTensors",
    "RetroModel",
    "TrainSample",
    "make_sample",
    "check_compatible",
    "load_checkpoint",
    "load_model",
    "save_checkpoint",
    "GradCheckReport",
    "grad_check",
]
