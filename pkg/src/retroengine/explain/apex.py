"""Atom-perturbation explanations and attention-bias analysis.

Atom masking zeroes the atom's embedding row and its bias row/column (the
graph keeps its size, so losses stay comparable); the contribution score is
the relative loss change under each mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import torch

from ..chem import MolGraph
from ..errors import DegenerateLoss, ModeError
from ..model import ModelConfig, RetroModel, TrainSample, featurize

EPS_LOSS = 1e-8

APEX_TASKS = ("bond", "hydrogen", "lg", "lgc", "rcp", "overall")


@dataclass
class ContributionGraph:
    task: str
    baseline_loss: float
    scores: List[float]  # one per atom: (L_masked - L_0) / L_0


@dataclass
class TypeTraceResult:
    vectors: List[List[float]]  # (N, n_types) per-atom contributions
    hard_labels: List[int]  # argmax type (1-based)
    soft_labels: List[List[float]]  # non-negative, row sums 1


@dataclass
class HeadHeatmap:
    head: int
    rv: float
    label: str  # global-dominated | local-dominated | mixed
    bias: torch.Tensor  # (N, N)
    global_item: torch.Tensor  # (N, N)


@dataclass
class HeatmapReport:
    entries: List[HeadHeatmap]  # sorted by RV descending


def _task_loss(
    model: RetroModel,
    sample: TrainSample,
    task: str,
    weights: Optional[Sequence[float]] = None,
    mask_atom: Optional[int] = None,
) -> torch.Tensor:
    breakdown = model.sample_losses(sample, mask_atom=mask_atom)
    named = breakdown.named()
    if task in named:
        return named[task]
    if task == "rcp":
        return named["bond"] + named["hydrogen"]
    if task == "overall":
        w = list(weights) if weights is not None else [1.0] * 4
        return sum(wi * named[n] for wi, n in zip(w, ("bond", "hydrogen", "lg", "lgc")))
    raise ValueError(f"unknown task {task!r}; expected one of {APEX_TASKS}")


def apex_contributions(
    sample: TrainSample,
    model: RetroModel,
    task: str = "overall",
    weights: Optional[Sequence[float]] = None,
) -> ContributionGraph:
    """Per-atom relative loss change under masking, for one task.

    ``weights`` are the frozen per-task weights used by the overall task
    (typically the last recorded adaptive weights of the checkpoint).
    """
    model.eval()
    with torch.no_grad():
        l0 = float(_task_loss(model, sample, task, weights))
        if l0 <= EPS_LOSS:
            raise DegenerateLoss(f"baseline {task} loss {l0:.3e} is degenerate")
        scores = []
        for v in range(sample.product.n_atoms):
            lv = float(_task_loss(model, sample, task, weights, mask_atom=v))
            scores.append((lv - l0) / l0)
    return ContributionGraph(task=task, baseline_loss=l0, scores=scores)


def reaction_type_trace(
    sample: TrainSample,
    model: RetroModel,
    task: str = "overall",
    weights: Optional[Sequence[float]] = None,
) -> TypeTraceResult:
    """APEX once per mutated reaction type; per-atom contribution vectors."""
    if not model.config.reaction_type_known:
        raise ModeError("model was not trained in reaction-type-known mode")
    n_types = model.config.n_reaction_types
    columns = []
    for rtype in range(1, n_types + 1):
        mutated = TrainSample(
            record_id=sample.record_id,
            product=sample.product,
            labels=sample.labels,
            lg_id=sample.lg_id,
            reaction_type=rtype,
            features=sample.features,
            reactants_canonical=sample.reactants_canonical,
        )
        columns.append(apex_contributions(mutated, model, task, weights).scores)
    n_atoms = sample.product.n_atoms
    vectors = [[columns[t][v] for t in range(n_types)] for v in range(n_atoms)]
    hard = [max(range(n_types), key=lambda t: vec[t]) + 1 for vec in vectors]
    soft = []
    for vec in vectors:
        clipped = [max(x, 0.0) for x in vec]
        total = sum(clipped)
        if total <= 0.0:
            soft.append([1.0 / n_types] * n_types)
        else:
            soft.append([x / total for x in clipped])
    return TypeTraceResult(vectors=vectors, hard_labels=hard, soft_labels=soft)


def rv_coefficient(x: torch.Tensor, y: torch.Tensor) -> float:
    """Configuration-matrix RV on column-centered matrices."""
    xc = (x - x.mean(dim=0, keepdim=True)).double()
    yc = (y - y.mean(dim=0, keepdim=True)).double()
    num = float(torch.trace(xc.T @ yc))
    den = float(torch.trace(xc.T @ xc)) * float(torch.trace(yc.T @ yc))
    if den <= 0.0:
        return 0.0
    return num / den**0.5


def classify_rv(rv: float) -> str:
    if rv > 0.90:
        return "global-dominated"
    if rv < 0.10:
        return "local-dominated"
    return "mixed"


def attention_heatmaps(g: MolGraph, model: RetroModel) -> HeatmapReport:
    """Per-head structural bias vs its pure-RBF global item."""
    model.eval()
    with torch.no_grad():
        features = featurize(g, model.config)
        n = features.n_atoms
        bias = model.encoder.attention_bias(features)[:, :n, :n]
        global_item = model.encoder.global_item_matrix(features)
        entries = []
        for head in range(model.config.n_head):
            if model.config.mask_global:
                rv = 0.0
                label = "local-dominated"
            else:
                rv = rv_coefficient(bias[head], global_item[head])
                label = classify_rv(rv)
            entries.append(
                HeadHeatmap(
                    head=head,
                    rv=rv,
                    label=label,
                    bias=bias[head].clone(),
                    global_item=global_item[head].clone(),
                )
            )
    entries.sort(key=lambda e: -e.rv)
    return HeatmapReport(entries=entries)
