"""Analytic-vs-numeric gradient verification.

Compares autograd gradients against central finite differences in float64.
Entries are subsampled per parameter tensor to keep the check tractable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import torch

from ..errors import GradCheckFailure

DEFAULT_EPS = 1e-3
DEFAULT_TOL = 1e-4


@dataclass
class GradCheckReport:
    max_rel_err: float = 0.0
    worst_param: str = ""
    checked_entries: int = 0
    per_param: List[Tuple[str, float]] = field(default_factory=list)


def _rel_err(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))


def grad_check(
    model: torch.nn.Module,
    loss_fn: Callable[[], torch.Tensor],
    eps: float = DEFAULT_EPS,
    tol: float = DEFAULT_TOL,
    entries_per_tensor: int = 3,
    seed: int = 0,
    raise_on_failure: bool = True,
    params: Optional[List[Tuple[str, torch.nn.Parameter]]] = None,
) -> GradCheckReport:
    """Verify d(loss)/d(param) for sampled entries of every parameter.

    The model must already be in float64 (``model.double()``); ``loss_fn``
    re-evaluates the loss from the model's current parameters.
    """
    if params is None:
        params = [(n, p) for n, p in model.named_parameters() if p.requires_grad]
    for _, p in params:
        if p.dtype != torch.float64:
            raise GradCheckFailure("grad_check requires float64 parameters")
    model.zero_grad(set_to_none=True)
    loss = loss_fn()
    loss.backward()
    gen = torch.Generator().manual_seed(seed)
    report = GradCheckReport()
    with torch.no_grad():
        for name, p in params:
            grad = p.grad if p.grad is not None else torch.zeros_like(p)
            flat = p.view(-1)
            n = flat.numel()
            picks = torch.randperm(n, generator=gen)[: min(entries_per_tensor, n)]
            worst = 0.0
            for idx in picks.tolist():
                orig = flat[idx].item()
                flat[idx] = orig + eps
                up = loss_fn().item()
                flat[idx] = orig - eps
                down = loss_fn().item()
                flat[idx] = orig
                numeric = (up - down) / (2.0 * eps)
                err = _rel_err(grad.view(-1)[idx].item(), numeric)
                worst = max(worst, err)
                report.checked_entries += 1
            report.per_param.append((name, worst))
            if worst > report.max_rel_err:
                report.max_rel_err = worst
                report.worst_param = name
    model.zero_grad(set_to_none=True)
    if raise_on_failure and report.max_rel_err > tol:
        raise GradCheckFailure(
            f"max relative gradient error {report.max_rel_err:.3e} on "
            f"{report.worst_param} exceeds {tol:.1e}"
        )
    return report
