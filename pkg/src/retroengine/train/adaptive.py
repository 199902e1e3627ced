"""Self-adaptive loss weighting.

Each task's weight is a temperature-softmax over loss descent rates, scaled
by the inverse of the task's initial loss:

    w_i = softmax_i(r_i / tau) * alpha_i,
    r_i = L_i^(t-1) / L_i^(t-2),   alpha_i = 1 / L_i^(0).

Rates are defined only from the third step on; earlier steps use r_i = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import torch

EPS_LOSS = 1e-8


@dataclass
class LossHistory:
    """Running per-task loss records needed by the weighting rule."""

    n_tasks: int
    initial: Optional[List[float]] = None
    prev: Optional[List[float]] = None
    prev2: Optional[List[float]] = None
    t: int = 0

    def record(self, losses: Sequence[float]) -> None:
        clamped = [max(float(x), EPS_LOSS) for x in losses]
        if len(clamped) != self.n_tasks:
            raise ValueError(f"expected {self.n_tasks} losses, got {len(clamped)}")
        if self.initial is None:
            self.initial = list(clamped)
        self.prev2 = self.prev
        self.prev = clamped
        self.t += 1

    @property
    def rates(self) -> List[float]:
        if self.t < 2 or self.prev is None or self.prev2 is None:
            return [1.0] * self.n_tasks
        return [a / b for a, b in zip(self.prev, self.prev2)]

    @property
    def alphas(self) -> List[float]:
        if self.initial is None:
            return [1.0] * self.n_tasks
        return [1.0 / x for x in self.initial]


def softmax_factors(history: LossHistory, tau: float) -> torch.Tensor:
    rates = torch.tensor(history.rates, dtype=torch.float64)
    return torch.softmax(rates / tau, dim=0)


def adaptive_weights(
    history: LossHistory, tau: float = 1.0, bypass: bool = False
) -> torch.Tensor:
    """Per-task weights; ``bypass`` (the no-self-adaptive ablation) gives 1s."""
    if bypass:
        return torch.ones(history.n_tasks, dtype=torch.float64)
    factors = softmax_factors(history, tau)
    return factors * torch.tensor(history.alphas, dtype=torch.float64)
