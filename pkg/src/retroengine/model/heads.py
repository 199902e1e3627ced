"""Decision heads: reaction-center (bond + hydrogen), leaving-group matching
(with train-time contrastive mode) and leaving-group connection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import torch
from torch import nn

from .config import ModelConfig
from .encoder import EncodedGraph


class PairScoreHead(nn.Module):
    """Multi-head bilinear pair scorer: concatenated per-head QK scores
    aggregated by a linear map into one logit per pair."""

    def __init__(self, d: int, n_head: int, d_k: int):
        super().__init__()
        self.n_head = n_head
        self.d_k = d_k
        self.w_q = nn.Linear(d, n_head * d_k, bias=False)
        self.w_k = nn.Linear(d, n_head * d_k, bias=False)
        self.w_out = nn.Linear(n_head, 1)

    def pair_logits(self, left: torch.Tensor, right: torch.Tensor) -> torch.Tensor:
        """(L, R) logits from (L, d) and (R, d) representations."""
        l, r = left.shape[0], right.shape[0]
        q = self.w_q(left).view(l, self.n_head, self.d_k).transpose(0, 1)
        k = self.w_k(right).view(r, self.n_head, self.d_k).transpose(0, 1)
        scores = q @ k.transpose(1, 2) / math.sqrt(self.d_k)  # (n_head, L, R)
        return self.w_out(scores.permute(1, 2, 0)).squeeze(-1)


class BondChangeHead(nn.Module):
    """Symmetric bond-change logits over atom pairs."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.scorer = PairScoreHead(config.d, config.n_head, config.d_k)

    def logits(self, enc: EncodedGraph) -> torch.Tensor:
        s = self.scorer.pair_logits(enc.node_reps, enc.node_reps)
        return (s + s.T) / 2.0

    def probs(self, enc: EncodedGraph) -> torch.Tensor:
        return torch.sigmoid(self.logits(enc))


class HydrogenHead(nn.Module):
    """Per-atom hydrogen-delta classification over 2k+1 classes."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.w_atom = nn.Linear(config.d, config.n_hydrogen_classes)

    def logits(self, enc: EncodedGraph) -> torch.Tensor:
        return self.w_atom(enc.node_reps)

    def probs(self, enc: EncodedGraph) -> torch.Tensor:
        return torch.softmax(self.logits(enc), dim=-1)


class LGMHead(nn.Module):
    """Leaving-group matching over the vocabulary, from the super-node row.

    ``contrastive_lg`` mode decorates the (leaving-group) graph representation
    with the contrastive token; it is a train-time-only augmentation.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.w_lg = nn.Linear(config.d, config.vocab_size, bias=False)
        self.contrast_token = nn.Parameter(torch.zeros(config.d))

    def logits(self, enc: EncodedGraph, mode: str = "product") -> torch.Tensor:
        if mode == "product":
            rep = enc.graph_rep
        elif mode == "contrastive_lg":
            rep = enc.graph_rep + self.contrast_token
        else:
            raise ValueError(f"unknown LGM mode {mode!r}")
        return self.w_lg(rep)


class LGCHead(nn.Module):
    """Gate-to-product-atom connection probabilities.

    Each gate atom is represented by its encoded wildcard-node row
    concatenated with a learned gate-slot embedding, then scored against
    product atoms with the same pair machinery as the bond head.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.gate_slots = nn.Embedding(config.max_gates, config.d)
        self.combine = nn.Linear(2 * config.d, config.d)
        self.scorer = PairScoreHead(config.d, config.n_head, config.d_k)
        self.max_gates = config.max_gates

    def gate_reps(self, gate_node_reps: torch.Tensor) -> torch.Tensor:
        m = gate_node_reps.shape[0]
        slots = self.gate_slots.weight[
            torch.arange(m).clamp(max=self.max_gates - 1)
        ].to(gate_node_reps.dtype)
        return self.combine(torch.cat([slots, gate_node_reps], dim=-1))

    def logits(self, enc_product: EncodedGraph, gate_node_reps: torch.Tensor) -> torch.Tensor:
        """(M', N) connection logits for M' gates against N product atoms."""
        return self.scorer.pair_logits(self.gate_reps(gate_node_reps), enc_product.node_reps)

    def probs(self, enc_product: EncodedGraph, gate_node_reps: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.logits(enc_product, gate_node_reps))


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------


@dataclass
class LossBreakdown:
    bond: torch.Tensor
    hydrogen: torch.Tensor
    lg: torch.Tensor
    lgc: torch.Tensor
    counts: dict

    def named(self) -> dict:
        return {
            "bond": self.bond,
            "hydrogen": self.hydrogen,
            "lg": self.lg,
            "lgc": self.lgc,
        }

    def total(self) -> torch.Tensor:
        return self.bond + self.hydrogen + self.lg + self.lgc


def bond_loss(
    logits: torch.Tensor,
    target: torch.Tensor,
    candidate_mask: torch.Tensor,
    positive_only: bool = False,
) -> torch.Tensor:
    """Binary cross-entropy over bonded candidate pairs (upper triangle)."""
    mask = torch.triu(candidate_mask, diagonal=1)
    if positive_only:
        mask = mask & (target > 0.5)
    if mask.sum() == 0:
        return logits.sum() * 0.0
    raw = nn.functional.binary_cross_entropy_with_logits(
        logits, target.to(logits.dtype), reduction="none"
    )
    return raw[mask].mean()


def hydrogen_loss(
    logits: torch.Tensor,
    target_classes: torch.Tensor,
    atom_mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """Categorical cross-entropy over atoms; classes ordered -k..+k."""
    if atom_mask is not None:
        if atom_mask.sum() == 0:
            return logits.sum() * 0.0
        logits = logits[atom_mask]
        target_classes = target_classes[atom_mask]
    return nn.functional.cross_entropy(logits, target_classes)


def lg_loss(
    product_logits: torch.Tensor,
    lg_logits: Optional[torch.Tensor],
    target: int,
    tau: float,
) -> torch.Tensor:
    """Temperature-softmax CE; contrastive term averaged in when present."""
    t = torch.tensor([target])
    terms = [
        nn.functional.cross_entropy(product_logits.unsqueeze(0) / tau, t)
    ]
    if lg_logits is not None:
        terms.append(nn.functional.cross_entropy(lg_logits.unsqueeze(0) / tau, t))
    return sum(terms) / len(terms)


def lgc_loss(logits: torch.Tensor, target_atoms: List[int]) -> torch.Tensor:
    """BCE over every (gate, product atom) pair; one positive per gate."""
    target = torch.zeros_like(logits)
    for gate_idx, atom_idx in enumerate(target_atoms):
        target[gate_idx, atom_idx] = 1.0
    return nn.functional.binary_cross_entropy_with_logits(logits, target)
