"""Bias-augmented graph-attention encoder.

Attention scores are semantic (QK) scores plus a structural bias: a per-head
lookup over multi-sense walk counts (local item) and a per-head Gaussian RBF
over topological distances (global item).  A virtual super node, attached to
every atom through a learned per-head bias, carries the graph-level
representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import torch
from torch import nn

from ..chem import K_B, MolGraph
from ..errors import NumericsError
from .config import ModelConfig
from .featurize import ELEMENTS, CHARGE_RANGE, GraphFeatures, featurize

RBF_STD_FLOOR = 1e-2


@dataclass
class EncodedGraph:
    node_reps: torch.Tensor  # (N, d)
    graph_rep: torch.Tensor  # (d,)
    bias: torch.Tensor  # (n_head, N+1, N+1)

    @property
    def n_atoms(self) -> int:
        return self.node_reps.shape[0]


def rbf(dist: torch.Tensor, mean: torch.Tensor, std: torch.Tensor) -> torch.Tensor:
    """Gaussian radial basis value, std clamped away from zero."""
    std = std.clamp_min(RBF_STD_FLOOR)
    return torch.exp(-((dist - mean) ** 2) / (2.0 * std**2)) / (
        math.sqrt(2.0 * math.pi) * std
    )


class EncoderLayer(nn.Module):
    """Pre-norm residual attention block plus feed-forward propagation."""

    def __init__(self, d: int, n_head: int, d_k: int):
        super().__init__()
        self.n_head = n_head
        self.d_k = d_k
        self.ln_attn = nn.LayerNorm(d)
        self.w_q = nn.Linear(d, n_head * d_k, bias=False)
        self.w_k = nn.Linear(d, n_head * d_k, bias=False)
        self.w_v = nn.Linear(d, n_head * d_k, bias=False)
        self.w_o = nn.Linear(n_head * d_k, d)
        self.ln_ff = nn.LayerNorm(d)
        self.ff = nn.Sequential(nn.Linear(d, 4 * d), nn.GELU(), nn.Linear(4 * d, d))

    def forward(self, x: torch.Tensor, bias: torch.Tensor) -> torch.Tensor:
        n = x.shape[0]
        h = self.ln_attn(x)
        q = self.w_q(h).view(n, self.n_head, self.d_k).transpose(0, 1)
        k = self.w_k(h).view(n, self.n_head, self.d_k).transpose(0, 1)
        v = self.w_v(h).view(n, self.n_head, self.d_k).transpose(0, 1)
        scores = q @ k.transpose(1, 2) / math.sqrt(self.d_k) + bias
        attn = torch.softmax(scores, dim=-1)
        mixed = (attn @ v).transpose(0, 1).reshape(n, -1)
        x = x + self.w_o(mixed)
        x = x + self.ff(self.ln_ff(x))
        return x


class GraphEncoder(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        d = config.d
        self.element_embed = nn.Embedding(len(ELEMENTS), d)
        self.charge_embed = nn.Embedding(2 * CHARGE_RANGE + 1, d)
        self.hcount_embed = nn.Embedding(config.max_degree + 1, d)
        self.aromatic_embed = nn.Embedding(2, d)
        self.ring_embed = nn.Embedding(2, d)
        self.degree_embed = nn.Embedding(config.max_degree + 1, d)
        self.super_embed = nn.Parameter(torch.zeros(d))
        self.rtype_embed = nn.Embedding(config.n_reaction_types, d)
        # Local item: per sense, hop and clipped count, one scalar per head.
        self.bias_tables = nn.Parameter(
            torch.zeros(K_B, max(config.max_hop, 1), config.count_clip + 1, config.n_head)
        )
        # Global item: per-head Gaussian over topological distance.
        self.rbf_mean = nn.Parameter(torch.zeros(config.n_head))
        self.rbf_std = nn.Parameter(torch.ones(config.n_head))
        self.virtual_bias = nn.Parameter(torch.zeros(config.n_head))
        self.layers = nn.ModuleList(
            EncoderLayer(d, config.n_head, config.d_k) for _ in range(config.n_layers)
        )
        self.final_norm = nn.LayerNorm(d)
        self.reset_parameters()

    def reset_parameters(self) -> None:
        gen = torch.Generator().manual_seed(self.config.seed)

        def uniform_(t: torch.Tensor, scale: float) -> None:
            with torch.no_grad():
                t.copy_(
                    (torch.rand(t.shape, generator=gen) * 2.0 - 1.0) * scale
                )

        scale = 1.0 / math.sqrt(self.config.d)
        for table in (
            self.element_embed,
            self.charge_embed,
            self.hcount_embed,
            self.aromatic_embed,
            self.ring_embed,
            self.degree_embed,
            self.rtype_embed,
        ):
            uniform_(table.weight, scale)
        uniform_(self.super_embed, scale)
        uniform_(self.bias_tables, 0.1)
        with torch.no_grad():
            # Means spread over the representable distance range per head.
            self.rbf_mean.copy_(
                torch.linspace(0.0, self.config.d_inf, self.config.n_head)
            )
            self.rbf_std.fill_(max(1.0, self.config.d_inf / self.config.n_head))
            self.virtual_bias.zero_()
        for layer in self.layers:
            for lin in (layer.w_q, layer.w_k, layer.w_v, layer.w_o, layer.ff[0], layer.ff[2]):
                uniform_(lin.weight, 1.0 / math.sqrt(lin.weight.shape[1]))
                if lin.bias is not None:
                    with torch.no_grad():
                        lin.bias.zero_()

    @property
    def dtype(self) -> torch.dtype:
        return self.super_embed.dtype

    def embed_nodes(
        self,
        features: GraphFeatures,
        reaction_type: Optional[int] = None,
    ) -> torch.Tensor:
        """Initial (N+1, d) rows: feature-sum per atom, learned super row."""
        f = features.atom_features
        rows = (
            self.element_embed(f[:, 0])
            + self.charge_embed(f[:, 1])
            + self.hcount_embed(f[:, 2])
            + self.aromatic_embed(f[:, 3])
            + self.ring_embed(f[:, 4])
            + self.degree_embed(features.degrees)
        )
        super_row = self.super_embed
        if reaction_type is not None:
            if not 1 <= reaction_type <= self.config.n_reaction_types:
                raise ValueError(f"reaction type {reaction_type} out of range")
            super_row = super_row + self.rtype_embed.weight[reaction_type - 1]
        return torch.cat([rows, super_row.unsqueeze(0)], dim=0)

    def attention_bias(self, features: GraphFeatures) -> torch.Tensor:
        """(n_head, N+1, N+1) structural bias; super pairs get the virtual bias."""
        n = features.n_atoms
        n_head = self.config.n_head
        local = torch.zeros(n, n, n_head, dtype=self.dtype)
        if self.config.max_hop > 0 and not self.config.mask_local:
            counts = features.walk_counts  # (K_b, K_r, N, N)
            for i in range(counts.shape[0]):
                for j in range(counts.shape[1]):
                    local = local + self.bias_tables[i, j][counts[i, j]]
        global_item = torch.zeros(n, n, n_head, dtype=self.dtype)
        if not self.config.mask_global:
            dist = features.distances.to(self.dtype).unsqueeze(-1)  # (N, N, 1)
            global_item = rbf(dist, self.rbf_mean, self.rbf_std)
        bias = (local + global_item).permute(2, 0, 1)  # (n_head, N, N)
        full = torch.zeros(n_head, n + 1, n + 1, dtype=self.dtype)
        full[:, :n, :n] = bias
        full[:, n, :] = self.virtual_bias.view(-1, 1)
        full[:, :, n] = self.virtual_bias.view(-1, 1)
        return full

    def global_item_matrix(self, features: GraphFeatures) -> torch.Tensor:
        """(n_head, N, N) pure RBF term, for head-dominance analysis."""
        dist = features.distances.to(self.dtype).unsqueeze(-1)
        return rbf(dist, self.rbf_mean, self.rbf_std).permute(2, 0, 1)

    def encode(
        self,
        g: MolGraph,
        reaction_type: Optional[int] = None,
        mask_atom: Optional[int] = None,
        features: Optional[GraphFeatures] = None,
    ) -> EncodedGraph:
        if features is None:
            features = featurize(g, self.config)
        n = features.n_atoms
        x = self.embed_nodes(features, reaction_type)
        bias = self.attention_bias(features)
        if mask_atom is not None:
            keep = torch.ones(n + 1, 1, dtype=self.dtype)
            keep[mask_atom] = 0.0
            x = x * keep
            bias_keep = torch.ones(n + 1, dtype=self.dtype)
            bias_keep[mask_atom] = 0.0
            bias = bias * bias_keep.view(1, -1, 1) * bias_keep.view(1, 1, -1)
        for layer in self.layers:
            x = layer(x, bias)
        x = self.final_norm(x)
        if not torch.isfinite(x).all():
            raise NumericsError("non-finite values in encoder output")
        return EncodedGraph(node_reps=x[:n], graph_rep=x[n], bias=bias)
