"""Model hyperparameters and dimension bookkeeping."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

from ..errors import ConfigError


@dataclass
class ModelConfig:
    d: int = 128
    d_k: int = 16
    n_head: int = 8
    n_layers: int = 4
    max_hop: int = 4  # max atom-environment radius; 0 disables the local item
    k_hydrogen: int = 4  # hydrogen classes span -k..+k
    vocab_size: int = 1
    count_clip: int = 8
    max_degree: int = 8
    d_inf: float = 64.0
    n_reaction_types: int = 10
    max_gates: int = 4
    seed: int = 0
    reaction_type_known: bool = False
    mask_local: bool = False
    mask_global: bool = False
    tau_contrastive: float = 0.5
    positive_only_rcp: bool = False  # literal positive-sum objective variant

    def __post_init__(self) -> None:
        if self.d != self.d_k * self.n_head:
            raise ConfigError(
                f"d must equal d_k * n_head ({self.d} != {self.d_k} * {self.n_head})"
            )
        if not 0 <= self.max_hop <= 5:
            raise ConfigError("max_hop must be in [0, 5]")
        for name in ("d", "d_k", "n_head", "n_layers", "vocab_size", "k_hydrogen"):
            if getattr(self, name) < 1 and name != "n_layers":
                raise ConfigError(f"{name} must be positive")
        if self.n_layers < 0:
            raise ConfigError("n_layers must be non-negative")

    @property
    def n_hydrogen_classes(self) -> int:
        return 2 * self.k_hydrogen + 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)
