"""Joint training loop with self-adaptive loss weighting and ablations."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import torch

from ..errors import ConfigError, NumericsError
from ..model import LossBreakdown, ModelConfig, RetroModel, TrainSample
from ..model.model import HeadTensors
from .adaptive import LossHistory, adaptive_weights

TASK_NAMES = ("bond", "hydrogen", "lg", "lgc")


@dataclass
class TrainConfig:
    steps: int = 400
    batch_size: int = 4
    optimizer: str = "adam"  # "adam" | "sgd" (sgd uses ``momentum``)
    learning_rate: float = 1e-3
    momentum: float = 0.9
    tau_weights: float = 1.0
    fuse_rcp: bool = True  # weight bond+hydrogen as one task (3 tasks total)
    no_CL: bool = False  # drop the contrastive matching term
    no_SA: bool = False  # unit weights instead of self-adaptive ones
    no_JL: bool = False  # separate encoders per task group
    seed: int = 0
    log_path: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("steps", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("learning_rate", "tau_weights"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 <= self.momentum < 1:
            raise ConfigError("momentum must be in [0, 1)")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")

    def make_optimizer(self, params) -> torch.optim.Optimizer:
        if self.optimizer == "sgd":
            return torch.optim.SGD(
                params, lr=self.learning_rate, momentum=self.momentum
            )
        return torch.optim.Adam(params, lr=self.learning_rate)

    @property
    def groups(self) -> List[Tuple[str, Tuple[str, ...]]]:
        if self.fuse_rcp:
            return [("rcp", ("bond", "hydrogen")), ("lg", ("lg",)), ("lgc", ("lgc",))]
        return [(n, (n,)) for n in TASK_NAMES]


@dataclass
class StepRecord:
    step: int
    losses: Dict[str, float]
    weights: List[float]
    total: float


@dataclass
class TrainLog:
    records: List[StepRecord] = field(default_factory=list)

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("step\tL_B\tL_H\tL_lg\tL_lgc\tweights\ttotal\n")
            for r in self.records:
                weights = ",".join(f"{w:.6g}" for w in r.weights)
                fh.write(
                    f"{r.step}\t{r.losses['bond']:.6g}\t{r.losses['hydrogen']:.6g}"
                    f"\t{r.losses['lg']:.6g}\t{r.losses['lgc']:.6g}"
                    f"\t{weights}\t{r.total:.6g}\n"
                )


class SplitModel:
    """One independently-trained model per task group (no-joint-learning
    ablation).  Presents the same inference surface as RetroModel."""

    def __init__(self, config: ModelConfig, vocab, groups):
        self.config = config
        self.vocab = vocab
        self.groups = groups
        self.models: Dict[str, RetroModel] = {}
        for offset, (name, _) in enumerate(groups):
            sub_cfg = ModelConfig.from_dict(
                {**config.to_dict(), "seed": config.seed + offset}
            )
            self.models[name] = RetroModel(sub_cfg, vocab)

    def _model_for(self, task: str) -> RetroModel:
        for name, tasks in self.groups:
            if task in tasks:
                return self.models[name]
        raise KeyError(task)

    def eval(self) -> None:
        for m in self.models.values():
            m.eval()

    def head_tensors(self, g, reaction_type=None) -> HeadTensors:
        m_bond = self._model_for("bond")
        m_hydro = self._model_for("hydrogen")
        m_lg = self._model_for("lg")
        m_lgc = self._model_for("lgc")
        enc_cache: Dict[int, object] = {}

        def enc(m: RetroModel):
            key = id(m)
            if key not in enc_cache:
                enc_cache[key] = m.encode_product(g, reaction_type)
            return enc_cache[key]

        return HeadTensors(
            p_bond=m_bond.bond_head.probs(enc(m_bond)),
            p_hydro=m_hydro.hydrogen_head.probs(enc(m_hydro)),
            lg_probs=torch.softmax(
                m_lg.lgm_head.logits(enc(m_lg), mode="product"), dim=-1
            ),
            ctx={"lgc_model": m_lgc, "lgc_enc": enc(m_lgc)},
        )

    def conn_probs(self, tensors: HeadTensors, lg_id: int):
        m_lgc: RetroModel = tensors.ctx["lgc_model"]
        lg_enc = m_lgc.encode_lg(lg_id)
        if lg_enc is None:
            return None
        return m_lgc.lgc_head.probs(tensors.ctx["lgc_enc"], lg_enc[1])

    def lg_graph(self, lg_id: int):
        return self._model_for("lg").lg_graph(lg_id)


def build_model(model_config: ModelConfig, vocab, train_config: TrainConfig):
    """RetroModel, or a SplitModel under the no-joint-learning ablation."""
    torch.manual_seed(train_config.seed)
    if train_config.no_JL:
        return SplitModel(model_config, vocab, train_config.groups)
    return RetroModel(model_config, vocab)


def _mean_losses(
    model: RetroModel, batch: Sequence[TrainSample], use_contrastive: bool
) -> Dict[str, torch.Tensor]:
    sums: Dict[str, torch.Tensor] = {}
    for sample in batch:
        breakdown = model.sample_losses(sample, use_contrastive=use_contrastive)
        for name, value in breakdown.named().items():
            sums[name] = sums.get(name, 0.0) + value
    return {name: value / len(batch) for name, value in sums.items()}


def _batches(samples: List[TrainSample], config: TrainConfig):
    rng = random.Random(config.seed)
    order = list(range(len(samples)))
    while True:
        rng.shuffle(order)
        for start in range(0, len(order), config.batch_size):
            chunk = order[start : start + config.batch_size]
            if chunk:
                yield [samples[i] for i in chunk]


def train_model(
    model,
    samples: List[TrainSample],
    config: TrainConfig,
) -> TrainLog:
    """Train in place; returns the per-step metrics log.

    ``model`` is a RetroModel, or a SplitModel under the no-joint-learning
    ablation (each sub-model then optimizes only its own task group).
    """
    torch.manual_seed(config.seed)
    log = TrainLog()
    groups = config.groups
    if isinstance(model, SplitModel):
        optimizers = {
            name: config.make_optimizer(model.models[name].parameters())
            for name, _ in groups
        }
    else:
        optimizer = config.make_optimizer(model.parameters())
    history = LossHistory(n_tasks=len(groups))
    batches = _batches(samples, config)

    for step in range(config.steps):
        batch = next(batches)
        if isinstance(model, SplitModel):
            losses: Dict[str, torch.Tensor] = {}
            total_val = 0.0
            for name, tasks in groups:
                sub = model.models[name]
                sub_losses = _mean_losses(sub, batch, not config.no_CL)
                group_loss = sum(sub_losses[t] for t in tasks)
                optimizers[name].zero_grad(set_to_none=True)
                group_loss.backward()
                optimizers[name].step()
                for t in tasks:
                    losses[t] = sub_losses[t].detach()
                total_val += float(group_loss.detach())
            weights = [1.0] * len(groups)
            history.record(
                [sum(float(losses[t]) for t in tasks) for _, tasks in groups]
            )
            total_t = total_val
        else:
            losses = _mean_losses(model, batch, not config.no_CL)
            group_tensors = [
                sum(losses[t] for t in tasks) for _, tasks in groups
            ]
            history.record([float(g.detach()) for g in group_tensors])
            weights = adaptive_weights(
                history, tau=config.tau_weights, bypass=config.no_SA
            ).tolist()
            total = sum(w * g for w, g in zip(weights, group_tensors))
            if not torch.isfinite(total):
                raise NumericsError(f"non-finite training loss at step {step}")
            optimizer.zero_grad(set_to_none=True)
            total.backward()
            optimizer.step()
            total_t = float(total.detach())
        log.records.append(
            StepRecord(
                step=step,
                losses={name: float(losses[name].detach()) for name in TASK_NAMES},
                weights=list(weights),
                total=total_t,
            )
        )
    if config.log_path:
        log.write(config.log_path)
    return log
