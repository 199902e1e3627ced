"""Full model bundle: shared encoder plus the three decision heads, with
leaving-group-vocabulary encoding and per-record loss computation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import torch
from torch import nn

from ..chem import MolGraph, parse_smiles
from ..data import EMPTY_LG, LeavingGroupVocab, RetroLabels
from ..errors import LabelError
from .config import ModelConfig
from .encoder import EncodedGraph, GraphEncoder
from .featurize import GraphFeatures, featurize
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


@dataclass
class TrainSample:
    """One supervised record, pre-parsed and featurized."""

    record_id: str
    product: MolGraph
    labels: RetroLabels
    lg_id: int
    reaction_type: Optional[int] = None
    features: Optional[GraphFeatures] = None
    reactants_canonical: Tuple[str, ...] = ()


@dataclass
class HeadTensors:
    """Inference-time head outputs for one product graph.

    ``ctx`` carries whatever the producing model needs to answer follow-up
    connection queries (e.g. the encoded product), so callers stay agnostic
    to whether heads share one encoder.
    """

    p_bond: torch.Tensor  # (N, N) symmetric change probabilities
    p_hydro: torch.Tensor  # (N, 2k+1) per-atom class probabilities
    lg_probs: torch.Tensor  # (|V_LG|,) vocabulary probabilities
    ctx: dict = field(default_factory=dict)


class RetroModel(nn.Module):
    """Encoder + bond/hydrogen/LG-matching/LG-connection heads."""

    def __init__(self, config: ModelConfig, vocab: LeavingGroupVocab):
        super().__init__()
        if config.vocab_size != len(vocab):
            config = ModelConfig.from_dict(
                {**config.to_dict(), "vocab_size": len(vocab)}
            )
        self.config = config
        self.vocab = vocab
        self.encoder = GraphEncoder(config)
        self.bond_head = BondChangeHead(config)
        self.hydrogen_head = HydrogenHead(config)
        self.lgm_head = LGMHead(config)
        self.lgc_head = LGCHead(config)
        self._lg_cache: Dict[int, Tuple[MolGraph, List[int]]] = {}

    # -- leaving-group graphs ------------------------------------------------

    def lg_graph(self, lg_id: int) -> Optional[Tuple[MolGraph, List[int]]]:
        """Parsed LG-entry graph and its gate atom indices in canonical gate
        order ((fragment, emission-position) ascending); None for the empty
        leaving group."""
        if lg_id in self._lg_cache:
            return self._lg_cache[lg_id]
        text = self.vocab.entries[lg_id].canonical
        if text == EMPTY_LG:
            self._lg_cache[lg_id] = None
            return None
        g = parse_smiles(text)
        gates = [i for i, a in enumerate(g.atoms) if a.is_wildcard]
        self._lg_cache[lg_id] = (g, gates)
        return self._lg_cache[lg_id]

    def encode_lg(self, lg_id: int) -> Optional[Tuple[EncodedGraph, torch.Tensor]]:
        """Encoded LG entry and its (M', d) gate-atom representations."""
        entry = self.lg_graph(lg_id)
        if entry is None:
            return None
        g, gates = entry
        enc = self.encoder.encode(g)
        return enc, enc.node_reps[gates]

    # -- forward passes ------------------------------------------------------

    def encode_product(
        self,
        g: MolGraph,
        reaction_type: Optional[int] = None,
        mask_atom: Optional[int] = None,
        features: Optional[GraphFeatures] = None,
    ) -> EncodedGraph:
        if not self.config.reaction_type_known:
            reaction_type = None
        return self.encoder.encode(
            g, reaction_type=reaction_type, mask_atom=mask_atom, features=features
        )

    def head_tensors(
        self, g: MolGraph, reaction_type: Optional[int] = None
    ) -> HeadTensors:
        """Decision-head probabilities for one product (inference path).

        The contrastive LGM mode is never used here; vocabulary scores are
        a plain softmax over product-mode logits.
        """
        enc = self.encode_product(g, reaction_type)
        return HeadTensors(
            p_bond=self.bond_head.probs(enc),
            p_hydro=self.hydrogen_head.probs(enc),
            lg_probs=torch.softmax(self.lgm_head.logits(enc, mode="product"), dim=-1),
            ctx={"enc": enc},
        )

    def conn_probs(self, tensors: HeadTensors, lg_id: int) -> Optional[torch.Tensor]:
        """(M', N) gate-connection probabilities, None for the empty LG."""
        lg_enc = self.encode_lg(lg_id)
        if lg_enc is None:
            return None
        return self.lgc_head.probs(tensors.ctx["enc"], lg_enc[1])

    def sample_losses(
        self,
        sample: TrainSample,
        mask_atom: Optional[int] = None,
        enc: Optional[EncodedGraph] = None,
        use_contrastive: bool = True,
    ) -> LossBreakdown:
        """The four supervised losses for one record."""
        g = sample.product
        labels = sample.labels
        if enc is None:
            enc = self.encode_product(
                g, sample.reaction_type, mask_atom=mask_atom, features=sample.features
            )
        m2i = g.map_to_index()
        n = g.n_atoms

        bond_logits = self.bond_head.logits(enc)
        target_b = torch.zeros(n, n)
        cand = torch.zeros(n, n, dtype=torch.bool)
        for (i, j) in g.bonds:
            cand[i, j] = cand[j, i] = True
        for edit in labels.rc_bonds:
            try:
                i, j = m2i[edit.u_map], m2i[edit.v_map]
            except KeyError as exc:
                raise LabelError(f"label atom map {exc} absent from product") from exc
            target_b[i, j] = target_b[j, i] = 1.0
        l_b = bond_loss(
            bond_logits, target_b, cand, positive_only=self.config.positive_only_rcp
        )

        k = self.config.k_hydrogen
        target_h = torch.full((n,), k, dtype=torch.long)
        for amap, delta in labels.h_delta.items():
            if amap not in m2i:
                raise LabelError(f"hydrogen label map {amap} absent from product")
            target_h[m2i[amap]] = delta + k
        l_h = hydrogen_loss(self.hydrogen_head.logits(enc), target_h)

        product_logits = self.lgm_head.logits(enc, mode="product")
        lg_enc = self.encode_lg(sample.lg_id)
        contrast_logits = None
        if lg_enc is not None and use_contrastive:
            contrast_logits = self.lgm_head.logits(lg_enc[0], mode="contrastive_lg")
        l_lg = lg_loss(
            product_logits, contrast_logits, sample.lg_id, self.config.tau_contrastive
        )

        n_gates = 0
        if lg_enc is not None and labels.gate_connections:
            conns = sorted(
                labels.gate_connections, key=lambda c: (c.fragment_idx, c.gate_idx)
            )
            gate_reps = lg_enc[1]
            if len(conns) != gate_reps.shape[0]:
                raise LabelError(
                    f"{len(conns)} gate labels for {gate_reps.shape[0]} gates"
                )
            targets = []
            for c in conns:
                if c.product_map not in m2i:
                    raise LabelError(f"gate target map {c.product_map} absent")
                targets.append(m2i[c.product_map])
            lgc_logits = self.lgc_head.logits(enc, gate_reps)
            l_lgc = lgc_loss(lgc_logits, targets)
            n_gates = len(targets)
        else:
            l_lgc = l_b * 0.0

        return LossBreakdown(
            bond=l_b,
            hydrogen=l_h,
            lg=l_lg,
            lgc=l_lgc,
            counts={"bonds": len(g.bonds), "atoms": n, "gates": n_gates},
        )


def make_sample(
    record_id: str,
    product: MolGraph,
    labels: RetroLabels,
    lg_id: int,
    config: ModelConfig,
    reaction_type: Optional[int] = None,
    reactants_canonical: Tuple[str, ...] = (),
) -> TrainSample:
    return TrainSample(
        record_id=record_id,
        product=product,
        labels=labels,
        lg_id=lg_id,
        reaction_type=reaction_type,
        features=featurize(product, config),
        reactants_canonical=reactants_canonical,
    )
