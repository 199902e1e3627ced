"""Top-k accuracy evaluation, overall and per subtask."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import torch

from ..engine import BeamConfig, predict_single_step
from ..engine.predict import _bond_variants, _gate_assignments, _ensure_maps, neg_ln
from ..errors import EmptyBeamError
from ..model import TrainSample

DEFAULT_K_LIST = (1, 3, 5, 10)


@dataclass
class TopkTable:
    k_list: Tuple[int, ...]
    hits: Dict[str, Dict[int, int]] = field(default_factory=dict)
    total: int = 0

    def accuracy(self, task: str, k: int) -> float:
        return self.hits[task][k] / self.total if self.total else 0.0

    def as_dict(self) -> Dict[str, Dict[int, float]]:
        return {
            task: {k: self.accuracy(task, k) for k in self.k_list}
            for task in self.hits
        }


def _hydrogen_assignments(
    p_hydro: torch.Tensor, max_k: int
) -> List[Tuple[int, ...]]:
    """Argmax assignment plus best single-atom deviations, by joint prob."""
    base = p_hydro.argmax(dim=-1)
    assignments = [tuple(base.tolist())]
    deviations = []
    for v in range(p_hydro.shape[0]):
        order = torch.argsort(p_hydro[v], descending=True, stable=True)
        for alt in order[1:].tolist():
            cost = neg_ln(p_hydro[v, alt].item()) - neg_ln(
                p_hydro[v, base[v]].item()
            )
            cand = list(base.tolist())
            cand[v] = alt
            deviations.append((cost, tuple(cand)))
    deviations.sort(key=lambda x: x[0])
    assignments.extend(c for _, c in deviations)
    return assignments[:max_k]


def evaluate_topk(
    model,
    samples: Sequence[TrainSample],
    k_list: Tuple[int, ...] = DEFAULT_K_LIST,
    beam: Optional[BeamConfig] = None,
) -> TopkTable:
    """Overall accuracy via full prediction; subtasks against labels."""
    k_list = tuple(sorted(k_list))
    max_k = k_list[-1]
    beam = beam or BeamConfig(k_out=max_k)
    tasks = ("overall", "bond", "hydrogen", "lg", "lgc")
    table = TopkTable(k_list=k_list, hits={t: {k: 0 for k in k_list} for t in tasks})
    model.eval()
    k_h = model.config.k_hydrogen
    for sample in samples:
        table.total += 1
        product = _ensure_maps(sample.product)
        m2i = product.map_to_index()
        rtype = sample.reaction_type if model.config.reaction_type_known else None
        with torch.no_grad():
            tensors = model.head_tensors(product, rtype)
            pairs = sorted(product.bonds)

            truth_bonds = frozenset(
                tuple(sorted((m2i[e.u_map], m2i[e.v_map])))
                for e in sample.labels.rc_bonds
            )
            variants = _bond_variants(tensors, pairs, max_k, greedy=False)
            for k in k_list:
                if truth_bonds in variants[:k]:
                    table.hits["bond"][k] += 1

            truth_h = [k_h] * product.n_atoms
            for amap, delta in sample.labels.h_delta.items():
                truth_h[m2i[amap]] = delta + k_h
            h_assignments = _hydrogen_assignments(tensors.p_hydro, max_k)
            for k in k_list:
                if tuple(truth_h) in h_assignments[:k]:
                    table.hits["hydrogen"][k] += 1

            lg_order = torch.argsort(
                tensors.lg_probs, descending=True, stable=True
            ).tolist()
            for k in k_list:
                if sample.lg_id in lg_order[:k]:
                    table.hits["lg"][k] += 1

            p_conn = model.conn_probs(tensors, sample.lg_id)
            conns = sorted(
                sample.labels.gate_connections,
                key=lambda c: (c.fragment_idx, c.gate_idx),
            )
            truth_gates = tuple(m2i[c.product_map] for c in conns)
            assignments = _gate_assignments(p_conn, max_k, greedy=False)
            for k in k_list:
                if truth_gates in assignments[:k]:
                    table.hits["lgc"][k] += 1

        truth = tuple(sorted(sample.reactants_canonical))
        try:
            cands = predict_single_step(product, model, rtype, beam=beam)
        except EmptyBeamError:
            cands = []
        ranked = [c.reactant_smiles for c in cands]
        for k in k_list:
            if truth in ranked[:k]:
                table.hits["overall"][k] += 1
    return table
