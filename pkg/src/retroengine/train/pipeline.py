"""Corpus records -> training samples."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from ..chem import write_smiles, canonical_smiles
from ..data import (
    LeavingGroupVocab,
    ReactionRecord,
    assign_lg_ids,
    build_vocab,
    extract_labels,
)
from ..errors import RetroEngineError
from ..model import ModelConfig, TrainSample, make_sample


@dataclass
class PrepareReport:
    total: int = 0
    prepared: int = 0
    skipped: List[str] = field(default_factory=list)


def prepare_samples(
    records: List[ReactionRecord],
    vocab: LeavingGroupVocab,
    config: ModelConfig,
    report: Optional[PrepareReport] = None,
) -> List[TrainSample]:
    """Labeled, featurized samples; records outside the formalism or the
    vocabulary are counted and skipped."""
    if report is None:
        report = PrepareReport()
    report.total = len(records)
    samples: List[TrainSample] = []
    for record in records:
        try:
            labels = extract_labels(record, k=config.k_hydrogen)
            labels = assign_lg_ids(labels, vocab)
            truth: Tuple[str, ...] = tuple(
                sorted(
                    canonical_smiles(write_smiles(r, include_maps=False))
                    for r in record.reactants
                )
            )
            samples.append(
                make_sample(
                    record.record_id,
                    record.product,
                    labels,
                    labels.lg_ids[0],
                    config,
                    reaction_type=record.reaction_class,
                    reactants_canonical=truth,
                )
            )
        except RetroEngineError as exc:
            report.skipped.append(f"{record.record_id}: {exc}")
            continue
    report.prepared = len(samples)
    return samples


def vocab_from_records(records: List[ReactionRecord], k: int = 4) -> LeavingGroupVocab:
    return build_vocab(records, k=k)
