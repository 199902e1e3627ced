"""Leaving-group vocabulary: canonical fragments with wildcard gates.

Entry 0 is always the empty leaving group (no by-product atoms).  Entries
are ordered by descending corpus frequency, then lexicographically, and the
vocabulary file round-trips byte-for-byte.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..chem import MolGraph, parse_smiles
from ..errors import LabelError, RetroEngineError
from .corpus import ReactionRecord
from .labels import EMPTY_LG, MAX_H_CHANGE, RetroLabels, extract_labels


@dataclass
class VocabEntry:
    canonical: str
    frequency: int

    @property
    def fragment_strings(self) -> List[str]:
        return self.canonical.split(".") if self.canonical else []

    def fragment_graphs(self) -> List[MolGraph]:
        return [parse_smiles(s) for s in self.fragment_strings]

    @property
    def gate_count(self) -> int:
        return sum(s.count("*") for s in self.fragment_strings)


@dataclass
class LeavingGroupVocab:
    entries: List[VocabEntry] = field(default_factory=list)
    index: Dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, canonical: str, frequency: int) -> int:
        if canonical in self.index:
            raise ValueError(f"duplicate vocabulary entry {canonical!r}")
        self.entries.append(VocabEntry(canonical, frequency))
        self.index[canonical] = len(self.entries) - 1
        return self.index[canonical]

    def lookup(self, canonical: str) -> Optional[int]:
        return self.index.get(canonical)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for i, entry in enumerate(self.entries):
                fh.write(f"{i}\t{entry.frequency}\t{entry.canonical}\n")

    @classmethod
    def load(cls, path) -> "LeavingGroupVocab":
        vocab = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                idx_str, freq, canonical = line.split("\t")
                expected = int(idx_str)
                got = vocab.add(canonical, int(freq))
                if got != expected:
                    raise ValueError(f"vocabulary file out of order at index {expected}")
        return vocab


@dataclass
class VocabReport:
    total_records: int = 0
    labeled: int = 0
    skipped: int = 0
    empty_lg: int = 0
    errors: List[str] = field(default_factory=list)

    @property
    def coverage(self) -> float:
        return self.labeled / self.total_records if self.total_records else 0.0


def build_vocab(
    records: List[ReactionRecord],
    k: int = MAX_H_CHANGE,
    report: Optional[VocabReport] = None,
) -> LeavingGroupVocab:
    """Distinct canonical leaving groups, most frequent first, empty LG at 0."""
    if report is None:
        report = VocabReport()
    report.total_records = len(records)
    counts: Counter = Counter()
    for record in records:
        try:
            labels = extract_labels(record, k=k)
        except RetroEngineError as exc:
            report.skipped += 1
            report.errors.append(str(exc))
            continue
        report.labeled += 1
        if labels.lg_canonical == EMPTY_LG:
            report.empty_lg += 1
        else:
            counts[labels.lg_canonical] += 1
    vocab = LeavingGroupVocab()
    vocab.add(EMPTY_LG, report.empty_lg)
    for canonical, freq in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        vocab.add(canonical, freq)
    return vocab


def assign_lg_ids(labels: RetroLabels, vocab: LeavingGroupVocab) -> RetroLabels:
    """Fill ``labels.lg_ids`` from the vocabulary (LabelError when absent)."""
    idx = vocab.lookup(labels.lg_canonical)
    if idx is None:
        raise LabelError(f"leaving group {labels.lg_canonical!r} not in vocabulary")
    labels.lg_ids = [idx]
    return labels
