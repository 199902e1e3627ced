"""Atom-mapped reaction corpus ingestion.

Corpus files are comma-separated rows ``id,class,reaction`` where the
reaction field is ``mapped-reactant-SMILES>>mapped-product-SMILES``.  Split
membership lives in an adjacent manifest (``id,split`` rows).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from ..chem import MolGraph, parse_smiles
from ..errors import FormatError, MappingError, RetroEngineError

log = logging.getLogger(__name__)


@dataclass
class ReactionRecord:
    record_id: str
    reaction_class: Optional[int]
    product: MolGraph
    reactants: List[MolGraph]
    reaction_smiles: str = ""


@dataclass
class CorpusReport:
    """Ingestion bookkeeping: which rows failed and why."""

    loaded: int = 0
    format_errors: List[str] = field(default_factory=list)
    mapping_errors: List[str] = field(default_factory=list)


def parse_reaction_row(record_id: str, class_field: str, reaction: str) -> ReactionRecord:
    if ">>" not in reaction:
        raise FormatError(f"row {record_id}: missing '>>' separator")
    reactant_part, product_part = reaction.split(">>", 1)
    if not reactant_part or not product_part:
        raise FormatError(f"row {record_id}: empty reaction side")
    try:
        product = parse_smiles(product_part)
        reactants = [parse_smiles(s) for s in reactant_part.split(".") if s]
    except RetroEngineError as exc:
        raise FormatError(f"row {record_id}: {exc}") from exc
    if any(a.atom_map is None for a in product.atoms):
        raise MappingError(f"row {record_id}: product atoms lack map numbers")
    # Dot-split breaks multi-fragment reactant molecules apart; that is fine
    # for label extraction, which regroups by connectivity anyway.
    reaction_class = None
    if class_field.strip():
        reaction_class = int(class_field)
    return ReactionRecord(record_id, reaction_class, product, reactants, reaction)


def default_manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".splits.csv")


def load_split_manifest(path) -> Dict[str, str]:
    out: Dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "id":
                continue
            out[row[0].strip()] = row[1].strip()
    return out


def load_corpus(
    path,
    split: Optional[str] = None,
    manifest_path=None,
    report: Optional[CorpusReport] = None,
) -> List[ReactionRecord]:
    """Load records of one split (or all records when ``split`` is None).

    Malformed rows are counted and skipped; ingestion continues.
    """
    if report is None:
        report = CorpusReport()
    manifest: Dict[str, str] = {}
    if split is not None:
        mpath = Path(manifest_path) if manifest_path else default_manifest_path(path)
        manifest = load_split_manifest(mpath)
    records: List[ReactionRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if row[0].strip().lower() == "id":
                continue  # header
            if len(row) < 3:
                report.format_errors.append(f"row {row[0] if row else '?'}: too few columns")
                continue
            record_id = row[0].strip()
            if split is not None and manifest.get(record_id) != split:
                continue
            try:
                records.append(parse_reaction_row(record_id, row[1], row[2].strip()))
            except MappingError as exc:
                report.mapping_errors.append(str(exc))
            except FormatError as exc:
                report.format_errors.append(str(exc))
    report.loaded = len(records)
    if report.format_errors or report.mapping_errors:
        log.warning(
            "corpus %s: %d rows skipped (%d format, %d mapping)",
            path,
            len(report.format_errors) + len(report.mapping_errors),
            len(report.format_errors),
            len(report.mapping_errors),
        )
    return records
