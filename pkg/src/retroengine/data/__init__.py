from .corpus import (
    CorpusReport,
    ReactionRecord,
    default_manifest_path,
    load_corpus,
    parse_reaction_row,
)
from .labels import (
    EMPTY_LG,
    MAX_H_CHANGE,
    BondEdit,
    GateConnection,
    RetroLabels,
    canonicalize_leaving_group,
    extract_labels,
)
from .vocab import LeavingGroupVocab, VocabEntry, VocabReport, assign_lg_ids, build_vocab

__all__ = [
    "CorpusReport",
    "ReactionRecord",
    "default_manifest_path",
    "load_corpus",
    "parse_reaction_row",
    "EMPTY_LG",
    "MAX_H_CHANGE",
    "BondEdit",
    "GateConnection",
    "RetroLabels",
    "canonicalize_leaving_group",
    "extract_labels",
    "LeavingGroupVocab",
    "VocabEntry",
    "VocabReport",
    "assign_lg_ids",
    "build_vocab",
]
