from .apex import (
    APEX_TASKS,
    ContributionGraph,
    HeadHeatmap,
    HeatmapReport,
    TypeTraceResult,
    apex_contributions,
    attention_heatmaps,
    classify_rv,
    reaction_type_trace,
    rv_coefficient,
)

__all__ = [
    "APEX_TASKS",
    "ContributionGraph",
    "HeadHeatmap",
    "HeatmapReport",
    "TypeTraceResult",
    "apex_contributions",
    "attention_heatmaps",
    "classify_rv",
    "reaction_type_trace",
    "rv_coefficient",
]
