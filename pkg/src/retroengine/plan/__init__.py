from .search import (
    BuildingBlockSet,
    PlanLimits,
    Route,
    RouteNode,
    RouteStep,
    SearchSession,
    plan,
)

__all__ = [
    "BuildingBlockSet",
    "PlanLimits",
    "Route",
    "RouteNode",
    "RouteStep",
    "SearchSession",
    "plan",
]
