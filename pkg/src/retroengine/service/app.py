"""HTTP facade over prediction, planning sessions, and explainability.

The app is created around one immutable model snapshot and one default
building-block set (startup configuration).  Planning sessions live in
memory with idle eviction; each session serializes its mutations behind a
per-session lock so concurrent expands on the same node resolve to exactly
one success.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, ConfigDict, Field

from ..chem import canonical_smiles, parse_smiles
from ..data import extract_labels
from ..data.corpus import parse_reaction_row
from ..engine import BeamConfig, Candidate, evaluate_query, predict_single_step
from ..errors import (
    AlreadyExpanded,
    DegenerateLoss,
    EmptyBeamError,
    LabelError,
    ModeError,
    NumericsError,
    RetroEngineError,
    SmilesSyntaxError,
    ValenceError,
)
from ..explain import (
    apex_contributions,
    attention_heatmaps,
    reaction_type_trace,
)
from ..model import RetroModel, make_sample
from ..plan import BuildingBlockSet, PlanLimits, RouteNode, SearchSession

DEFAULT_SESSION_TTL = 1800.0


# -- wire schemas -------------------------------------------------------------


class BeamBody(BaseModel):
    n_lg: int = 10
    n_conn: int = 4
    n_bond: int = 4
    k_out: int = 10


class PredictBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    smiles: str
    reaction_class: Optional[int] = Field(default=None, alias="class")
    topk: int = 10
    beam: Optional[BeamBody] = None


class EvaluateBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    smiles: str
    reactants: List[str]
    reaction_class: Optional[int] = Field(default=None, alias="class")


class LimitsBody(BaseModel):
    max_expansions: int = 100
    max_depth: int = 6
    topk_per_expand: int = 5


class CreateSessionBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    target: str
    reaction_class: Optional[int] = Field(default=None, alias="class")
    blocks_profile: str = "default"
    limits: LimitsBody = Field(default_factory=LimitsBody)


class ExpandBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    node_id: int
    reaction_class: Optional[int] = Field(default=None, alias="class")
    topk: Optional[int] = None


# -- serialization ------------------------------------------------------------


def _trace_json(trace) -> Dict:
    return {
        "total": trace.total,
        "deltas": trace.deltas,
        "actions": trace.to_dict(),
    }


def _candidate_json(cand: Candidate) -> Dict:
    labels = cand.labels
    return {
        "rank": cand.rank,
        "reactants": list(cand.reactant_smiles),
        "total_energy": cand.trace.total,
        "deltas": cand.trace.deltas,
        "actions": cand.trace.to_dict(),
        "lg": cand.lg_canonical,
        "edits": {
            "rc_bonds": [
                {
                    "u_map": b.u_map,
                    "v_map": b.v_map,
                    "kind": b.kind,
                    "target_order": b.target_order,
                }
                for b in labels.rc_bonds
            ],
            "h_delta": {str(m): d for m, d in sorted(labels.h_delta.items())},
            "gate_connections": [
                {
                    "product_map": g.product_map,
                    "fragment_idx": g.fragment_idx,
                    "gate_idx": g.gate_idx,
                    "order": g.order,
                }
                for g in labels.gate_connections
            ],
        },
        "legal": cand.legal,
    }


def _node_json(node: RouteNode) -> Dict:
    out = {
        "id": node.node_id,
        "kind": node.kind,
        "status": node.status,
        "g_cost": node.g_cost,
        "depth": node.depth,
        "parents": list(node.parents),
        "children": list(node.children),
    }
    if node.kind == "molecule":
        out["molecule"] = node.molecule
    else:
        out["reactants"] = list(node.candidate.reactant_smiles)
        out["energy"] = node.energy
        out["deltas"] = node.candidate.trace.deltas
    return out


def _error(status: int, code: str, message: str, **extra) -> HTTPException:
    detail = {"code": code, "message": message}
    detail.update(extra)
    return HTTPException(status_code=status, detail=detail)


def _parse_or_422(smiles: str):
    try:
        return parse_smiles(smiles)
    except SmilesSyntaxError as exc:
        raise _error(422, "smiles_syntax", str(exc), offset=exc.offset)
    except ValenceError as exc:
        raise _error(422, "valence", str(exc), offset=exc.offset)


# -- session registry ---------------------------------------------------------


@dataclass
class _SessionState:
    session: SearchSession
    lock: threading.Lock = field(default_factory=threading.Lock)
    created: float = field(default_factory=time.monotonic)
    last_touched: float = field(default_factory=time.monotonic)

    def touch(self) -> None:
        self.last_touched = time.monotonic()


class SessionRegistry:
    def __init__(self, ttl: float = DEFAULT_SESSION_TTL):
        self.ttl = ttl
        self._sessions: Dict[str, _SessionState] = {}
        self._lock = threading.Lock()

    def _evict(self, now: float) -> None:
        dead = [
            sid
            for sid, st in self._sessions.items()
            if now - st.last_touched > self.ttl
        ]
        for sid in dead:
            del self._sessions[sid]

    def create(self, session: SearchSession) -> str:
        sid = uuid.uuid4().hex
        with self._lock:
            self._evict(time.monotonic())
            self._sessions[sid] = _SessionState(session=session)
        return sid

    def get(self, sid: str) -> _SessionState:
        with self._lock:
            self._evict(time.monotonic())
            state = self._sessions.get(sid)
        if state is None:
            raise _error(404, "unknown_session", f"no session {sid!r} (missing or expired)")
        state.touch()
        return state

    def __len__(self) -> int:
        return len(self._sessions)


# -- explain plumbing ---------------------------------------------------------


def _explain_sample(model: RetroModel, smiles: str, reactants: str, rclass: Optional[int]):
    """Build a scored sample from a mapped product + mapped reactants."""
    reaction = f"{reactants}>>{smiles}"
    try:
        record = parse_reaction_row("query", str(rclass or 0), reaction)
        labels = extract_labels(record)
    except SmilesSyntaxError as exc:
        raise _error(422, "smiles_syntax", str(exc), offset=exc.offset)
    except RetroEngineError as exc:
        raise _error(422, "not_scorable", str(exc))
    lg_id = model.vocab.lookup(labels.lg_canonical)
    if lg_id is None:
        raise _error(422, "unknown_lg", f"leaving group {labels.lg_canonical!r} not in vocabulary")
    return make_sample(
        "query", record.product, labels, lg_id, model.config, reaction_type=rclass
    )


# -- app factory --------------------------------------------------------------


def create_app(
    model: RetroModel,
    blocks: BuildingBlockSet,
    session_ttl: float = DEFAULT_SESSION_TTL,
    blocks_profiles: Optional[Dict[str, BuildingBlockSet]] = None,
    task_weights: Optional[List[float]] = None,
    static_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="retroengine", version="1.0")
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")
    registry = SessionRegistry(ttl=session_ttl)
    profiles = dict(blocks_profiles or {})
    profiles.setdefault("default", blocks)
    app.state.model = model
    app.state.registry = registry

    # -- single-step prediction ----------------------------------------------

    @app.post("/predict")
    def predict(body: PredictBody):
        g = _parse_or_422(body.smiles)
        beam = BeamConfig(**body.beam.model_dump()) if body.beam else BeamConfig(k_out=body.topk)
        try:
            candidates = predict_single_step(g, model, body.reaction_class, beam=beam)
        except EmptyBeamError as exc:
            raise _error(409, "empty_beam", str(exc))
        except NumericsError as exc:
            raise _error(500, "numerics", str(exc))
        return {
            "smiles": canonical_smiles(body.smiles),
            "class": body.reaction_class,
            "candidates": [_candidate_json(c) for c in candidates[: body.topk]],
        }

    @app.post("/evaluate")
    def evaluate(body: EvaluateBody):
        g = _parse_or_422(body.smiles)
        reactants = [_parse_or_422(r) for r in body.reactants]
        try:
            trace = evaluate_query(g, reactants, model, body.reaction_class)
        except NumericsError as exc:
            raise _error(500, "numerics", str(exc))
        except (LabelError, RetroEngineError) as exc:
            raise _error(422, "not_scorable", str(exc))
        return {"trace": _trace_json(trace)}

    # -- planning sessions -----------------------------------------------------

    @app.post("/plan/session")
    def create_session(body: CreateSessionBody):
        if body.blocks_profile not in profiles:
            raise _error(422, "unknown_profile", f"no blocks profile {body.blocks_profile!r}")
        _parse_or_422(body.target)
        try:
            limits = PlanLimits(**body.limits.model_dump())
        except ValueError as exc:
            raise _error(422, "bad_limits", str(exc))
        session = SearchSession(
            body.target,
            profiles[body.blocks_profile],
            model=model,
            limits=limits,
            reaction_type=body.reaction_class,
        )
        sid = registry.create(session)
        root = session.nodes[session.root_id]
        return {
            "session_id": sid,
            "root": _node_json(root),
            "budget_remaining": limits.max_expansions,
        }

    @app.post("/plan/session/{sid}/expand")
    def expand(sid: str, body: ExpandBody):
        state = registry.get(sid)
        with state.lock:
            session = state.session
            if session.expansions_used >= session.limits.max_expansions:
                raise _error(429, "budget_exhausted", "expansion budget exhausted")
            if body.node_id not in session.nodes:
                raise _error(404, "unknown_node", f"no node {body.node_id}")
            try:
                new_ids = session.expand_node(
                    body.node_id, reaction_type=body.reaction_class, topk=body.topk
                )
            except AlreadyExpanded as exc:
                raise _error(409, "already_expanded", str(exc))
            except NumericsError as exc:
                raise _error(500, "numerics", str(exc))
            return {
                "new_nodes": [_node_json(session.nodes[i]) for i in new_ids],
                "expanded": _node_json(session.nodes[body.node_id]),
                "budget_remaining": session.limits.max_expansions - session.expansions_used,
            }

    @app.get("/plan/session/{sid}/tree")
    def tree(sid: str):
        state = registry.get(sid)
        with state.lock:
            session = state.session
            route = session.best_route()
            solved_routes = []
            if route is not None:
                solved_routes.append(
                    {
                        "total_energy": route.total_energy,
                        "steps": [
                            {
                                "product": s.product,
                                "reactants": list(s.reactants),
                                "trace": _trace_json(s.trace),
                                "class": s.reaction_type,
                            }
                            for s in route.steps
                        ],
                    }
                )
            return {
                "session_id": sid,
                "root_id": session.root_id,
                "nodes": [_node_json(n) for n in session.nodes.values()],
                "solved_routes": solved_routes,
                "budget_remaining": session.limits.max_expansions - session.expansions_used,
                "stats": session.stats(),
            }

    # -- explainability --------------------------------------------------------

    @app.get("/explain/apex")
    def explain_apex(
        smiles: str = Query(...),
        reactants: str = Query(...),
        task: str = Query("overall"),
        rclass: Optional[int] = Query(None, alias="class"),
    ):
        sample = _explain_sample(model, smiles, reactants, rclass)
        try:
            graph = apex_contributions(sample, model, task, weights=task_weights)
        except DegenerateLoss as exc:
            raise _error(409, "degenerate_loss", str(exc))
        except ValueError as exc:
            raise _error(422, "bad_task", str(exc))
        return {
            "task": graph.task,
            "baseline_loss": graph.baseline_loss,
            "scores": [
                {"atom": i, "score": s} for i, s in enumerate(graph.scores)
            ],
        }

    @app.get("/explain/trace")
    def explain_trace(
        smiles: str = Query(...),
        reactants: str = Query(...),
        task: str = Query("overall"),
    ):
        sample = _explain_sample(model, smiles, reactants, None)
        try:
            result = reaction_type_trace(sample, model, task, weights=task_weights)
        except ModeError as exc:
            raise _error(409, "mode", str(exc))
        except DegenerateLoss as exc:
            raise _error(409, "degenerate_loss", str(exc))
        return {
            "vectors": result.vectors,
            "hard_labels": result.hard_labels,
            "soft_labels": result.soft_labels,
        }

    @app.get("/model/heads")
    def model_heads(smiles: str = Query(...)):
        g = _parse_or_422(smiles)
        report = attention_heatmaps(g, model)
        return {
            "heads": [
                {"head": e.head, "rv": e.rv, "label": e.label}
                for e in report.entries
            ]
        }

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "vocab_size": len(model.vocab),
            "reaction_type_known": model.config.reaction_type_known,
            "sessions": len(registry),
        }

    return app


def create_app_from_files(
    checkpoint_path: str,
    blocks_path: str,
    session_ttl: float = DEFAULT_SESSION_TTL,
    static_dir: Optional[str] = None,
) -> FastAPI:
    from ..model import load_model

    model, metadata = load_model(checkpoint_path)
    blocks = BuildingBlockSet.load(blocks_path)
    weights = metadata.get("task_weights") if isinstance(metadata, dict) else None
    return create_app(
        model,
        blocks,
        session_ttl=session_ttl,
        task_weights=weights,
        static_dir=static_dir,
    )
