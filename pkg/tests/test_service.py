"""HTTP contract suite (runs without the UI)."""

from __future__ import annotations

import threading

import pytest
from fastapi.testclient import TestClient

from retroengine.plan import BuildingBlockSet
from retroengine.service import create_app

TARGET = "CCOCCOCCO"


@pytest.fixture()
def client(grammar_bundle, fixtures_dir):
    blocks = BuildingBlockSet.load(fixtures_dir / "building_blocks.txt")
    app = create_app(grammar_bundle["model"], blocks)
    return TestClient(app)


def fixture_reaction(fixtures_dir):
    import csv

    with open(fixtures_dir / "grammar_corpus.csv") as fh:
        row = list(csv.reader(fh))[1]
    reactants, product = row[2].split(">>")
    return reactants, product


class TestPredictEndpoint:
    def test_rank_sorted_energies(self, client):
        r = client.post("/predict", json={"smiles": "CCOCCO", "topk": 5})
        assert r.status_code == 200
        cands = r.json()["candidates"]
        assert len(cands) >= 1
        totals = [c["total_energy"] for c in cands]
        assert totals == sorted(totals)
        assert [c["rank"] for c in cands] == list(range(1, len(cands) + 1))

    def test_energy_trace_fields(self, client):
        r = client.post("/predict", json={"smiles": "CCOCCO", "topk": 1})
        c = r.json()["candidates"][0]
        assert set(c["deltas"]) == {"dE1", "dE2", "dE3", "dE4"}
        assert abs(sum(c["deltas"].values()) - c["total_energy"]) < 1e-12
        assert c["lg"] is not None and "edits" in c

    def test_invalid_smiles_422_with_offset(self, client):
        r = client.post("/predict", json={"smiles": "C1CC"})
        assert r.status_code == 422
        detail = r.json()["detail"]
        assert detail["code"] == "smiles_syntax"
        assert detail["offset"] == 1

    def test_loopback_reactants_reparse(self, client):
        r = client.post("/predict", json={"smiles": TARGET, "topk": 5})
        for cand in r.json()["candidates"]:
            for smi in cand["reactants"]:
                rr = client.post("/predict", json={"smiles": smi, "topk": 1})
                assert rr.status_code in (200, 409)  # parseable; beam may be empty

    def test_replay_stateless(self, client):
        a = client.post("/predict", json={"smiles": TARGET, "topk": 5}).json()
        b = client.post("/predict", json={"smiles": TARGET, "topk": 5}).json()
        assert a == b


class TestPlanSessions:
    def create(self, client, target=TARGET, **limits):
        body = {"target": target}
        if limits:
            body["limits"] = limits
        r = client.post("/plan/session", json=body)
        assert r.status_code == 200
        return r.json()

    def test_block_target_root_solved(self, client):
        data = self.create(client, target="CCO")
        assert data["root"]["status"] == "solved"

    def test_expand_children_match_tree(self, client):
        data = self.create(client)
        sid, root_id = data["session_id"], data["root"]["id"]
        r = client.post(f"/plan/session/{sid}/expand", json={"node_id": root_id})
        assert r.status_code == 200
        new_nodes = r.json()["new_nodes"]
        tree = client.get(f"/plan/session/{sid}/tree").json()
        assert len(tree["nodes"]) == 1 + len(new_nodes)
        reaction_children = [
            n for n in tree["nodes"] if n["kind"] == "reaction"
        ]
        root = next(n for n in tree["nodes"] if n["id"] == root_id)
        assert len(root["children"]) == len(reaction_children)

    def test_double_expand_sequential_409(self, client):
        data = self.create(client)
        sid, root_id = data["session_id"], data["root"]["id"]
        assert client.post(f"/plan/session/{sid}/expand", json={"node_id": root_id}).status_code == 200
        assert client.post(f"/plan/session/{sid}/expand", json={"node_id": root_id}).status_code == 409

    def test_concurrent_double_expand_one_success(self, client):
        data = self.create(client)
        sid, root_id = data["session_id"], data["root"]["id"]
        codes = []
        barrier = threading.Barrier(2)

        def worker():
            barrier.wait()
            r = client.post(f"/plan/session/{sid}/expand", json={"node_id": root_id})
            codes.append(r.status_code)

        threads = [threading.Thread(target=worker) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(codes) == [200, 409]

    def test_budget_exhaustion_429(self, client):
        data = self.create(client, max_expansions=1)
        sid, root_id = data["session_id"], data["root"]["id"]
        client.post(f"/plan/session/{sid}/expand", json={"node_id": root_id})
        tree = client.get(f"/plan/session/{sid}/tree").json()
        open_mol = next(
            n for n in tree["nodes"] if n["kind"] == "molecule" and n["status"] == "open"
        )
        r = client.post(f"/plan/session/{sid}/expand", json={"node_id": open_mol["id"]})
        assert r.status_code == 429

    def test_unknown_session_and_node_404(self, client):
        assert client.get("/plan/session/deadbeef/tree").status_code == 404
        data = self.create(client)
        sid = data["session_id"]
        r = client.post(f"/plan/session/{sid}/expand", json={"node_id": 999})
        assert r.status_code == 404

    def test_session_isolation(self, client):
        a = self.create(client)
        b = self.create(client)
        client.post(
            f"/plan/session/{a['session_id']}/expand", json={"node_id": a["root"]["id"]}
        )
        tree_b = client.get(f"/plan/session/{b['session_id']}/tree").json()
        assert len(tree_b["nodes"]) == 1  # untouched

    def test_solved_route_in_snapshot(self, client):
        data = self.create(client, target="CCOCCO")
        sid, root_id = data["session_id"], data["root"]["id"]
        client.post(f"/plan/session/{sid}/expand", json={"node_id": root_id})
        tree = client.get(f"/plan/session/{sid}/tree").json()
        assert tree["solved_routes"]
        route = tree["solved_routes"][0]
        assert route["steps"][0]["product"] == "CCOCCO"

    def test_bad_limits_422(self, client):
        r = client.post(
            "/plan/session",
            json={"target": TARGET, "limits": {"max_depth": 0}},
        )
        assert r.status_code == 422


class TestExplainEndpoints:
    def test_apex_scores_per_atom(self, client, fixtures_dir):
        reactants, product = fixture_reaction(fixtures_dir)
        r = client.get(
            "/explain/apex",
            params={"smiles": product, "reactants": reactants, "task": "bond"},
        )
        assert r.status_code == 200
        scores = r.json()["scores"]
        from retroengine.chem import parse_smiles

        assert len(scores) == parse_smiles(product).n_atoms
        assert [s["atom"] for s in scores] == list(range(len(scores)))

    def test_trace_mode_error_409(self, client, fixtures_dir):
        reactants, product = fixture_reaction(fixtures_dir)
        r = client.get(
            "/explain/trace", params={"smiles": product, "reactants": reactants}
        )
        assert r.status_code == 409
        assert r.json()["detail"]["code"] == "mode"

    def test_heads_rv_in_range(self, client, grammar_bundle):
        r = client.get("/model/heads", params={"smiles": "CCOCCO"})
        assert r.status_code == 200
        heads = r.json()["heads"]
        assert len(heads) == grammar_bundle["model"].config.n_head
        for h in heads:
            assert -1.0 <= h["rv"] <= 1.0
            assert h["label"] in ("global-dominated", "local-dominated", "mixed")

    def test_apex_unknown_lg_422(self, client):
        # a proposal whose leaving group is outside the vocabulary
        r = client.get(
            "/explain/apex",
            params={
                "smiles": "[CH3:1][CH2:2][OH:3]",
                "reactants": "[CH3:1][CH2:2]I.[OH2:3]",
                "task": "bond",
            },
        )
        assert r.status_code == 422


class TestEvaluateEndpoint:
    def test_round_trip(self, client, fixtures_dir):
        reactants, product = fixture_reaction(fixtures_dir)
        r = client.post(
            "/evaluate", json={"smiles": product, "reactants": reactants.split(".")}
        )
        assert r.status_code == 200
        trace = r.json()["trace"]
        assert abs(sum(trace["deltas"].values()) - trace["total"]) < 1e-12

    def test_not_scorable_422(self, client):
        r = client.post(
            "/evaluate",
            json={"smiles": "CCOCCO", "reactants": ["CCO", "CCO"]},
        )
        assert r.status_code == 422


class TestHealth:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json()["status"] == "ok"
