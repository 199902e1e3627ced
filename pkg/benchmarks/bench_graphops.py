#!/usr/bin/env python3
"""Compare the compiled structural-matrix kernels against the NumPy fallback.

Times walk-count powers and all-pairs BFS distances over the bundled
500-molecule sample, for each backend, and reports the speedup.

Usage: python benchmarks/bench_graphops.py [--repeats N]
"""

from __future__ import annotations

import argparse
import statistics
import time
from pathlib import Path

import numpy as np

from retroengine.chem import (
    BACKEND,
    COUNT_CLIP,
    adjacency_powers,
    bond_order_matrix,
    parse_smiles,
)
from retroengine.chem import _graphops_py

try:
    from retroengine.chem import _graphops  # type: ignore[attr-defined]
except ImportError:
    _graphops = None

FIXTURES = Path(__file__).resolve().parents[1] / "src/retroengine/data/fixtures"


def load_graphs():
    smiles = (FIXTURES / "molecules_500.smi").read_text().split()
    return [parse_smiles(s) for s in smiles]


def bench(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    graphs = load_graphs()
    adjacencies = [(bond_order_matrix(g) > 0).astype(np.int64) for g in graphs]
    print(f"selected backend at import: {BACKEND}")
    print(f"{len(graphs)} molecules, {args.repeats} repeats, best-of times\n")

    backends = [("python", _graphops_py)]
    if _graphops is not None:
        backends.insert(0, ("cython", _graphops))

    results = {}
    for name, ops in backends:
        def run_walks():
            for g in graphs:
                adjacency_powers(g, max_hop=4, clip=COUNT_CLIP, backend=ops)

        def run_bfs():
            for adj in adjacencies:
                ops.bfs_all_pairs(adj, 64.0)

        best_w, med_w = bench(run_walks, args.repeats)
        best_b, med_b = bench(run_bfs, args.repeats)
        results[name] = (best_w, best_b)
        print(f"{name:>8}  walk_powers: best {best_w*1e3:8.1f} ms (median {med_w*1e3:.1f})")
        print(f"{name:>8}  bfs_all_pairs: best {best_b*1e3:8.1f} ms (median {med_b*1e3:.1f})")

    if len(results) == 2:
        pw = results["python"][0] / results["cython"][0]
        pb = results["python"][1] / results["cython"][1]
        print(f"\nspeedup (python/cython): walk_powers {pw:.2f}x, bfs_all_pairs {pb:.2f}x")

    # agreement spot check
    for g, adj in zip(graphs[:50], adjacencies[:50]):
        a = adjacency_powers(g, max_hop=4, clip=COUNT_CLIP, backend=_graphops_py)
        if _graphops is not None:
            b = adjacency_powers(g, max_hop=4, clip=COUNT_CLIP, backend=_graphops)
            assert np.array_equal(a, b)
    print("backend agreement: ok (50 spot checks)")


if __name__ == "__main__":
    main()
