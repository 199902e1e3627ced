#!/usr/bin/env python3
"""Generate the bundled test fixtures.

Outputs (under src/retroengine/data/fixtures/):
  - mini_corpus.csv / mini_corpus.splits.csv: 40 train + 10 heldout
    atom-mapped reactions from six reaction templates, built by defining
    retro edits on a product and deriving the reactants by graph surgery
    (so the label/surgery inverse property holds by construction, then is
    re-verified through the extraction path).
  - molecules_500.smi: 500 parser round-trip molecules (seeded random
    valence-respecting graphs plus curated aromatic/charged cases).
  - grammar_corpus.csv / grammar_corpus.splits.csv / building_blocks.txt:
    a three-rule chain for planner optimality tests.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from retroengine.chem import Atom, MolGraph, parse_smiles, write_smiles, canonical_smiles
from retroengine.data import BondEdit, GateConnection, RetroLabels, extract_labels
from retroengine.data.corpus import parse_reaction_row
from retroengine.engine import apply_edits

FIXTURES = ROOT / "src" / "retroengine" / "data" / "fixtures"


def mapped_product(smiles: str) -> MolGraph:
    g = parse_smiles(smiles)
    for i, atom in enumerate(g.atoms):
        atom.atom_map = i + 1
    return g


def build_reaction(rid, rclass, product_smiles, rc_bonds, h_delta, lg, gates):
    """rc_bonds: [(i, j, kind, target_order)], h_delta: {idx: d},
    gates: [(target_idx, frag_idx, gate_idx, order)] — all 0-based indices."""
    product = mapped_product(product_smiles)
    labels = RetroLabels(
        rc_bonds=[
            BondEdit(u_map=min(i, j) + 1, v_map=max(i, j) + 1, kind=kind, target_order=t)
            for i, j, kind, t in rc_bonds
        ],
        h_delta={i + 1: d for i, d in h_delta.items()},
        lg_canonical=lg,
        gate_connections=[
            GateConnection(product_map=t + 1, fragment_idx=f, gate_idx=g, order=o)
            for t, f, g, o in gates
        ],
    )
    reactants = apply_edits(product, labels)
    for r in reactants:
        assert r.all_valences_ok(), f"{rid}: illegal reactant from template"
    rxn = (
        ".".join(write_smiles(r, include_maps=True) for r in reactants)
        + ">>"
        + write_smiles(product, include_maps=True)
    )
    # Verify the full extraction round trip.
    rec = parse_reaction_row(rid, str(rclass), rxn)
    extracted = extract_labels(rec)
    redone = apply_edits(rec.product, extracted)
    lhs = sorted(canonical_smiles(write_smiles(r, include_maps=False)) for r in reactants)
    rhs = sorted(canonical_smiles(write_smiles(r, include_maps=False)) for r in redone)
    assert lhs == rhs, f"{rid}: inverse property failed ({lhs} != {rhs})"
    return rid, rclass, rxn


def alkyl(n: int) -> str:
    return "C" * n


def ester(rid, n1, n2):
    p = f"{alkyl(n1)}C(=O)O{alkyl(n2)}"
    oe, c2 = n1 + 2, n1 + 3
    return build_reaction(
        rid, 1, p, [(oe, c2, "delete", 0.0)], {oe: 1}, "*O", [(c2, 0, 0, 1.0)]
    )


def amide(rid, n1, n2):
    p = f"{alkyl(n1)}C(=O)N{alkyl(n2)}"
    c, n = n1, n1 + 2
    return build_reaction(rid, 2, p, [(c, n, "delete", 0.0)], {n: 1}, "*O", [(c, 0, 0, 1.0)])


def ether(rid, n1, n2):
    p = f"{alkyl(n1)}O{alkyl(n2)}"
    o, c2 = n1, n1 + 1
    return build_reaction(rid, 3, p, [(o, c2, "delete", 0.0)], {o: 1}, "*Br", [(c2, 0, 0, 1.0)])


def amination(rid, n1, n2):
    p = f"{alkyl(n1)}N{alkyl(n2)}"
    n, c2 = n1, n1 + 1
    return build_reaction(rid, 4, p, [(n, c2, "delete", 0.0)], {n: 1}, "*Br", [(c2, 0, 0, 1.0)])


def reduction(rid, n1, n2):
    p = f"{alkyl(n1)}C(O){alkyl(n2)}"
    c, o = n1, n1 + 1
    return build_reaction(rid, 5, p, [(c, o, "order", 2.0)], {c: -1, o: -1}, "", [])


def biaryl(rid, product_smiles):
    g = parse_smiles(product_smiles)
    ring = g.ring_bonds()
    links = [
        (i, j)
        for (i, j) in g.bonds
        if (i, j) not in ring and g.atoms[i].aromatic and g.atoms[j].aromatic
    ]
    assert len(links) == 1, f"{rid}: expected one biaryl bond"
    i, j = links[0]
    return build_reaction(
        rid,
        6,
        product_smiles,
        [(i, j, "delete", 0.0)],
        {},
        "*B(O)O.*Br",
        [(j, 0, 0, 1.0), (i, 1, 0, 1.0)],
    )


def make_mini_corpus():
    rows, splits = [], []
    # Substituent sizes must differ (equal sizes make symmetric molecules
    # whose labeled cut is ambiguous under graph symmetry), and for the
    # symmetric-role templates (ether, amination) mirror pairs must not both
    # appear: (a, b) and (b, a) give the same molecule with the cut labeled
    # on opposite sides.
    per_maker = [
        (ester, [(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2), (1, 4), (4, 1)]),
        (amide, [(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2), (1, 4), (4, 1)]),
        (ether, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4), (1, 5), (2, 5)]),
        (amination, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]),
        (reduction, [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]),
    ]
    rid = 0
    for maker, maker_combos in per_maker:
        for n1, n2 in maker_combos:
            rid += 1
            rows.append(maker(f"mini-{rid:03d}", n1, n2))
            splits.append((f"mini-{rid:03d}", "train"))
    for smi in [
        # Asymmetric biaryls: the two rings must be distinguishable so the
        # labeled halide/boronate assignment is learnable.
        "Cc1ccc(-c2ccccc2)cc1",
        "CCc1ccc(-c2ccccc2)cc1",
        "Cc1ccc(-c2ccc(CC)cc2)cc1",
        "CCCc1ccc(-c2ccc(C)cc2)cc1",
    ]:
        rid += 1
        rows.append(biaryl(f"mini-{rid:03d}", smi))
        splits.append((f"mini-{rid:03d}", "train"))
    assert len(rows) == 40, len(rows)
    heldout = [
        (ester, 4, 2),
        (ester, 2, 4),
        (amide, 4, 2),
        (amide, 2, 4),
        (ether, 4, 5),
        (ether, 3, 5),
        (amination, 1, 5),
        (amination, 2, 5),
        (reduction, 4, 5),
        (reduction, 3, 5),
    ]
    for maker, n1, n2 in heldout:
        rid += 1
        rows.append(maker(f"mini-{rid:03d}", n1, n2))
        splits.append((f"mini-{rid:03d}", "heldout"))
    with open(FIXTURES / "mini_corpus.csv", "w", encoding="utf-8") as fh:
        fh.write("id,class,reaction\n")
        for r, c, rxn in rows:
            fh.write(f"{r},{c},{rxn}\n")
    with open(FIXTURES / "mini_corpus.splits.csv", "w", encoding="utf-8") as fh:
        fh.write("id,split\n")
        for r, s in splits:
            fh.write(f"{r},{s}\n")
    print(f"mini corpus: {len(rows)} rows")


CURATED = [
    "c1ccccc1",
    "c1ccncc1",
    "c1cc[nH]c1",
    "c1ccoc1",
    "c1ccsc1",
    "c1ccc2ccccc2c1",
    "Cc1ccccc1",
    "Oc1ccccc1",
    "Nc1ccc(Cl)cc1",
    "O=C(O)c1ccccc1",
    "[NH4+].[Cl-]",
    "CC(=O)[O-].[NH4+]",
    "C[N+](C)(C)C",
    "[OH-]",
    "CS(=O)(=O)O",
    "OP(=O)(O)O",
    "FC(F)(F)c1ccccc1",
    "BrCCBr",
    "C#N",
    "N#Cc1ccccc1",
]

ELEMENT_POOL = ["C"] * 14 + ["N"] * 3 + ["O"] * 3 + ["S", "F", "Cl", "Br"]


def random_molecule(rng: random.Random) -> str:
    from retroengine.errors import ValenceError

    while True:
        n = rng.randint(1, 12)
        g = MolGraph()
        for _ in range(n):
            g.add_atom(Atom(element=rng.choice(ELEMENT_POOL)))
        for i in range(1, n):
            g.add_bond(rng.randrange(i), i, 1.0)
        # Occasional ring closure and bond-order bumps.
        if n >= 4 and rng.random() < 0.4:
            i, j = rng.sample(range(n), 2)
            if g.bond_order(i, j) == 0.0:
                g.add_bond(i, j, 1.0)
        for (i, j) in list(g.bonds):
            if rng.random() < 0.15:
                g.add_bond(i, j, 2.0)
        try:
            g.assign_implicit_hydrogens()
        except ValenceError:
            continue
        if g.all_valences_ok():
            return write_smiles(g, include_maps=False)


def make_molecules():
    rng = random.Random(20260823)
    seen = list(CURATED)
    have = set(seen)
    while len(seen) < 500:
        smi = random_molecule(rng)
        if smi in have:
            continue
        # Round-trip sanity at generation time.
        assert canonical_smiles(smi) == canonical_smiles(canonical_smiles(smi))
        seen.append(smi)
        have.add(smi)
    with open(FIXTURES / "molecules_500.smi", "w", encoding="utf-8") as fh:
        fh.write("\n".join(seen) + "\n")
    print(f"molecules: {len(seen)}")


def make_grammar():
    """Three chained ether cleavages: each product's unique disconnection
    peels one BrCCO unit until only building blocks remain."""
    chain = ["CCOCCOCCOCCO", "CCOCCOCCO", "CCOCCO"]
    rows = []
    for step, prod in enumerate(chain):
        # Cleave the bond between the last O and the carbon chain to its left:
        # indices: ...C-O tail; the cut is at the rightmost ether oxygen.
        g = parse_smiles(prod)
        # rightmost ether O = oxygen with two heavy neighbours, highest index
        ethers = [
            i
            for i, a in enumerate(g.atoms)
            if a.element == "O" and g.heavy_degree(i) == 2
        ]
        o = max(ethers)
        c2 = max(g.neighbors(o))
        rows.append(
            build_reaction(
                f"gram-{step + 1}",
                3,
                prod,
                [(min(o, c2), max(o, c2), "delete", 0.0)],
                {o: 1},
                "*Br",
                [(c2, 0, 0, 1.0)],
            )
        )
    with open(FIXTURES / "grammar_corpus.csv", "w", encoding="utf-8") as fh:
        fh.write("id,class,reaction\n")
        for r, c, rxn in rows:
            fh.write(f"{r},{c},{rxn}\n")
    with open(FIXTURES / "grammar_corpus.splits.csv", "w", encoding="utf-8") as fh:
        fh.write("id,split\n")
        for r, _, _ in rows:
            fh.write(f"{r},train\n")
    blocks = sorted({canonical_smiles(s) for s in ["CCO", "OCCBr"]})
    with open(FIXTURES / "building_blocks.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(blocks) + "\n")
    print(f"grammar: {len(rows)} rules, blocks {blocks}")


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    make_mini_corpus()
    make_molecules()
    make_grammar()


if __name__ == "__main__":
    main()
