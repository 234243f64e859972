"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

The lines are collected in ``conftest.ACCEPTANCE`` and printed in the pytest
terminal summary; they are also printed as each test runs (visible with -s).
Run just this file with ``pytest tests/test_acceptance.py -v``.
"""

import resource
import time
from fractions import Fraction

import numpy as np
import pytest

from pdholonomy.analysis import SYMMETRIES, equilibria, iso_classes, natural_subsystem
from pdholonomy.closure import closure
from pdholonomy.holonomy import (decomposition, group_support, holonomy_group, kr_upper_bound,
                                 refine_bound_by_inclusion)
from pdholonomy.model import LATTICE, generator_set, reset_map, step_map
from pdholonomy.report import RunConfig, cmd_chain, cmd_regimes, cmd_table2
from pdholonomy.skeleton import build_image_system
from pdholonomy.transform import compose

from conftest import ACCEPTANCE, REPRESENTATIVES
from oracle import NaiveHolonomy, naive_group_name

X = frozenset(range(64))


def record(name, ok, detail=""):
    ACCEPTANCE[name] = (ok, detail)
    print(f"\n{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    assert ok, f"{name}: {detail}"


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


# 1 ---------------------------------------------------------------------------------

def test_1_regime_partition():
    with Clock() as clk:
        rep = cmd_regimes("3", "6")
    regimes = rep["regimes"]
    spans = [(r["regime"], r["lo"], r["hi"], r["lo_closed"], r["hi_closed"]) for r in regimes]
    expected = [("D", "3", "3", True, True), ("C", "3", "4", False, False),
                ("B", "4", "4", True, True), ("A", "4", "6", False, True)]
    problems = []
    if spans != expected:
        problems.append(f"pieces {spans}")
    for r in regimes:
        if r["lo"] != r["hi"]:
            inner = [Fraction(s) for s in r["samples"]
                     if Fraction(r["lo"]) < Fraction(s) < Fraction(r["hi"])]
            if len(inner) < 5:
                problems.append(f"only {len(inner)} samples in ({r['lo']},{r['hi']})")
            if len({step_map(s) for s in r["samples"]}) != 1:
                problems.append(f"step map varies on ({r['lo']},{r['hi']})")
    maps = [tuple(r["step_map"]) for r in regimes]
    if len(set(maps)) != len(maps):
        problems.append("two regimes share a step map")
    if clk.seconds >= 1:
        problems.append(f"took {clk.seconds:.2f}s")
    record("1 regime partition", not problems, "; ".join(problems) or f"{clk.seconds:.3f}s")


# 2 ---------------------------------------------------------------------------------

def test_2_regime_a_attractor():
    with Clock() as clk:
        t = step_map(5)
        ok = t(63) == 63 and all(t(t(x)) == 0 for x in range(63))
    ok = ok and clk.seconds < 1
    record("2 regime A attractor", ok, f"{clk.seconds:.3f}s")


# 3 ---------------------------------------------------------------------------------

REFERENCE_CHAINS = {
    "b=5 without 63": ("5", (63,), [X - {63}, {0, 1, 2, 4, 5, 8, 10, 16, 17, 20, 32, 34, 40}, {0}]),
    "b=4 without 63": ("4", (63,), [X - {63},
                                    {0, 5, 10, 17, 20, 21, 23, 29, 34, 40, 42, 43, 46, 53, 58},
                                    {0, 21, 23, 29, 42, 43, 46, 53, 58}]),
    "b=7/2": ("7/2", (), [X, {0, 5, 10, 17, 20, 23, 29, 34, 40, 43, 46, 53, 58, 63},
                          {0, 23, 29, 43, 46, 53, 58, 63}]),
    "b=3": ("3", (), [X, {0, 23, 29, 31, 43, 46, 47, 53, 55, 58, 59, 61, 62, 63}]),
}


def test_3_subduction_chains():
    problems, times = [], []
    for name, (b, excl, expected) in REFERENCE_CHAINS.items():
        with Clock() as clk:
            rep = cmd_chain(RunConfig(b=b, exclude=excl))
        got = [set(node["states"]) for node in rep["chain"]]
        if got != [set(s) for s in expected]:
            problems.append(f"{name}: {got}")
        if clk.seconds >= 1:
            problems.append(f"{name} took {clk.seconds:.2f}s")
        times.append(clk.seconds)
    record("3 subduction chains", not problems,
           "; ".join(problems) or f"4 chains, slowest {max(times):.3f}s")


# 4 ---------------------------------------------------------------------------------

def test_4_equilibrium_classes():
    with Clock() as clk:
        at4 = set(iso_classes(equilibria(step_map(4))))
        at3 = set(iso_classes(equilibria(step_map(3))))
    want4 = {frozenset({0}), frozenset({63}), frozenset({21, 42}),
             frozenset({23, 29, 43, 46, 53, 58})}
    new3 = frozenset({31, 47, 55, 59, 61, 62})
    ok = at4 == want4 and new3 in at3 and new3 not in at4 and clk.seconds < 1
    record("4 equilibrium classes", ok,
           f"b=4 {sorted(map(sorted, at4))}, b=3 has [31]: {new3 in at3}, {clk.seconds:.3f}s")


# 5 ---------------------------------------------------------------------------------

TABLE2_BOUNDS = [0, 0, 2, 0, 2, 4, 4, 4, 7]
TABLE2_RAW_123 = 6
TABLE2_GROUPS = [
    set(), set(), {(3, "C2"), (2, "C2")}, set(), {(2, "C2")},
    {(4, "C2"), (3, "C2"), (2, "C2")}, {(4, "C2"), (3, "C2"), (2, "C2")},
    {(4, "C2"), (3, "C2"), (2, "C2")}, {(3, "S3"), (4, "C2"), (3, "C2"), (2, "C2")},
]
BUDGET_SECONDS = 30 * 60
BUDGET_BYTES = 8 * 2**30


def _pairs(labels):
    out = set()
    for lab in labels:
        n, g = lab.strip("()").split(",")
        out.add((int(n), g))
    return out


@pytest.fixture(scope="module")
def table2():
    rep = cmd_table2(refine=True, timeout=BUDGET_SECONDS, timing=True)
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    return rep, peak


def test_5_table2(table2):
    rep, peak = table2
    problems = []
    cols = rep["columns"]
    for col, want_bound, want_groups in zip(cols, TABLE2_BOUNDS, TABLE2_GROUPS):
        name = "".join(map(str, col["open_cells"]))
        if col["status"] != "ok":
            problems.append(f"O={name}: {col['status']} ({col.get('limit')})")
            continue
        if col["kr_bound"] != want_bound:
            problems.append(f"O={name}: bound {col['kr_bound']} expected {want_bound}")
        if _pairs(col["groups"]) != want_groups:
            problems.append(f"O={name}: groups {sorted(_pairs(col['groups']))}")
        seconds = sum(col["timing"].values())
        if seconds > BUDGET_SECONDS:
            problems.append(f"O={name}: {seconds:.0f}s over budget")
    raw123 = next(c for c in cols if c["open_cells"] == [1, 2, 3])
    if raw123.get("kr_bound_raw") != TABLE2_RAW_123:
        problems.append(f"O=123 raw bound {raw123.get('kr_bound_raw')} expected 6")
    if peak > BUDGET_BYTES:
        problems.append(f"peak memory {peak / 2**30:.1f} GiB")
    summary = f"bounds {rep['bounds']}, raw 123 = {raw123.get('kr_bound_raw')}, " \
              f"peak {peak / 2**20:.0f} MiB"
    record("5 table 2", not problems, "; ".join(problems + [summary]))


# 6 ---------------------------------------------------------------------------------

def test_6_pool_of_reversibility():
    with Clock() as clk:
        gens = generator_set(Fraction(7, 2), (1, 2))
        ns = natural_subsystem("d2 c1 t", gens)
        S = closure(gens)
        levels = decomposition(S, build_image_system(S))
    cyc = (10, 63) in ns.nontrivial_cycles
    fixed = {0, 43} <= ns.fixed_points
    has_c2 = (3, "C2") in group_support(levels)
    ok = cyc and fixed and has_c2 and clk.seconds < 300
    record("6 pool of reversibility", ok,
           f"cycles {ns.cycles}, (3,C2) present: {has_c2}, {clk.seconds:.2f}s")


# 7 ---------------------------------------------------------------------------------

def test_7_regimes_a_b_trivial():
    bounds = {}
    with Clock() as clk:
        for b in (5, 4):
            S = closure(generator_set(b, (1, 2)))
            bounds[b] = kr_upper_bound(decomposition(S, build_image_system(S)))
    ok = all(v == 0 for v in bounds.values()) and clk.seconds < 300
    record("7 regime A/B triviality", ok, f"bounds {bounds}, {clk.seconds:.2f}s")


# 8 ---------------------------------------------------------------------------------

def test_8a_symmetry_equivariance():
    checks = failures = 0
    for b in REPRESENTATIVES:
        t = step_map(b)
        for g in SYMMETRIES.state_maps:
            for x in range(64):
                checks += 1
                failures += t(g(x)) != g(t(x))
    ok = failures == 0 and checks == 4 * 64 * 12 and len(SYMMETRIES) == 12
    record("8a symmetry equivariance", ok, f"{checks} checks, {failures} failures")


def test_8b_reset_algebra():
    failures = 0
    for b in REPRESENTATIVES:
        gens = generator_set(b, LATTICE.cells)
        for i in LATTICE.cells:
            c, d = gens[f"c{i}"], gens[f"d{i}"]
            assert c == reset_map(i, "C") and d == reset_map(i, "D")
            failures += compose(c, c) != c or compose(d, d) != d
            failures += compose(c, d) != d or compose(d, c) != c
            for j in LATTICE.cells:
                if j != i:
                    for f in (c, d):
                        for g in (gens[f"c{j}"], gens[f"d{j}"]):
                            failures += compose(f, g) != compose(g, f)
    record("8b reset algebra", failures == 0, f"{failures} failures over all cells")


@pytest.fixture(scope="module")
def systems12():
    out = {}
    for b in REPRESENTATIVES:
        S = closure(generator_set(b, (1, 2)))
        out[b] = (S, build_image_system(S))
    return out


def test_8c_subduction_order(systems12):
    failures = 0
    for b, (S, system) in systems12.items():
        masks = system.masks
        rel = {p: {q for q in masks if system.subducts_mask(p, q)} for p in masks}
        for p in masks:
            failures += p not in rel[p]
            for q in masks:
                if p & ~q == 0:
                    failures += q not in rel[p]
            for q in rel[p]:
                failures += not rel[q] <= rel[p]
    record("8c subduction preorder", failures == 0, f"{failures} failures")


def test_8d_classes_share_groups(systems12):
    failures = checked = 0
    for b, (S, system) in systems12.items():
        for cls in system.classes:
            if cls.is_singleton:
                continue
            ids = set()
            for m in cls.members:
                g = holonomy_group(m, system=system)
                ids.add((g.degree, g.group_id))
                checked += 1
            failures += len(ids) != 1
    record("8d class groups agree", failures == 0, f"{checked} members, {failures} failures")


def test_8e_closure_determinism(systems12):
    failures = 0
    for b, (S, _) in systems12.items():
        other = closure(S.generators, workers=4, chunk=256)
        failures += not np.array_equal(other.array, S.array)
        failures += list(other.witnesses()) != list(S.witnesses())
    record("8e closure determinism", failures == 0, f"{failures} failures")


# 9 ---------------------------------------------------------------------------------

def _pipeline_view(gens):
    S = closure(gens)
    system = build_image_system(S)
    classes = {frozenset(c.members): c.height for c in system.classes}
    groups = {}
    for level in decomposition(S, system):
        for e in level.entries:
            g = e.group
            perms = {frozenset((g.tiles[i], g.tiles[p[i]]) for i in range(len(p))) for p in g.perms}
            groups[frozenset(e.cls.members)] = (g.degree, g.group_id.name, frozenset(perms))
    return classes, groups


def _oracle_view(gens):
    naive = NaiveHolonomy(gens.transformations())
    heights = naive.heights()
    groups = {}
    for members in heights:
        rep = min(members, key=lambda s: (len(s), sorted(s)))
        if len(rep) < 2:
            continue
        degree, group = naive.holonomy(rep)
        tiles = naive.tiles(rep)
        perms = {frozenset((tiles[i], tiles[p[i]]) for i in range(len(p))) for p in group}
        groups[members] = (degree, naive_group_name(group), frozenset(perms))
    return heights, groups


@pytest.mark.parametrize("cells", [(1,), (1, 2)])
def test_9_oracle_equivalence(cells):
    gens = generator_set(Fraction(7, 2), cells)
    with Clock() as clk:
        p_classes, p_groups = _pipeline_view(gens)
        o_classes, o_groups = _oracle_view(gens)
    problems = []
    if set(p_classes) != set(o_classes):
        problems.append("classes differ")
    elif p_classes != o_classes:
        problems.append("heights differ")
    if set(p_groups) != set(o_groups):
        problems.append("group keys differ")
    else:
        for k in p_groups:
            if p_groups[k][:2] != o_groups[k][:2]:
                problems.append(f"group {p_groups[k][:2]} vs {o_groups[k][:2]}")
            elif p_groups[k][2] != o_groups[k][2]:
                problems.append("tile permutations differ")
    if clk.seconds >= 600:
        problems.append(f"took {clk.seconds:.0f}s")
    name = "".join(map(str, cells))
    record(f"9 oracle equivalence O={name}", not problems,
           "; ".join(problems) or f"{len(p_classes)} classes, {len(p_groups)} groups, "
                                   f"{clk.seconds:.1f}s")


def test_refinement_uses_superset():
    raw = {(Fraction(7, 2), (1, 2, 3)): 6, (Fraction(7, 2), (1, 2, 3, 4)): 4}
    assert refine_bound_by_inclusion(raw)[(Fraction(7, 2), (1, 2, 3))] == 4


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
