"""Game-side reading of the dynamics: equilibria, symmetry classes, orbits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .model import LATTICE, Lattice
from .transform import Transformation, eval_word, parse_word

CellPerm = tuple[int, ...]  # position i-1 holds the image of cell i


def _lattice_generators(lattice: Lattice) -> list[CellPerm]:
    rows, cols = lattice.rows, lattice.cols
    gens = []
    # row swap, column rotation, column reflection fixing column 0
    gens.append(tuple(lattice.cell_id((r + 1) % rows, c)
                      for c in range(cols) for r in range(rows)))
    gens.append(tuple(lattice.cell_id(r, (c + 1) % cols)
                      for c in range(cols) for r in range(rows)))
    gens.append(tuple(lattice.cell_id(r, (-c) % cols)
                      for c in range(cols) for r in range(rows)))
    # cell ids enumerate column-major, so the comprehension order matches id order
    return gens


class SymmetryGroup:
    """Translations and reflections of the torus acting on cells and states."""

    def __init__(self, lattice: Lattice = LATTICE):
        self.lattice = lattice
        n = lattice.n_cells
        identity = tuple(range(1, n + 1))
        gens = _lattice_generators(lattice)
        elems = {identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for p in frontier:
                for g in gens:
                    q = tuple(g[p[i] - 1] for i in range(n))
                    if q not in elems:
                        elems.add(q)
                        nxt.append(q)
            frontier = nxt
        self.cell_perms: list[CellPerm] = sorted(elems)
        self.state_maps = [self._state_map(p) for p in self.cell_perms]

    def __len__(self) -> int:
        return len(self.cell_perms)

    def _state_map(self, perm: CellPerm) -> Transformation:
        lat = self.lattice

        def act(x):
            bits = [0] * lat.n_cells
            for i in lat.cells:
                bits[perm[i - 1] - 1] = lat.bit(x, i)
            return lat.encode(bits)

        return Transformation.from_function(act, lat.n_states)

    def orbit(self, x: int) -> frozenset:
        return frozenset(s(x) for s in self.state_maps)

    def is_closed(self, states: Iterable[int]) -> bool:
        states = frozenset(states)
        return all(s(x) in states for s in self.state_maps for x in states)


SYMMETRIES = SymmetryGroup()


def equilibria(t: Transformation) -> frozenset:
    return frozenset(x for x in range(t.degree) if t(x) == x)


def iso_classes(states: Iterable[int], group: SymmetryGroup = SYMMETRIES) -> list[frozenset]:
    """Partition ``states`` by lattice symmetry, ordered by smallest member."""
    remaining = set(states)
    out = []
    for x in sorted(remaining):
        if x not in remaining:
            continue
        cls = group.orbit(x) & remaining
        remaining -= cls
        out.append(frozenset(cls))
    return out


@dataclass(frozen=True)
class NaturalSubsystem:
    word: tuple[str, ...]
    transformation: Transformation
    carrier: frozenset
    cycles: tuple[tuple[int, ...], ...]

    @property
    def fixed_points(self) -> frozenset:
        return frozenset(c[0] for c in self.cycles if len(c) == 1)

    @property
    def nontrivial_cycles(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c for c in self.cycles if len(c) > 1)

    @property
    def is_nontrivial(self) -> bool:
        return bool(self.nontrivial_cycles)


def cycle_decomposition(f: Transformation, points: Iterable[int]) -> tuple[tuple[int, ...], ...]:
    """Cycles of ``f`` on ``points``; each cycle starts at its smallest point."""
    points = frozenset(points)
    seen, out = set(), []
    for x in sorted(points):
        if x in seen:
            continue
        cyc = []
        y = x
        while y not in seen:
            seen.add(y)
            cyc.append(y)
            y = f(y)
        if y != x:
            raise ValueError("transformation is not a permutation of the points")
        out.append(tuple(cyc))
    return tuple(out)


def natural_subsystem(word, gens: Mapping[str, Transformation]) -> NaturalSubsystem:
    w = parse_word(word)
    if not w:
        raise ValueError("natural subsystem needs a non-empty word")
    f = eval_word(w, gens)
    # the eventual image is reached within |X| steps
    carrier = f.power(f.degree).image()
    return NaturalSubsystem(w, f, carrier, cycle_decomposition(f, carrier))


@dataclass(frozen=True)
class OrbitDiagram:
    word: tuple[str, ...]
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    def successor(self, x: int) -> Optional[int]:
        for a, b in self.edges:
            if a == x:
                return b
        return None


def orbit_diagram(word, gens: Mapping[str, Transformation], seeds: Iterable[int]) -> OrbitDiagram:
    """Forward orbits of ``seeds`` under the word; an empty word draws no edges."""
    w = parse_word(word)
    seeds = sorted(set(seeds))
    if not w:
        return OrbitDiagram(w, tuple(seeds), ())
    f = eval_word(w, gens)
    nodes, edges = set(), set()
    stack = list(seeds)
    while stack:
        x = stack.pop()
        if x in nodes:
            continue
        nodes.add(x)
        edges.add((x, f(x)))
        stack.append(f(x))
    return OrbitDiagram(w, tuple(sorted(nodes)), tuple(sorted(edges)))
