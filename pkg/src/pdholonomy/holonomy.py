"""Holonomy groups of subduction classes and the complexity upper bound.

For a non-singleton set ``P`` of the image system, the elements ``s`` with
``P·s = P`` restrict to a permutation group on ``P``; that group permutes the
tiles of ``P`` and the induced action is the holonomy group.

The stabiliser is never searched for in the enumerated semigroup.  Inside the
strongly connected component of ``P`` (its subduction class) we pick, for each
member ``P_i``, a word ``u_i`` carrying ``P`` onto ``P_i`` and a word ``v_i``
carrying ``P_i`` back with ``u_i v_i`` the identity on ``P``.  Schreier's
lemma then says the products ``u_i g v_j`` over class edges ``P_i·g = P_j``
generate the whole stabiliser.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .skeleton import ImageSystem, SubductionClass, build_image_system, mask_key
from .transform import Transformation, compose, from_mask, mask_members, to_mask

Perm = tuple[int, ...]

SMALL_GROUP_NAMES = ("trivial", "C2", "C3", "C4", "V4", "C5", "C6", "S3")


@dataclass(frozen=True)
class GroupId:
    order: int
    abelian: bool
    name: str

    @property
    def trivial(self) -> bool:
        return self.order == 1

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TileSet:
    parent: frozenset
    tiles: tuple[frozenset, ...]


@dataclass
class HolonomyGroup:
    parent: frozenset
    tiles: tuple[frozenset, ...]
    perms: list[Perm]
    generators: list[Perm] = field(default_factory=list)
    generator_witnesses: list[tuple[str, ...]] = field(default_factory=list)

    @property
    def degree(self) -> int:
        return len(self.tiles)

    @property
    def group_id(self) -> GroupId:
        return identify_group(self.perms)

    @property
    def label(self) -> str:
        return f"({self.degree},{self.group_id.name})"


@dataclass
class LevelEntry:
    cls: SubductionClass
    group: HolonomyGroup
    group_id: GroupId

    @property
    def degree(self) -> int:
        return self.group.degree

    @property
    def label(self) -> str:
        return f"({self.degree},{self.group_id.name})"


@dataclass
class HolonomyLevel:
    height: int
    entries: list[LevelEntry]

    @property
    def nontrivial(self) -> list[LevelEntry]:
        return [e for e in self.entries if not e.group_id.trivial]


# -- permutation groups -----------------------------------------------------------

def perm_mul(p: Perm, q: Perm) -> Perm:
    """``p`` then ``q``."""
    return tuple(q[i] for i in p)


def perm_order(p: Perm) -> int:
    seen, order = set(), 1
    for start in range(len(p)):
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = p[x]
            length += 1
        order = order * length // math.gcd(order, length)
    return order


def generate_group(gens: Iterable[Perm], degree: Optional[int] = None) -> list[Perm]:
    gens = list(gens)
    if degree is None:
        degree = len(gens[0]) if gens else 0
    identity = tuple(range(degree))
    seen = {identity}
    queue = deque([identity])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = perm_mul(p, g)
            if q not in seen:
                seen.add(q)
                queue.append(q)
    return sorted(seen)


def identify_group(perms: Iterable[Perm]) -> GroupId:
    elems = list(perms)
    if not elems:
        raise ValueError("empty group")
    order = len(elems)
    abelian = all(perm_mul(a, b) == perm_mul(b, a) for a in elems for b in elems)
    if order == 1:
        name = "trivial"
    elif order in (2, 3, 5):
        name = f"C{order}"
    elif order == 4:
        name = "C4" if any(perm_order(p) == 4 for p in elems) else "V4"
    elif order == 6:
        name = "C6" if abelian else "S3"
    else:
        name = f"other({order},{'abelian' if abelian else 'nonabelian'})"
    return GroupId(order, abelian, name)


# -- holonomy ---------------------------------------------------------------------

def _system(S, system: Optional[ImageSystem]) -> ImageSystem:
    return system if system is not None else build_image_system(S)


def tiles(P: Iterable[int], system: ImageSystem) -> TileSet:
    P = frozenset(P)
    if len(P) < 2:
        raise ValueError("sets with fewer than two points have no tiles")
    return TileSet(P, tuple(system.tiles(P)))


class _ClassNavigator:
    """Words moving between members of one subduction class."""

    def __init__(self, system: ImageSystem, rep_mask: int):
        self.system = system
        self.gens = system.generators
        tokens = self.gens.tokens
        index, masks, edges = system.index, system.masks, system.edges
        root = index[rep_mask]
        members = {index[to_mask(m)] for m in system.class_of(from_mask(rep_mask)).members}
        self.root = root
        self.members = members
        n = self.gens.degree
        ident = Transformation.identity(n)

        # forward tree: u[i] maps P onto member i
        self.u = {root: (ident, ())}
        queue = deque([root])
        while queue:
            i = queue.popleft()
            f, w = self.u[i]
            for k, j in enumerate(edges[i]):
                if j in members and j not in self.u:
                    self.u[j] = (compose(f, self.gens[tokens[k]]), w + (tokens[k],))
                    queue.append(j)

        # backward tree: r[i] maps member i onto P
        preds: dict[int, list[tuple[int, int]]] = {i: [] for i in members}
        for i in members:
            for k, j in enumerate(edges[i]):
                if j in members:
                    preds[j].append((i, k))
        back = {root: (ident, ())}
        queue = deque([root])
        while queue:
            j = queue.popleft()
            f, w = back[j]
            for i, k in sorted(preds[j]):
                if i not in back:
                    back[i] = (compose(self.gens[tokens[k]], f), (tokens[k],) + w)
                    queue.append(i)

        points = mask_members(rep_mask)
        self.points = points
        self.v = {}
        for i in members:
            uf, uw = self.u[i]
            bf, bw = back[i]
            loop = compose(uf, bf)
            k = _order_on(loop, points)
            if k == 1:
                self.v[i] = (bf, bw)
            else:
                extra = loop.power(k - 1)
                self.v[i] = (compose(bf, extra), bw + (uw + bw) * (k - 1))
        self.masks = masks
        self.edges = edges

    def schreier_generators(self):
        tokens = self.gens.tokens
        for i in sorted(self.members):
            uf, uw = self.u[i]
            for k, j in enumerate(self.edges[i]):
                if j not in self.members:
                    continue
                vf, vw = self.v[j]
                s = compose(compose(uf, self.gens[tokens[k]]), vf)
                yield s, uw + (tokens[k],) + vw


def _order_on(f: Transformation, points: list[int]) -> int:
    perm = {x: f(x) for x in points}
    order, seen = 1, set()
    for start in points:
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = perm[x]
            length += 1
        order = order * length // math.gcd(order, length)
    return order


def _tile_perm(s: Transformation, tile_masks: tuple[int, ...], system: ImageSystem) -> Perm:
    pos = {m: i for i, m in enumerate(tile_masks)}
    out = []
    for m in tile_masks:
        img = to_mask(s(x) for x in mask_members(m))
        if img not in pos:
            raise AssertionError("stabiliser element does not permute the tiles")
        out.append(pos[img])
    return tuple(out)


def holonomy_group(P: Iterable[int], S=None, system: Optional[ImageSystem] = None) -> HolonomyGroup:
    system = _system(S, system)
    P = frozenset(P)
    if len(P) < 2:
        raise ValueError("sets with fewer than two points have no holonomy group")
    pmask = to_mask(P)
    if pmask not in system.index:
        raise ValueError("set is not in the image system")
    tile_masks = system.tile_masks(pmask)
    nav = _ClassNavigator(system, pmask)
    best: dict[Perm, tuple[str, ...]] = {}
    identity = tuple(range(len(tile_masks)))
    group = {identity}
    for s, word in nav.schreier_generators():
        if to_mask(s(x) for x in P) != pmask:
            raise AssertionError("Schreier generator does not stabilise its set")
        perm = _tile_perm(s, tile_masks, system)
        if perm == identity:
            continue
        prev = best.get(perm)
        if prev is None or (len(word), word) < (len(prev), prev):
            best[perm] = word
    gens = sorted(best)
    # keep only generators that enlarge the group, shortest witnesses first
    chosen: list[Perm] = []
    for perm in sorted(gens, key=lambda p: (len(best[p]), best[p])):
        if perm not in group:
            chosen.append(perm)
            group = set(generate_group(chosen, len(tile_masks)))
    return HolonomyGroup(
        parent=P,
        tiles=tuple(from_mask(m) for m in tile_masks),
        perms=sorted(group),
        generators=chosen,
        generator_witnesses=[best[p] for p in chosen],
    )


def induced_tile_permutation(f: Transformation, P: Iterable[int], system: ImageSystem) -> Perm:
    """Permutation of the tiles of ``P`` induced by ``f``, which must stabilise ``P``."""
    pmask = to_mask(P)
    if to_mask(f(x) for x in mask_members(pmask)) != pmask:
        raise ValueError("transformation does not stabilise the set")
    return _tile_perm(f, system.tile_masks(pmask), system)


def decomposition(S, system: Optional[ImageSystem] = None) -> list[HolonomyLevel]:
    """Holonomy groups of all non-singleton class representatives, by height."""
    system = _system(S, system)
    by_height: dict[int, list[LevelEntry]] = {}
    for cls in system.classes:
        if cls.is_singleton:
            continue
        group = holonomy_group(cls.representative, system=system)
        by_height.setdefault(cls.height, []).append(LevelEntry(cls, group, group.group_id))
    return [HolonomyLevel(h, by_height[h]) for h in sorted(by_height)]


def kr_upper_bound(levels: Iterable[HolonomyLevel]) -> int:
    return sum(1 for level in levels if level.nontrivial)


def group_support(levels: Iterable[HolonomyLevel]) -> set[tuple[int, str]]:
    """Distinct nontrivial ``(degree, group name)`` pairs."""
    return {(e.degree, e.group_id.name) for level in levels for e in level.nontrivial}


def refine_bound_by_inclusion(results: Mapping[tuple, int]) -> dict[tuple, int]:
    """Lower each bound to the smallest bound of a computed superset at the same b.

    Keys are ``(b, open_cells)`` pairs with ``open_cells`` any iterable.
    """
    out = {}
    for key, bound in results.items():
        b, cells = key
        cells = frozenset(cells)
        best = bound
        for (b2, cells2), bound2 in results.items():
            if b2 == b and cells <= frozenset(cells2):
                best = min(best, bound2)
        out[key] = best
    return out
