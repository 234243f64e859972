"""Image sets, the subduction preorder and its height function.

The image system of a transformation semigroup ``(X, S)`` is ``{X}``, every
image ``X·s`` and all singletons.  ``P`` subducts ``Q`` when ``P ⊆ Q·s`` for
some ``s`` in ``S`` or the identity.  Because ``Q·S`` is just the orbit of
``Q`` under the generators, no query ever needs the enumerated semigroup.
"""

from __future__ import annotations

from dataclasses import dataclass
from graphlib import TopologicalSorter
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .transform import GeneratorSet, MaskAction, from_mask, mask_members, to_mask


def _generators(S) -> GeneratorSet:
    return S if isinstance(S, GeneratorSet) else S.generators


def set_key(subset: Iterable[int]) -> tuple:
    members = sorted(subset)
    return (len(members), tuple(members))


def mask_key(mask: int) -> tuple:
    members = mask_members(mask)
    return (len(members), tuple(members))


@dataclass(frozen=True)
class SubductionClass:
    index: int
    members: tuple[frozenset, ...]
    height: int

    @property
    def representative(self) -> frozenset:
        return self.members[0]

    @property
    def size(self) -> int:
        return len(self.members[0])

    @property
    def is_singleton(self) -> bool:
        return self.size == 1


class ImageSystem:
    """The extended image set of a semigroup acting on ``base``."""

    def __init__(self, generators: GeneratorSet, base: Optional[Iterable[int]] = None):
        self.generators = generators
        n = generators.degree
        self.base_mask = to_mask(range(n) if base is None else base)
        if self.base_mask == 0:
            raise ValueError("base set must be non-empty")
        self._actions = [MaskAction(g) for g in generators.values()]
        for act in self._actions:
            if act(self.base_mask) & ~self.base_mask:
                raise ValueError("base set is not invariant under the generators")

        seen = {self.base_mask}
        frontier = [self.base_mask]
        while frontier:
            nxt = []
            for m in frontier:
                for act in self._actions:
                    img = act(m)
                    if img not in seen:
                        seen.add(img)
                        nxt.append(img)
            frontier = nxt
        self.image_masks = frozenset(seen)
        seen.update(1 << x for x in mask_members(self.base_mask))

        self.masks: list[int] = sorted(seen, key=mask_key)
        self.index = {m: i for i, m in enumerate(self.masks)}
        self.edges = [[self.index[act(m)] for act in self._actions] for m in self.masks]
        self._orbits: dict[int, frozenset] = {}
        self._tiles: dict[int, tuple[int, ...]] = {}
        self._np_masks = np.array(self.masks, dtype=np.uint64)
        self._classes = None

    # -- basic accessors

    def __len__(self) -> int:
        return len(self.masks)

    def __contains__(self, subset) -> bool:
        return to_mask(subset) in self.index

    @property
    def sets(self) -> list[frozenset]:
        return [from_mask(m) for m in self.masks]

    @property
    def base(self) -> frozenset:
        return from_mask(self.base_mask)

    def act(self, mask: int, token_index: int) -> int:
        return self._actions[token_index](mask)

    # -- orbits and subduction

    def orbit_masks(self, mask: int) -> frozenset:
        """``Q·S¹`` as a set of masks (``Q`` itself included)."""
        cached = self._orbits.get(mask)
        if cached is not None:
            return cached
        seen = {mask}
        frontier = [mask]
        while frontier:
            nxt = []
            for m in frontier:
                i = self.index.get(m)
                if i is not None:
                    images = [self.masks[j] for j in self.edges[i]]
                else:
                    images = [act(m) for act in self._actions]
                for img in images:
                    if img not in seen:
                        seen.add(img)
                        nxt.append(img)
            frontier = nxt
        out = frozenset(seen)
        self._orbits[mask] = out
        return out

    def orbit(self, subset: Iterable[int]) -> set[frozenset]:
        return {from_mask(m) for m in self.orbit_masks(to_mask(subset))}

    def subducts_mask(self, p: int, q: int) -> bool:
        if p & ~q == 0:
            return True
        return any(p & ~r == 0 for r in self.orbit_masks(q))

    def subducts(self, P: Iterable[int], Q: Iterable[int]) -> bool:
        return self.subducts_mask(to_mask(P), to_mask(Q))

    # -- tiles

    def tile_masks(self, mask: int) -> tuple[int, ...]:
        """Maximal members of the system properly contained in ``mask``."""
        cached = self._tiles.get(mask)
        if cached is not None:
            return cached
        if mask & (mask - 1) == 0:
            raise ValueError("a singleton has no tiles")
        arr = self._np_masks
        inside = (arr & np.uint64(~mask & (2**64 - 1))) == 0
        cands = [int(m) for m in arr[inside] if int(m) != mask]
        for x in mask_members(mask):
            cands.append(1 << x)
        cands = sorted(set(cands), key=lambda m: (-m.bit_count(), mask_key(m)))
        kept: list[int] = []
        for c in cands:
            if not any(c & ~k == 0 for k in kept):
                kept.append(c)
        out = tuple(sorted(kept, key=mask_key))
        self._tiles[mask] = out
        return out

    def tiles(self, subset: Iterable[int]) -> list[frozenset]:
        return [from_mask(m) for m in self.tile_masks(to_mask(subset))]

    # -- classes and heights

    def _compute_classes(self):
        n = len(self.masks)
        rows, cols = [], []
        for i, targets in enumerate(self.edges):
            for j in targets:
                rows.append(i)
                cols.append(j)
        graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
        _, labels = connected_components(graph, directed=True, connection="strong")
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(labels.tolist()):
            groups.setdefault(lab, []).append(i)

        # member lists are already in canonical key order since masks are sorted
        comp_of = [0] * n
        comps = sorted(groups.values(), key=lambda ms: mask_key(self.masks[ms[0]]))
        for ci, members in enumerate(comps):
            for i in members:
                comp_of[i] = ci

        below: dict[int, set[int]] = {ci: set() for ci in range(len(comps))}
        for i, targets in enumerate(self.edges):
            for j in targets:
                if comp_of[i] != comp_of[j]:
                    below[comp_of[i]].add(comp_of[j])
            m = self.masks[i]
            if m & (m - 1):
                for tile in self.tile_masks(m):
                    below[comp_of[i]].add(comp_of[self.index[tile]])

        height = {}
        for ci in TopologicalSorter(below).static_order():
            if self.masks[comps[ci][0]].bit_count() == 1:
                height[ci] = 0
            else:
                height[ci] = 1 + max(height[d] for d in below[ci])
        classes = [
            SubductionClass(ci, tuple(from_mask(self.masks[i]) for i in members), height[ci])
            for ci, members in enumerate(comps)
        ]
        classes.sort(key=lambda c: (c.height, set_key(c.representative)))
        self._class_of_mask = {}
        renumbered = []
        for k, c in enumerate(classes):
            c = SubductionClass(k, c.members, c.height)
            renumbered.append(c)
            for member in c.members:
                self._class_of_mask[to_mask(member)] = k
        self._classes = renumbered
        self._below = {}
        old_to_new = {cls.index: k for k, cls in enumerate(classes)}
        for old, targets in below.items():
            self._below[old_to_new[old]] = {old_to_new[t] for t in targets}

    @property
    def classes(self) -> list[SubductionClass]:
        if self._classes is None:
            self._compute_classes()
        return self._classes

    def class_of(self, subset: Iterable[int]) -> SubductionClass:
        self.classes
        return self._classes[self._class_of_mask[to_mask(subset)]]

    def strictly_below(self, cls: SubductionClass) -> set[int]:
        """Indices of all classes strictly below ``cls``."""
        self.classes
        out, stack = set(), list(self._below[cls.index])
        while stack:
            k = stack.pop()
            if k not in out:
                out.add(k)
                stack.extend(self._below[k])
        return out

    @property
    def max_height(self) -> int:
        return max(c.height for c in self.classes)


def build_image_system(S, base: Optional[Iterable[int]] = None) -> ImageSystem:
    """Image system of a semigroup (or of the semigroup of a GeneratorSet)."""
    return ImageSystem(_generators(S), base)


def subducts(P: Iterable[int], Q: Iterable[int], S, system: Optional[ImageSystem] = None) -> bool:
    if system is None:
        system = build_image_system(S)
    return system.subducts(P, Q)


def equivalence_classes(system: ImageSystem, S=None) -> list[SubductionClass]:
    return system.classes


def subduction_chain(S, start: Iterable[int], token: str = "t") -> list[frozenset]:
    """``start, start·t, start·t², ...`` up to the first repeat."""
    gens = _generators(S)
    act = MaskAction(gens[token])
    chain, seen = [], set()
    m = to_mask(start)
    while m not in seen:
        seen.add(m)
        chain.append(from_mask(m))
        m = act(m)
    return chain
