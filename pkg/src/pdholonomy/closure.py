"""Breadth-first enumeration of the semigroup generated by a GeneratorSet.

Elements are kept in a dense ``(N, 64)`` uint8 array in BFS order.  Each
element stores the index of its parent and the generator that extended it,
so its shortlex-minimal witness word is recovered by walking parents.

Frontier expansion can be split over worker threads.  Workers only compute
products; the merge into the element table runs in frontier order, so the
result does not depend on the worker count.
"""

from __future__ import annotations

import logging
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .transform import GeneratorSet, Transformation, compose

log = logging.getLogger(__name__)

DEFAULT_MAX_ELEMENTS = 10_000_000
DEFAULT_TIMEOUT = 30 * 60
DEFAULT_MAX_BYTES = 8 * 2**30
# dict entry + bytes key + array row + parent/generator columns, measured
_BYTES_PER_ELEMENT = 260


class ResourceError(RuntimeError):
    """A closure budget was exceeded."""

    def __init__(self, limit: str, message: str, **diagnostics):
        super().__init__(message)
        self.limit = limit
        self.diagnostics = diagnostics


def _keys(rows: np.ndarray) -> list[bytes]:
    if len(rows) == 0:
        return []
    rows = np.ascontiguousarray(rows)
    return rows.view(np.dtype((np.void, rows.shape[1]))).ravel().tolist()


class Semigroup:
    """An enumerated transformation semigroup with witness words."""

    def __init__(self, generators: GeneratorSet, elements: np.ndarray,
                 parent: np.ndarray, gen: np.ndarray, index: Optional[dict] = None):
        self.generators = generators
        self._elements = elements
        self._parent = parent
        self._gen = gen
        self._index = index if index is not None else {k: i for i, k in enumerate(_keys(elements))}

    def __len__(self) -> int:
        return len(self._elements)

    @property
    def order(self) -> int:
        return len(self._elements)

    @property
    def degree(self) -> int:
        return self._elements.shape[1]

    @property
    def array(self) -> np.ndarray:
        """Read-only view of all elements, one row per element."""
        view = self._elements.view()
        view.flags.writeable = False
        return view

    def __iter__(self) -> Iterator[Transformation]:
        for i in range(len(self)):
            yield self.element(i)

    def __contains__(self, f: Transformation) -> bool:
        return f.images in self._index

    def index(self, f: Transformation) -> int:
        return self._index[f.images]

    def element(self, i: int) -> Transformation:
        return Transformation(self._elements[i].tobytes())

    def witness(self, f: Transformation | int) -> tuple[str, ...]:
        i = f if isinstance(f, (int, np.integer)) else self.index(f)
        tokens = self.generators.tokens
        word = []
        while i >= 0:
            word.append(tokens[self._gen[i]])
            i = int(self._parent[i])
        return tuple(reversed(word))

    def witnesses(self) -> Iterator[tuple[str, ...]]:
        for i in range(len(self)):
            yield self.witness(i)

    def element_keys(self) -> set[bytes]:
        return set(self._index)


def _expand(frontier: np.ndarray, gen_arrays: list[np.ndarray]):
    # rows ordered parent-major, generator-minor: the shortlex order of the new words
    prods = np.stack([g[frontier] for g in gen_arrays], axis=1)
    prods = prods.reshape(-1, frontier.shape[1])
    return prods, _keys(prods)


def closure(gens: GeneratorSet, max_elements: int = DEFAULT_MAX_ELEMENTS,
            timeout: float = DEFAULT_TIMEOUT, max_bytes: int = DEFAULT_MAX_BYTES,
            workers: int = 1, chunk: int = 65536) -> Semigroup:
    """Enumerate ``<gens>``; raise :class:`ResourceError` on a breached budget."""
    if len(gens) == 0:
        raise ValueError("empty generator set")
    start = time.monotonic()
    n = gens.degree
    gen_arrays = [g.as_array() for g in gens.values()]
    ngen = len(gen_arrays)

    capacity = 1024
    elements = np.empty((capacity, n), dtype=np.uint8)
    parent = np.empty(capacity, dtype=np.int64)
    gen_of = np.empty(capacity, dtype=np.int8)
    index: dict[bytes, int] = {}
    size = 0

    def check(level):
        if size > max_elements:
            raise ResourceError("max_elements", f"closure exceeded {max_elements} elements",
                                elements_reached=size, level=level)
        if size * _BYTES_PER_ELEMENT > max_bytes:
            raise ResourceError("max_bytes", f"closure exceeded {max_bytes} bytes (estimated)",
                                elements_reached=size, level=level)
        if time.monotonic() - start > timeout:
            raise ResourceError("timeout", f"closure exceeded {timeout} s",
                                elements_reached=size, level=level)

    def add(rows, keys, parents, gidx):
        nonlocal size, capacity, elements, parent, gen_of
        new = []
        for pos, key in enumerate(keys):
            if key not in index:
                index[key] = size + len(new)
                new.append(pos)
        if not new:
            return 0
        need = size + len(new)
        if need > capacity:
            while capacity < need:
                capacity *= 2
            elements = np.resize(elements, (capacity, n))
            parent = np.resize(parent, capacity)
            gen_of = np.resize(gen_of, capacity)
        sel = np.asarray(new, dtype=np.int64)
        elements[size:need] = rows[sel]
        parent[size:need] = parents[sel]
        gen_of[size:need] = gidx[sel]
        size = need
        return len(new)

    first = np.stack(gen_arrays)
    add(first, _keys(first), np.full(ngen, -1), np.arange(ngen))
    lo, hi, level = 0, size, 1
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while lo < hi:
            check(level)
            bounds = list(range(lo, hi, chunk)) + [hi]
            spans = list(zip(bounds, bounds[1:]))
            frontier = elements[lo:hi]
            if pool is not None:
                jobs = [pool.submit(_expand, frontier[a - lo:b - lo], gen_arrays) for a, b in spans]
                results = (job.result() for job in jobs)
            else:
                results = (_expand(frontier[a - lo:b - lo], gen_arrays) for a, b in spans)
            for (a, b), (rows, keys) in zip(spans, results):
                parents = np.repeat(np.arange(a, b), ngen)
                gidx = np.tile(np.arange(ngen), b - a)
                add(rows, keys, parents, gidx)
                check(level)
            log.debug("level %d: %d elements", level, size)
            lo, hi, level = hi, size, level + 1
    finally:
        if pool is not None:
            pool.shutdown()
    return Semigroup(gens, elements[:size].copy(), parent[:size].copy(),
                     gen_of[:size].copy(), index)


def subset_action(S: Semigroup, subset: Iterable[int]) -> set[frozenset]:
    """All images ``P·s`` for ``s`` in ``S`` (identity not included)."""
    points = sorted(set(subset))
    if not points:
        return {frozenset()}
    cols = S.array[:, points].astype(np.uint64)
    masks = np.bitwise_or.reduce(np.left_shift(np.uint64(1), cols), axis=1)
    out = set()
    for m in np.unique(masks).tolist():
        out.add(frozenset(x for x in range(64) if m >> x & 1))
    return out


# -- binary cache --------------------------------------------------------------

_MAGIC = b"PDHSGC"
_VERSION = 1


def save_closure(S: Semigroup, path: str | Path) -> None:
    """Write ``S`` as header, element count, image rows, then witness columns."""
    meta = S.generators.meta
    b = str(meta.get("b", ""))
    cells = ",".join(map(str, meta.get("open_cells", ())))
    label = f"{b};{cells}".encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<HH", _VERSION, len(label)) + label)
        fh.write(struct.pack("<QH", S.order, S.degree))
        fh.write(np.ascontiguousarray(S._elements).tobytes())
        fh.write(S._parent.astype("<i8").tobytes())
        fh.write(S._gen.astype("i1").tobytes())


def load_closure(path: str | Path, gens: GeneratorSet) -> Semigroup:
    data = Path(path).read_bytes()
    if not data.startswith(_MAGIC):
        raise ValueError("not a closure cache file")
    off = len(_MAGIC)
    version, nlabel = struct.unpack_from("<HH", data, off)
    if version != _VERSION:
        raise ValueError(f"unsupported cache version {version}")
    off += 4
    label = data[off:off + nlabel].decode()
    meta = gens.meta
    expect = f"{meta.get('b', '')};{','.join(map(str, meta.get('open_cells', ())))}"
    if label != expect:
        raise ValueError(f"cache is for {label!r}, not {expect!r}")
    off += nlabel
    count, degree = struct.unpack_from("<QH", data, off)
    off += struct.calcsize("<QH")
    elements = np.frombuffer(data, dtype=np.uint8, count=count * degree, offset=off)
    elements = elements.reshape(count, degree).copy()
    off += count * degree
    parent = np.frombuffer(data, dtype="<i8", count=count, offset=off).astype(np.int64)
    off += 8 * count
    gen = np.frombuffer(data, dtype="i1", count=count, offset=off).astype(np.int8)
    S = Semigroup(gens, elements, parent, gen)
    if any(g not in S for g in gens.values()):
        raise ValueError("cache does not match generators")
    return S


def power_orbit(f: Transformation) -> list[Transformation]:
    """Distinct powers ``f, f^2, ...`` until the first repeat."""
    out, seen = [], set()
    g = f
    while g.images not in seen:
        seen.add(g.images)
        out.append(g)
        g = compose(g, f)
    return out
