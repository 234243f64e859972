"""Total transformations of a finite state set, generator words and set actions.

Transformations act on the right: ``f * g`` means "apply ``f`` first, then
``g``", which is the order in which words over generators are read.
Subsets of the state set are plain ``frozenset`` objects at the API surface
and 64-bit integer masks internally.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from typing import Optional

import numpy as np

N_STATES = 64

_TOKEN_RE = re.compile(r"^(t|[cd][1-9])$")


class WordError(ValueError):
    """A word could not be parsed or refers to a generator that is absent."""

    def __init__(self, message: str, token: str, position: int):
        super().__init__(message)
        self.token = token
        self.position = position


class Transformation:
    """A total map on ``range(n)`` stored as the byte string of images."""

    __slots__ = ("images", "_table")

    def __init__(self, images: Iterable[int] | bytes):
        data = bytes(images)
        n = len(data)
        if n == 0 or n > 256:
            raise ValueError(f"degree must be in 1..256, got {n}")
        if max(data) >= n:
            raise ValueError("image out of range")
        self.images = data
        self._table = data + bytes(256 - n)

    @classmethod
    def identity(cls, n: int = N_STATES) -> "Transformation":
        return cls(range(n))

    @classmethod
    def from_function(cls, fn, n: int = N_STATES) -> "Transformation":
        return cls(fn(x) for x in range(n))

    @classmethod
    def from_array(cls, arr) -> "Transformation":
        return cls(np.asarray(arr, dtype=np.uint8).tobytes())

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Transformation") -> "Transformation":
        return compose(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Transformation):
            return NotImplemented
        return self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self) -> Iterator[int]:
        return iter(self.images)

    def __repr__(self) -> str:
        return f"Transformation({list(self.images)})"

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.images, dtype=np.uint8)

    def power(self, k: int) -> "Transformation":
        if k < 1:
            raise ValueError("power must be positive")
        result, base = None, self
        while k:
            if k & 1:
                result = base if result is None else compose(result, base)
            base = compose(base, base)
            k >>= 1
        return result

    def image(self, subset: Optional[Iterable[int]] = None) -> frozenset:
        return image_set(self, subset)


def compose(f: Transformation, g: Transformation) -> Transformation:
    """Return ``h`` with ``h(x) = g(f(x))``."""
    if f.degree != g.degree:
        raise ValueError("degree mismatch")
    out = Transformation.__new__(Transformation)
    out.images = f.images.translate(g._table)
    out._table = out.images + bytes(256 - len(out.images))
    return out


def image_set(f: Transformation, subset: Optional[Iterable[int]] = None) -> frozenset:
    if subset is None:
        return frozenset(f.images)
    imgs = f.images
    return frozenset(imgs[x] for x in subset)


def is_permutation_on(f: Transformation, subset: Iterable[int]) -> bool:
    """True iff ``f`` maps ``subset`` onto itself bijectively."""
    points = frozenset(subset)
    if not points:
        raise ValueError("subset must be non-empty")
    return image_set(f, points) == points


# -- bit masks -------------------------------------------------------------

def to_mask(subset: Iterable[int]) -> int:
    m = 0
    for x in subset:
        m |= 1 << x
    return m


def from_mask(mask: int) -> frozenset:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


def mask_members(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class MaskAction:
    """Fast image computation of bit-mask subsets under one transformation.

    The 64 points are split into eight bytes; for each byte position a 256
    entry table holds the OR of the images of the points set in that byte.
    """

    __slots__ = ("transformation", "_tables")

    def __init__(self, f: Transformation):
        self.transformation = f
        n = f.degree
        nbytes = (n + 7) // 8
        tables = []
        for chunk in range(nbytes):
            base = [0] * 256
            for bits in range(1, 256):
                low = bits & -bits
                x = chunk * 8 + low.bit_length() - 1
                img = (1 << f.images[x]) if x < n else 0
                base[bits] = base[bits ^ low] | img
            tables.append(base)
        self._tables = tables

    def __call__(self, mask: int) -> int:
        r = 0
        for table in self._tables:
            if mask & 0xFF:
                r |= table[mask & 0xFF]
            mask >>= 8
            if not mask:
                break
        return r


# -- words -----------------------------------------------------------------

def token_key(token: str) -> tuple[int, int]:
    """Sort key giving the order t < c1 < d1 < c2 < d2 < ..."""
    if token == "t":
        return (0, 0)
    return (int(token[1:]), 0 if token[0] == "c" else 1)


def parse_word(text: str | Iterable[str]) -> tuple[str, ...]:
    """Parse whitespace separated tokens ``t``, ``c<i>``, ``d<i>``.

    Glued forms such as ``d2c1t`` are accepted too, since that is how words
    are usually written down.
    """
    if not isinstance(text, str):
        tokens = list(text)
    else:
        tokens = []
        for chunk in text.split():
            if _TOKEN_RE.match(chunk):
                tokens.append(chunk)
                continue
            pieces = re.findall(r"t|[cd]\d|.", chunk)
            tokens.extend(pieces)
    for pos, tok in enumerate(tokens):
        if not _TOKEN_RE.match(tok):
            raise WordError(f"bad token {tok!r} at position {pos}", tok, pos)
    return tuple(tokens)


def format_word(word: Iterable[str]) -> str:
    return " ".join(word)


class GeneratorSet(Mapping):
    """Named generators in canonical token order."""

    def __init__(self, generators: Mapping[str, Transformation], **meta):
        items = sorted(generators.items(), key=lambda kv: token_key(kv[0]))
        if not items:
            raise ValueError("empty generator set")
        degrees = {g.degree for _, g in items}
        if len(degrees) != 1:
            raise ValueError("generators must share a degree")
        self._gens = dict(items)
        self.meta = dict(meta)

    def __getitem__(self, token: str) -> Transformation:
        return self._gens[token]

    def __iter__(self):
        return iter(self._gens)

    def __len__(self) -> int:
        return len(self._gens)

    def __repr__(self) -> str:
        return f"GeneratorSet({list(self._gens)}, {self.meta})"

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self._gens)

    @property
    def degree(self) -> int:
        return next(iter(self._gens.values())).degree

    def transformations(self) -> list[Transformation]:
        return list(self._gens.values())


def eval_word(word: str | Iterable[str], gens: Mapping[str, Transformation]) -> Transformation:
    tokens = parse_word(word)
    n = gens.degree if isinstance(gens, GeneratorSet) else N_STATES
    result = Transformation.identity(n)
    for pos, tok in enumerate(tokens):
        try:
            g = gens[tok]
        except KeyError:
            raise WordError(f"unknown generator {tok!r} at position {pos}", tok, pos) from None
        result = compose(result, g)
    return result
