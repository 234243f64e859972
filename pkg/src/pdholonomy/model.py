"""The spatial prisoner's dilemma on a small toroidal lattice.

States are integers whose binary expansion, most significant bit first,
lists the strategy of cells 1..n (1 = cooperate, 0 = defect).  All payoff
arithmetic is done with :class:`fractions.Fraction` so that regime
boundaries such as ``b = 4`` are decided exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from .transform import GeneratorSet, Transformation, compose

C, D = 1, 0
STRATEGY_NAMES = {C: "C", D: "D"}

Rational = Union[Fraction, int, str, float]


class DomainError(ValueError):
    pass


def parse_b(value: Rational) -> Fraction:
    """Parse a temptation value exactly; ``"7/2"`` and ``"3.5"`` are equal."""
    if isinstance(value, float):
        # decimal string form keeps 3.5 exact rather than the binary float
        value = repr(value)
    try:
        b = Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse b={value!r}") from exc
    if b < 3:
        raise DomainError(f"b must be >= 3, got {b}")
    return b


def _strategy(s) -> int:
    if s in (C, "C", "c"):
        return C
    if s in (D, "D", "d"):
        return D
    raise DomainError(f"unknown strategy {s!r}")


@dataclass(frozen=True)
class Lattice:
    """Toroidal grid with von Neumann neighbourhoods.

    Cells are numbered column by column, top to bottom, starting at 1, so the
    2x3 lattice reads::

        1 3 5
        2 4 6
    """

    rows: int = 2
    cols: int = 3
    neighbours: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        table = {}
        for c in range(self.cols):
            for r in range(self.rows):
                nbrs = []
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    rr, cc = (r + dr) % self.rows, (c + dc) % self.cols
                    j = self.cell_id(rr, cc)
                    if j != self.cell_id(r, c) and j not in nbrs:
                        nbrs.append(j)
                table[self.cell_id(r, c)] = tuple(sorted(nbrs))
        object.__setattr__(self, "neighbours", table)

    def cell_id(self, row: int, col: int) -> int:
        return col * self.rows + row + 1

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    @property
    def n_states(self) -> int:
        return 1 << self.n_cells

    @property
    def cells(self) -> range:
        return range(1, self.n_cells + 1)

    def check_cell(self, cell: int) -> int:
        if cell not in self.cells:
            raise DomainError(f"cell {cell} out of range 1..{self.n_cells}")
        return cell

    def bit(self, x: int, cell: int) -> int:
        return (x >> (self.n_cells - cell)) & 1

    def decode(self, x: int) -> tuple[int, ...]:
        if not 0 <= x < self.n_states:
            raise DomainError(f"state {x} out of range")
        return tuple(self.bit(x, i) for i in self.cells)

    def encode(self, strategies: Iterable[int]) -> int:
        bits = list(strategies)
        if len(bits) != self.n_cells:
            raise DomainError(f"expected {self.n_cells} strategies")
        x = 0
        for s in bits:
            x = (x << 1) | _strategy(s)
        return x

    def to_binary(self, x: int) -> str:
        return format(x, f"0{self.n_cells}b")

    def parse_state(self, text: str | int) -> int:
        """Accept decimal (``"42"``) or full-width binary (``"101010"``)."""
        if isinstance(text, int):
            x = text
        else:
            text = text.strip()
            if len(text) == self.n_cells and set(text) <= {"0", "1"}:
                x = int(text, 2)
            else:
                try:
                    x = int(text, 10)
                except ValueError:
                    raise DomainError(f"bad state literal {text!r}") from None
        if not 0 <= x < self.n_states:
            raise DomainError(f"state {x} out of range")
        return x


LATTICE = Lattice()


def pairwise_payoff(s1, s2, b: Rational) -> Fraction:
    """Payoff to player one for strategies ``s1`` against ``s2``."""
    b = parse_b(b)
    s1, s2 = _strategy(s1), _strategy(s2)
    if s1 == D:
        return Fraction(1) if s2 == D else b
    return Fraction(0) if s2 == D else Fraction(3)


def cell_payoff(x: int, cell: int, b: Rational, lattice: Lattice = LATTICE) -> Fraction:
    lattice.check_cell(cell)
    b = parse_b(b)
    own = lattice.bit(x, cell)
    return sum((pairwise_payoff(own, lattice.bit(x, j), b) for j in lattice.neighbours[cell]),
               Fraction(0))


def _next_state(x: int, b: Fraction, lattice: Lattice) -> int:
    pay = {i: cell_payoff(x, i, b, lattice) for i in lattice.cells}
    y = 0
    for i in lattice.cells:
        s = lattice.bit(x, i)
        nbrs = lattice.neighbours[i]
        best = max(pay[j] for j in nbrs)
        if best > pay[i]:
            winners = {lattice.bit(x, j) for j in nbrs if pay[j] == best}
            s = C if C in winners else D
        y = (y << 1) | s
    return y


@lru_cache(maxsize=None)
def _step_map_cached(b: Fraction, lattice: Lattice) -> Transformation:
    return Transformation(_next_state(x, b, lattice) for x in range(lattice.n_states))


def step_map(b: Rational, lattice: Lattice = LATTICE) -> Transformation:
    """The synchronous imitate-the-best update ``t`` for temptation ``b``."""
    return _step_map_cached(parse_b(b), lattice)


def reset_map(cell: int, s, lattice: Lattice = LATTICE) -> Transformation:
    """``c<cell>`` (``s`` = C) or ``d<cell>`` (``s`` = D)."""
    lattice.check_cell(cell)
    mask = 1 << (lattice.n_cells - cell)
    if _strategy(s) == C:
        return Transformation((x | mask) for x in range(lattice.n_states))
    return Transformation((x & ~mask) for x in range(lattice.n_states))


def generator_set(b: Rational, open_cells: Iterable[int] = (),
                  lattice: Lattice = LATTICE) -> GeneratorSet:
    b = parse_b(b)
    cells = sorted(set(open_cells))
    for i in cells:
        lattice.check_cell(i)
    gens = {"t": step_map(b, lattice)}
    for i in cells:
        gens[f"c{i}"] = reset_map(i, C, lattice)
        gens[f"d{i}"] = reset_map(i, D, lattice)
    return GeneratorSet(gens, b=b, open_cells=tuple(cells))


def reset_generators(open_cells: Iterable[int], lattice: Lattice = LATTICE) -> GeneratorSet:
    """Only the reset maps for ``open_cells``, without ``t``."""
    gens = {}
    for i in sorted(set(open_cells)):
        gens[f"c{i}"] = reset_map(i, C, lattice)
        gens[f"d{i}"] = reset_map(i, D, lattice)
    return GeneratorSet(gens, open_cells=tuple(sorted(set(open_cells))))


# -- regimes -----------------------------------------------------------------

def _payoff_forms(lattice: Lattice):
    n = len(next(iter(lattice.neighbours.values())))
    # k games won as a defector against cooperators give k*b, the rest 0, 1 or 3
    return [(k, m) for k in range(n + 1) for m in range(3 * n + 1)]


def critical_b_values(lattice: Lattice = LATTICE) -> list[Fraction]:
    """Values of b >= 3 where the step map changes."""
    forms = _payoff_forms(lattice)
    candidates = set()
    for k1, m1 in forms:
        for k2, m2 in forms:
            if k1 > k2:
                b = Fraction(m2 - m1, k1 - k2)
                if b >= 3:
                    candidates.add(b)
    cands = sorted(candidates)
    gaps = [y - x for x, y in zip(cands, cands[1:])]
    eps = min(gaps) / 4 if gaps else Fraction(1, 4)
    out = []
    for b in cands:
        here = step_map(b, lattice)
        right = step_map(b + eps, lattice)
        left = step_map(b - eps, lattice) if b - eps >= 3 else here
        if here != left or here != right:
            out.append(b)
    return out


def regime_of(b: Rational) -> str:
    b = parse_b(b)
    if b > 4:
        return "A"
    if b == 4:
        return "B"
    if b > 3:
        return "C"
    return "D"


REGIME_REPRESENTATIVES = {"A": Fraction(5), "B": Fraction(4), "C": Fraction(7, 2), "D": Fraction(3)}

