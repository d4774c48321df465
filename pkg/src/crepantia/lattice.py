"""Proper fractions, diagonal group elements and overlattices of Z^n.

Points are tuples of :class:`fractions.Fraction` in the fixed basis
``e_1, ..., e_n``.  An :class:`Overlattice` is ``Z^n`` plus the integer
span of finitely many proper fractions, stored through a canonical
(Hermite normal form) basis so that equal lattices compare equal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, floor, gcd
from typing import Iterable, Sequence

from ._linalg import hermite_normal_form, int_det, integer_scaled, lcm, solve_combination

Point = tuple[Fraction, ...]
LatticePoint = Point


def point(*coords) -> Point:
    """Build a point from ints, Fractions or strings like ``"2/11"``."""
    if len(coords) == 1 and not isinstance(coords[0], (int, Fraction, str)):
        coords = tuple(coords[0])
    return tuple(Fraction(c) for c in coords)


def unit_vector(n: int, i: int) -> Point:
    """``e_{i+1}`` in rank ``n`` (``i`` is 0-based)."""
    return tuple(Fraction(int(k == i)) for k in range(n))


def point_age(p: Sequence[Fraction]) -> Fraction:
    return sum(p, Fraction(0))


def format_point(p: Sequence[Fraction]) -> str:
    den = lcm(*(Fraction(c).denominator for c in p))
    nums = ",".join(str(int(c * den)) for c in p)
    return f"({nums})" if den == 1 else f"1/{den}({nums})"


@dataclass(frozen=True, order=True)
class ProperFraction:
    """``1/r (a_1, ..., a_n)`` with entries reduced into ``[0, r)``.

    The common factor ``gcd(r, a_1, ..., a_n)`` is divided out on
    construction, so the denominator is the exact order of the group
    element.  ``ProperFraction((0, 0, 0), 1)`` is the excluded trivial
    fraction.
    """

    numerators: tuple[int, ...]
    denominator: int

    def __post_init__(self):
        nums = tuple(int(a) for a in self.numerators)
        r = int(self.denominator)
        if not nums:
            raise ValueError("proper fraction needs at least one entry")
        if r <= 0:
            raise ValueError(f"denominator must be positive, got {r}")
        nums = tuple(a % r for a in nums)
        g = gcd(r, *nums)
        object.__setattr__(self, "numerators", tuple(a // g for a in nums))
        object.__setattr__(self, "denominator", r // g)

    def __len__(self) -> int:
        return len(self.numerators)

    def __iter__(self):
        return iter(self.numerators)

    def __getitem__(self, i: int) -> int:
        return self.numerators[i]

    def __str__(self) -> str:
        return f"1/{self.denominator}({','.join(map(str, self.numerators))})"

    @property
    def rank(self) -> int:
        return len(self.numerators)

    @property
    def age(self) -> Fraction:
        return Fraction(sum(self.numerators), self.denominator)

    @property
    def height(self) -> int:
        return sum(1 for a in self.numerators if a)

    @property
    def order(self) -> int:
        return self.denominator

    @property
    def is_trivial(self) -> bool:
        return self.denominator == 1

    @property
    def is_semi_unimodular(self) -> bool:
        return 1 in self.numerators and self.denominator > 1

    @property
    def point(self) -> Point:
        r = self.denominator
        return tuple(Fraction(a, r) for a in self.numerators)

    def __add__(self, other: ProperFraction) -> ProperFraction:
        if len(other) != len(self):
            raise ValueError("rank mismatch")
        r = lcm(self.denominator, other.denominator)
        s, t = r // self.denominator, r // other.denominator
        return ProperFraction(tuple(s * a + t * b for a, b in zip(self, other)), r)

    def __mul__(self, k: int) -> ProperFraction:
        return ProperFraction(tuple(k * a for a in self.numerators), self.denominator)

    __rmul__ = __mul__

    def __neg__(self) -> ProperFraction:
        return self * -1

    inverse = __neg__

    @classmethod
    def identity(cls, n: int) -> ProperFraction:
        return cls((0,) * n, 1)

    @classmethod
    def from_point(cls, p: Sequence[Fraction]) -> ProperFraction:
        """Reduce a rational point modulo ``Z^n``."""
        den = lcm(*(Fraction(c).denominator for c in p))
        return cls(tuple(int(Fraction(c) * den) for c in p), den)


GroupElement = ProperFraction


def make_proper_fraction(a: Sequence[int], r: int) -> ProperFraction:
    return ProperFraction(tuple(a), r)


def age(x: ProperFraction | Sequence[Fraction]) -> Fraction:
    if isinstance(x, ProperFraction):
        return x.age
    return point_age(x)


def height(g: ProperFraction) -> int:
    """Rank of ``g - I`` for the diagonal action ``g``."""
    return g.height


def generated_group(generators: Iterable[ProperFraction], n: int) -> list[ProperFraction]:
    """All elements of the group generated by ``generators`` (identity first)."""
    gens = [g for g in generators if not g.is_trivial]
    for g in gens:
        if len(g) != n:
            raise ValueError(f"generator {g} does not have rank {n}")
    identity = ProperFraction.identity(n)
    seen = {identity}
    out = [identity]
    frontier = [identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x + g
                if y not in seen:
                    seen.add(y)
                    out.append(y)
                    nxt.append(y)
        frontier = nxt
    return out


@dataclass(frozen=True)
class Overlattice:
    """``Z^n + sum_k g_k Z`` for proper fractions ``g_k``.

    ``basis`` holds the rows of the canonical basis: an upper triangular
    rational matrix obtained from the Hermite normal form of the
    denominator-cleared generators.  Two generator lists spanning the same
    lattice produce the same ``basis``, and equality compares bases only.
    """

    rank: int
    basis: tuple[Point, ...]
    generators: tuple[ProperFraction, ...] = field(default=(), compare=False)

    def __hash__(self):
        return hash(self.basis)

    @cached_property
    def index(self) -> int:
        """``[N' : Z^n]``."""
        d = Fraction(1)
        for i, row in enumerate(self.basis):
            d *= row[i]
        return int(1 / d)

    @cached_property
    def scaled_basis(self) -> tuple[list[list[int]], int]:
        """The basis as integer rows together with the common denominator."""
        return integer_scaled(self.basis)

    def coordinates(self, p: Sequence[Fraction]) -> list[Fraction]:
        """Coordinates of ``p`` in the canonical basis (back substitution)."""
        if len(p) != self.rank:
            raise ValueError(f"point of length {len(p)} in a rank {self.rank} lattice")
        rest = [Fraction(c) for c in p]
        out = []
        for i, row in enumerate(self.basis):
            x = rest[i] / row[i]
            out.append(x)
            if x:
                rest = [u - x * v for u, v in zip(rest, row)]
        return out

    def __contains__(self, p: Sequence[Fraction]) -> bool:
        return all(x.denominator == 1 for x in self.coordinates(p))

    def elements(self) -> list[ProperFraction]:
        """Representatives of ``N'/Z^n`` as proper fractions."""
        return generated_group(self.generators, self.rank)

    def fundamental_points(self) -> list[Point]:
        """Lattice points in the half-open unit box ``[0, 1)^n``."""
        return [g.point for g in self.elements()]


def overlattice(gens: Iterable[ProperFraction], n: int) -> Overlattice:
    gens = tuple(gens)
    for g in gens:
        if len(g) != n:
            raise ValueError(f"generator {g} does not have rank {n}")
    d = lcm(*(g.denominator for g in gens)) if gens else 1
    rows = [[d * int(i == j) for j in range(n)] for i in range(n)]
    rows += [[a * (d // g.denominator) for a in g.numerators] for g in gens]
    hnf = hermite_normal_form(rows, n)
    basis = tuple(tuple(Fraction(x, d) for x in row) for row in hnf)
    kept = tuple(g for g in gens if not g.is_trivial)
    return Overlattice(n, basis, kept)


def contains(lattice: Overlattice, p: Sequence[Fraction]) -> bool:
    return p in lattice


def primitive_representative(lattice: Overlattice, p: Sequence[Fraction]) -> Point:
    coords = lattice.coordinates(p)
    if any(x.denominator != 1 for x in coords):
        raise ValueError(f"{format_point(p)} is not in the lattice")
    k = gcd(*(int(x) for x in coords))
    if k == 0:
        raise ValueError("the zero vector has no primitive representative")
    return tuple(Fraction(c) / k for c in p)


def is_primitive(lattice: Overlattice, p: Sequence[Fraction]) -> bool:
    coords = lattice.coordinates(p)
    if any(x.denominator != 1 for x in coords):
        return False
    return gcd(*(int(x) for x in coords)) == 1


def cone_determinant(lattice: Overlattice, rays: Sequence[Sequence[Fraction]]) -> int:
    """``|det|`` of ``rays`` measured in the lattice; 1 means smooth."""
    if len(rays) != lattice.rank:
        raise ValueError(f"need {lattice.rank} rays, got {len(rays)}")
    m, scale = integer_scaled(rays)
    d = Fraction(abs(int_det(m)), scale ** lattice.rank) * lattice.index
    if d == 0:
        raise ValueError("rays are linearly dependent")
    if d.denominator != 1:
        raise ValueError("rays are not all in the lattice")
    return int(d)


def simplex_lattice_points(lattice: Overlattice,
                           vertices: Sequence[Sequence[Fraction]]) -> list[Point]:
    """All lattice points of the closed simplex spanned by ``vertices``.

    Candidates are the coset representatives of ``N'/Z^n`` shifted by
    integer vectors inside the bounding box, so the work is proportional
    to the lattice index times the box volume.
    """
    verts = [tuple(Fraction(c) for c in v) for v in vertices]
    if not verts:
        raise ValueError("empty simplex")
    base = verts[0]
    edges = [tuple(a - b for a, b in zip(v, base)) for v in verts[1:]]
    if edges:
        try:
            solve_combination(edges[0], edges)
        except ValueError:
            raise ValueError("degenerate simplex") from None
    lo = [floor(min(v[i] for v in verts)) for i in range(lattice.rank)]
    hi = [ceil(max(v[i] for v in verts)) for i in range(lattice.rank)]
    found = set()
    for rep in lattice.fundamental_points():
        ranges = [range(lo[i], hi[i] + 1) for i in range(lattice.rank)]
        for shift in itertools.product(*ranges):
            p = tuple(c + s for c, s in zip(rep, shift))
            if any(p[i] < lo[i] or p[i] > hi[i] for i in range(lattice.rank)):
                continue
            if _in_simplex(p, base, edges):
                found.add(p)
    return sorted(found)


def _in_simplex(p: Point, base: Point, edges: list[Point]) -> bool:
    if not edges:
        return p == base
    t = solve_combination(tuple(a - b for a, b in zip(p, base)), edges)
    return t is not None and all(x >= 0 for x in t) and sum(t) <= 1


def junior_simplex(n: int) -> list[Point]:
    return [unit_vector(n, i) for i in range(n)]
