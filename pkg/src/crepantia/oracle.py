"""Brute-force checks that share no code path with the constructions.

Everything here works from the raw generators of an overlattice: the
quotient ``N'/Z^n`` is enumerated by closing the numerator vectors under
addition modulo a common denominator, and points of the orthant are
found by filtering that list.

Why the unit box suffices for the Hilbert basis: a point of the orthant
with some coordinate ``>= 1`` splits off a unit vector (or is one), so
every irreducible point other than ``e_i`` has all coordinates in
``[0, 1)`` and is therefore a coset representative.  A representative
``p`` is reducible exactly when some other nonzero lattice point ``q``
of the orthant satisfies ``q <= p`` componentwise, since then
``p = q + (p - q)`` with both parts nonzero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .contfrac import NotGorenstein, remainder_polynomial
from .fan import fujiki_oka_resolve, orthant
from .lattice import Overlattice, Point, ProperFraction, overlattice


def box_points(lattice: Overlattice) -> list[Point]:
    """All points of the lattice in ``[0, 1)^n``, zero included."""
    n = lattice.rank
    gens = lattice.generators
    d = lcm(*(g.denominator for g in gens)) if gens else 1
    steps = [tuple(a * (d // g.denominator) for a in g.numerators) for g in gens]
    zero = (0,) * n
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for v in frontier:
            for s in steps:
                w = tuple((x + y) % d for x, y in zip(v, s))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return sorted(tuple(Fraction(x, d) for x in v) for v in seen)


def _units(n: int) -> list[Point]:
    return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]


def _below(q: Point, p: Point) -> bool:
    return all(a <= b for a, b in zip(q, p))


def hilbert_basis(lattice: Overlattice) -> frozenset[Point]:
    """Irreducible nonzero lattice points of the positive orthant."""
    n = lattice.rank
    candidates = [p for p in box_points(lattice) if any(p)] + _units(n)
    basis = set()
    for p in candidates:
        if not any(q != p and _below(q, p) for q in candidates):
            basis.add(p)
    return frozenset(basis)


@dataclass(frozen=True)
class JuniorPoints:
    elements: frozenset[Point]
    vertices: frozenset[Point]

    def all(self) -> frozenset[Point]:
        return self.elements | self.vertices


def junior_points(lattice: Overlattice) -> JuniorPoints:
    """Age-1 lattice points of the orthant, split into elements and vertices."""
    elements = frozenset(p for p in box_points(lattice) if sum(p) == 1)
    return JuniorPoints(elements, frozenset(_units(lattice.rank)))


def first_existence_check(lattice: Overlattice) -> bool:
    """Necessary condition for a crepant resolution.

    True when every Hilbert basis element is a junior element or a
    vertex of the junior simplex.  False rules crepant resolutions out.
    """
    for g in lattice.generators:
        if Fraction(sum(g.numerators), g.denominator).denominator != 1:
            raise NotGorenstein(f"{g} does not have integer age")
    return hilbert_basis(lattice) <= junior_points(lattice).all()


def cross_check_types(f: ProperFraction) -> bool:
    """Transcript types of the continued fraction fan agree with ``R_*(f)``."""
    n = len(f)
    _, transcript = fujiki_oka_resolve(orthant(n), 0, overlattice([f], n))
    return transcript.types() == dict(remainder_polynomial(f).items())


def parallelepiped_count(lattice: Overlattice, rays: Sequence[Point]) -> int:
    """Lattice points in the half-open parallelepiped spanned by ``rays``.

    Equals the cone determinant; computed by exhaustive search over
    integer shifts of the box representatives.
    """
    n = lattice.rank
    rays = [tuple(Fraction(c) for c in r) for r in rays]
    inv = _inverse(rays)
    lo = [min(0, *(sum(r[i] for r, t in zip(rays, pick) if t) for pick in _corners(n)))
          for i in range(n)]
    hi = [max(0, *(sum(r[i] for r, t in zip(rays, pick) if t) for pick in _corners(n)))
          for i in range(n)]
    count = 0
    for rep in box_points(lattice):
        ranges = [range(int(lo[i]) - 1, int(hi[i]) + 1) for i in range(n)]
        for shift in itertools.product(*ranges):
            p = [c + s for c, s in zip(rep, shift)]
            t = [sum(p[k] * inv[k][j] for k in range(n)) for j in range(n)]
            if all(0 <= x < 1 for x in t):
                count += 1
    return count


def _corners(n: int):
    return itertools.product((0, 1), repeat=n)


def _inverse(m: list[Point]) -> list[list[Fraction]]:
    """Inverse by cofactors: slow, but independent of the elimination kernel."""
    n = len(m)

    def minor(a, i, j):
        return [row[:j] + row[j + 1:] for k, row in enumerate(a) if k != i]

    def determinant(a):
        if len(a) == 1:
            return a[0][0]
        return sum((-1) ** j * a[0][j] * determinant(minor(a, 0, j)) for j in range(len(a)))

    rows = [list(r) for r in m]
    d = determinant(rows)
    if d == 0:
        raise ValueError("rays are linearly dependent")
    return [[(-1) ** (i + j) * determinant(minor(rows, j, i)) / d for j in range(n)]
            for i in range(n)]
