"""Simplicial cones, Oka centers and the Fujiki-Oka resolution.

A cone that is semi-unimodular over an apex ``P_1`` (the facet opposite
``P_1`` is smooth) has a cyclic singularity ``1/r(1, a_2, ..., a_n)``
read off in the ray basis ``P_1, ..., P_n``.  Its Oka center
``C = (P_1 + sum a_i P_i) / r`` splits it into the smooth cone
``(C, P_2, ..., P_n)`` and the cones ``tau_i`` obtained by replacing
``P_i`` with ``C``; each ``tau_i`` is again semi-unimodular over ``P_1``.
Repeating this until every cone is smooth gives the continued fraction
fan.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from ._linalg import bezout, det, integer_scaled, inverse, row_times, scaled_inverse
from .contfrac import NotSemiUnimodular, Word, format_word, shortlex
from .lattice import (
    Overlattice,
    Point,
    ProperFraction,
    cone_determinant,
    format_point,
    is_primitive,
    point_age,
    unit_vector,
)


class NotSmooth(ValueError):
    pass


class ResourceLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Cone:
    rays: tuple[Point, ...]

    def __post_init__(self):
        rays = tuple(tuple(Fraction(c) for c in r) for r in self.rays)
        if len(set(rays)) != len(rays):
            raise ValueError("cone rays must be pairwise distinct")
        object.__setattr__(self, "rays", rays)

    def __len__(self):
        return len(self.rays)

    def __str__(self):
        return "Cone(" + ", ".join(format_point(r) for r in self.rays) + ")"


def orthant(n: int) -> Cone:
    return Cone(tuple(unit_vector(n, i) for i in range(n)))


@dataclass
class Fan:
    """Maximal cones of a simplicial fan together with its lattice."""

    lattice: Overlattice
    cones: list[Cone]

    @cached_property
    def rays(self) -> list[Point]:
        return sorted({r for c in self.cones for r in c.rays})

    def __len__(self):
        return len(self.cones)


@dataclass
class TranscriptNode:
    word: Word
    rays: tuple[Point, ...]  # apex first
    type: ProperFraction
    center: Point
    children: tuple[Word, ...]


@dataclass
class ResolutionTranscript:
    nodes: dict[Word, TranscriptNode] = field(default_factory=dict)

    def types(self) -> dict[Word, ProperFraction]:
        return {w: node.type for w, node in self.nodes.items()}

    def __len__(self):
        return len(self.nodes)


def _apex_first(rays: Sequence[Point], apex: int) -> tuple[Point, ...]:
    if not 0 <= apex < len(rays):
        raise IndexError(f"apex {apex} outside 0..{len(rays) - 1}")
    return (rays[apex],) + tuple(rays[:apex]) + tuple(rays[apex + 1:])


def _type_of(rays: tuple[Point, ...], lattice: Overlattice) -> ProperFraction:
    """Singularity type of ``Cone(rays)`` over ``rays[0]``."""
    n = lattice.rank
    m, scale = integer_scaled(rays)
    d, adj = scaled_inverse(m)
    if d == 0:
        raise ValueError("rays are linearly dependent")
    # rays^{-1} = scale * adj / d, and |det rays| = |d| / scale^n
    r = Fraction(abs(d), scale ** n) * lattice.index
    if r.denominator != 1:
        raise ValueError("cone rays are not in the lattice")
    r = int(r)
    if r == 1:
        return ProperFraction.identity(n)
    basis, bscale = lattice.scaled_basis
    coords = [[Fraction(scale * sum(b[k] * adj[k][j] for k in range(n)), bscale * d)
               for j in range(n)] for b in basis]
    # the apex coordinate embeds N'/<rays> into Q/Z exactly when the
    # opposite facet is smooth
    lead = [c[0] * r for c in coords]
    if any(x.denominator != 1 for x in lead):
        raise ValueError("cone rays are not in the lattice")
    mult, g = bezout([int(x) for x in lead] + [r])
    if g != 1:
        raise NotSemiUnimodular("facet opposite the apex is not smooth")
    x = [sum((mult[k] * coords[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
    nums = tuple(int(v * r) % r for v in x)
    assert nums[0] == 1
    return ProperFraction(nums, r)


def singularity_type(cone: Cone, apex: int, lattice: Overlattice) -> ProperFraction:
    """Type ``1/r(1, a_2, ..., a_n)`` of ``cone`` over ray ``apex``.

    The entries follow the apex-first ray order: the apex, then the other
    rays in their original order.
    """
    return _type_of(_apex_first(cone.rays, apex), lattice)


def _center(rays: tuple[Point, ...], f: ProperFraction) -> Point:
    r = f.denominator
    n = len(rays)
    return tuple(sum((f.numerators[k] * rays[k][j] for k in range(n)), Fraction(0)) / r
                 for j in range(n))


def oka_center(cone: Cone, apex: int, lattice: Overlattice) -> Point:
    rays = _apex_first(cone.rays, apex)
    f = _type_of(rays, lattice)
    if f.is_trivial:
        raise ValueError(f"{cone} is smooth; no Oka center")
    return _center(rays, f)


def fujiki_oka_resolve(cone: Cone, apex: int, lattice: Overlattice,
                       max_cones: int | None = None) -> tuple[Fan, ResolutionTranscript]:
    """Continued fraction fan of ``cone`` over ``apex``.

    Maximal cones are listed in shortlex order of the word that produced
    them; the node at word ``w`` of the transcript carries the cone whose
    type is the remainder-polynomial coefficient at ``w``.
    """
    root = _apex_first(cone.rays, apex)
    n = lattice.rank
    leaves: list[tuple[Word, Cone]] = []
    transcript = ResolutionTranscript()
    stack: list[tuple[Word, tuple[Point, ...]]] = [((), root)]
    while stack:
        word, rays = stack.pop()
        f = _type_of(rays, lattice)
        if f.is_trivial:
            leaves.append((word, Cone(rays)))
            continue
        c = _center(rays, f)
        leaves.append((word + (1,), Cone((c,) + rays[1:])))
        children = []
        for i in range(2, n + 1):
            if f.numerators[i - 1] == 0:
                continue
            child = rays[:i - 1] + (c,) + rays[i:]
            children.append(word + (i,))
            stack.append((word + (i,), child))
        transcript.nodes[word] = TranscriptNode(word, rays, f, c, tuple(children))
        if max_cones is not None and len(leaves) + len(stack) > max_cones:
            raise ResourceLimitExceeded(f"resolution exceeds {max_cones} cones")
    leaves.sort(key=lambda wc: shortlex(wc[0]))
    transcript.nodes = dict(sorted(transcript.nodes.items(), key=lambda kv: shortlex(kv[0])))
    return Fan(lattice, [c for _, c in leaves]), transcript


def is_unit_vector(p: Point) -> bool:
    return sum(1 for c in p if c) == 1 and sum(p) == 1


def fan_discrepancies(fan: Fan, lattice: Overlattice | None = None) -> dict[Point, Fraction]:
    """``age - 1`` for every exceptional ray (unit vectors are skipped)."""
    lattice = lattice or fan.lattice
    out = {}
    for ray in fan.rays:
        if is_unit_vector(ray):
            continue
        if not is_primitive(lattice, ray):
            raise ValueError(f"ray {format_point(ray)} is not primitive")
        out[ray] = point_age(ray) - 1
    return out


def is_crepant(fan: Fan, lattice: Overlattice | None = None) -> bool:
    lattice = lattice or fan.lattice
    for cone in fan.cones:
        if cone_determinant(lattice, cone.rays) != 1:
            raise NotSmooth(f"{cone} is not smooth")
    return all(d == 0 for d in fan_discrepancies(fan, lattice).values())


# -- independent validity audit ---------------------------------------------

@dataclass
class VerificationReport:
    failures: list[str] = field(default_factory=list)
    checked_pairs: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(self.failures)


def _positive_max(c: list[Fraction], a: list[list[Fraction]], b: list[Fraction]) -> bool:
    """Whether ``max c.x`` over ``a x <= b, x >= 0`` is positive (``b >= 0``).

    Plain tableau simplex with Bland's rule, exact arithmetic; the origin
    is the starting vertex.
    """
    m, n = len(a), len(c)
    tab = [list(a[i]) + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    obj = [-x for x in c] + [Fraction(0)] * (m + 1)
    basis = [n + i for i in range(m)]
    while True:
        if obj[-1] > 0:
            return True
        enter = next((j for j in range(n + m) if obj[j] < 0), None)
        if enter is None:
            return False
        row = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                if row is None or ratio < best or (ratio == best and basis[i] < basis[row]):
                    row, best = i, ratio
        if row is None:
            return True
        p = tab[row][enter]
        tab[row] = [x / p for x in tab[row]]
        for i in range(m):
            if i != row and tab[i][enter]:
                f = tab[i][enter]
                tab[i] = [u - f * v for u, v in zip(tab[i], tab[row])]
        f = obj[enter]
        obj = [u - f * v for u, v in zip(obj, tab[row])]
        basis[row] = enter


def _meet_in_common_face(a: tuple[Point, ...], b: tuple[Point, ...]) -> bool:
    """Exact test that two full-dimensional simplicial cones meet in a common face.

    Writes points of ``b`` in the ray basis of ``a``; the cones meet
    properly iff no common point uses a non-shared ray with positive weight.
    """
    shared = set(a) & set(b)
    inv = inverse(a)
    n = len(a)
    lam = [row_times(ray, inv) for ray in b]  # lam[j][i]: weight of a_i in b_j
    c = []
    for j, ray in enumerate(b):
        cj = Fraction(int(ray not in shared))
        cj += sum((lam[j][i] for i in range(n) if a[i] not in shared), Fraction(0))
        c.append(cj)
    rows = [[-lam[j][i] for j in range(n)] for i in range(n)]
    rows.append([Fraction(1)] * n)
    rhs = [Fraction(0)] * n + [Fraction(1)]
    return not _positive_max(c, rows, rhs)


def _facet_separates(a: tuple[Point, ...], inv_a, b: tuple[Point, ...], shared) -> bool:
    """Some facet hyperplane of ``a`` has ``b`` on its far side, touching it
    exactly along the shared rays; then ``a`` and ``b`` meet in ``cone(shared)``."""
    coords = [row_times(ray, inv_a) for ray in b]
    for k in range(len(a)):
        if a[k] in shared:
            continue
        if all(c[k] <= 0 for c in coords):
            if {ray for ray, c in zip(b, coords) if c[k] == 0} == shared:
                return True
    return False


def _opposite_sides(shared: list[Point], p: Point, q: Point) -> bool:
    sp = det(list(shared) + [p])
    sq = det(list(shared) + [q])
    return sp * sq < 0


def verify_resolution(fan: Fan, lattice: Overlattice | None, root: Cone) -> VerificationReport:
    """Audit ``fan`` as a smooth subdivision of ``root``.

    Checks that every cone is smooth, that cone volumes add up to the root
    volume, that any two cones meet in a common face and that every ray
    lies in the root cone.
    """
    lattice = lattice or fan.lattice
    report = VerificationReport()
    n = lattice.rank
    cones = [c.rays for c in fan.cones]

    for k, rays in enumerate(cones):
        if len(rays) != n:
            report.failures.append(f"cone {k} has {len(rays)} rays, expected {n}")
            continue
        if any(ray not in lattice for ray in rays):
            report.failures.append(f"cone {k} has a ray outside the lattice")
            continue
        try:
            d = cone_determinant(lattice, rays)
        except ValueError as exc:
            report.failures.append(f"cone {k}: {exc}")
            continue
        if d != 1:
            report.failures.append(f"cone {k} is not smooth (determinant {d})")
    if report.failures:
        return report

    root_inv = inverse(root.rays)
    for ray in sorted({r for rays in cones for r in rays}):
        if any(x < 0 for x in row_times(ray, root_inv)) or not any(ray):
            report.failures.append(f"ray {format_point(ray)} lies outside the root cone")
    if report.failures:
        return report

    # Rays are scaled onto the slice where the root's dual functional is 1;
    # determinants of scaled cones are additive over a subdivision.
    def normalised(ray):
        h = sum(row_times(ray, root_inv))
        return tuple(x / h for x in ray)

    slices = [[normalised(r) for r in rays] for rays in cones]
    volume = sum((abs(det(pts)) for pts in slices), Fraction(0))
    root_volume = abs(det(root.rays))
    if volume != root_volume:
        report.failures.append(f"volume mismatch: cones sum to {volume}, root has {root_volume}")

    inverses: dict[int, list[list[Fraction]]] = {}

    def inv_of(k):
        if k not in inverses:
            inverses[k] = inverse(cones[k])
        return inverses[k]

    boxes = []
    for pts in slices:
        boxes.append(([min(p[i] for p in pts) for i in range(n)],
                      [max(p[i] for p in pts) for i in range(n)]))
    for i, j in combinations(range(len(cones)), 2):
        (lo1, hi1), (lo2, hi2) = boxes[i], boxes[j]
        if any(hi1[k] < lo2[k] or hi2[k] < lo1[k] for k in range(n)):
            continue
        a, b = cones[i], cones[j]
        shared = [r for r in a if r in b]
        report.checked_pairs += 1
        if len(shared) == n:
            report.failures.append(f"cones {i} and {j} coincide")
            continue
        if len(shared) == n - 1:
            p = next(r for r in a if r not in shared)
            q = next(r for r in b if r not in shared)
            if not _opposite_sides(shared, p, q):
                report.failures.append(f"cones {i} and {j} overlap across a shared facet")
            continue
        common = set(shared)
        if _facet_separates(a, inv_of(i), b, common) or _facet_separates(b, inv_of(j), a, common):
            continue
        if not _meet_in_common_face(a, b):
            report.failures.append(f"cones {i} and {j} do not meet in a common face")
    return report


def transcript_lines(transcript: ResolutionTranscript) -> list[str]:
    return [f"{format_word(w)}: {node.type} center {format_point(node.center)}"
            for w, node in transcript.nodes.items()]
