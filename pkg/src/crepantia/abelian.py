"""Finite abelian diagonal groups and iterated Fujiki-Oka resolutions.

A group ``G`` is resolved in stages along a chain of subgroups
``H_1 c H_2 c ... c H_k = G``.  Stage ``j`` refines the lattice from
``N_{j-1}`` to ``N_j`` and every maximal cone of the previous fan that
is no longer smooth is resolved by an ordinary Fujiki-Oka step over a
suitable apex.  The default chain comes from a basic generating system,
starting from its last row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import permutations
from math import gcd
from typing import Sequence

from .contfrac import (
    INFINITY,
    NotSemiUnimodular,
    RemainderPolynomial,
    remainder_map,
    remainder_polynomial,
)
from .fan import (
    Cone,
    Fan,
    ResolutionTranscript,
    ResourceLimitExceeded,
    fujiki_oka_resolve,
    is_crepant,
    orthant,
    singularity_type,
)
from .lattice import (
    Overlattice,
    Point,
    ProperFraction,
    cone_determinant,
    generated_group,
    overlattice,
)


class NoAgeOneSystem(ValueError):
    """No triangular generating system with age-1 rows exists."""


class SemiUnimodularityLost(RuntimeError):
    def __init__(self, cone: Cone, stage: int):
        super().__init__(f"stage {stage}: {cone} is not semi-unimodular over any ray")
        self.cone = cone
        self.stage = stage


@dataclass(frozen=True)
class AbelianGroup:
    rank: int
    generators: tuple[ProperFraction, ...]

    def __post_init__(self):
        for g in self.generators:
            if len(g) != self.rank:
                raise ValueError(f"generator {g} does not have rank {self.rank}")

    @cached_property
    def elements(self) -> tuple[ProperFraction, ...]:
        return tuple(generated_group(self.generators, self.rank))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_gorenstein(self) -> bool:
        return all(g.age.denominator == 1 for g in self.generators)

    @cached_property
    def lattice(self) -> Overlattice:
        return overlattice(self.generators, self.rank)

    def __contains__(self, g: ProperFraction) -> bool:
        return g in set(self.elements)

    def __str__(self):
        return ";".join(str(g) for g in self.generators) or f"1/1({','.join('0' * self.rank)})"


def enumerate_group(gens: Sequence[ProperFraction], n: int | None = None) -> AbelianGroup:
    gens = tuple(gens)
    if n is None:
        if not gens:
            raise ValueError("rank is needed for an empty generator list")
        n = len(gens[0])
    group = AbelianGroup(n, gens)
    group.elements  # noqa: B018 - force the closure (and its validation)
    return group


@dataclass(frozen=True)
class BasicGeneratingSystem:
    """Triangular rows ``g_i = 1/r_i(0, ..., 0, a_ii, ..., a_in)``, ``i = 1..n-1``.

    Each row either vanishes or has ``a_ii = 1`` and age 1.  Rows are kept
    in the original coordinates; ``slot_order`` is the coordinate order in
    which they are triangular (the identity for most groups).
    """

    rank: int
    rows: tuple[ProperFraction, ...]
    slot_order: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.slot_order:
            object.__setattr__(self, "slot_order", tuple(range(self.rank)))

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(g.denominator for g in self.rows)

    def nontrivial(self) -> list[ProperFraction]:
        return [g for g in self.rows if not g.is_trivial]

    def chain(self) -> list[ProperFraction]:
        """Stage generators: last row first."""
        return self.nontrivial()[::-1]


def _row_key(g: ProperFraction, tail_slots: Sequence[int]):
    tail = tuple(g.numerators[k] for k in tail_slots)
    return (sum(1 for a in tail if a == 0), max(tail, default=0), tail[::-1])


def _triangular_rows(elements: Sequence[ProperFraction], order: Sequence[int],
                     n: int) -> list[ProperFraction] | None:
    current = list(elements)
    rows = []
    for pos, i in enumerate(order[:-1]):
        r_i = max(g.denominator // gcd(g.denominator, g.numerators[i]) for g in current)
        if r_i == 1:
            rows.append(ProperFraction.identity(n))
            continue
        candidates = [g for g in current
                      if g.denominator == r_i and g.numerators[i] == 1 and g.age == 1]
        if not candidates:
            return None
        rows.append(min(candidates, key=lambda g: _row_key(g, order[pos + 1:])))
        current = [g for g in current if g.numerators[i] == 0]
    # survivors live in the last slot alone, which SL forbids
    if any(not g.is_trivial for g in current):
        return None
    return rows


def basic_generating_system(group: AbelianGroup,
                            slot_order: Sequence[int] | None = None) -> BasicGeneratingSystem:
    """Greedy triangular search over the enumerated group.

    ``G_i`` holds the elements vanishing in the slots before ``i``; its
    image in slot ``i`` is cyclic of order ``r_i``.  Row ``i`` is an
    element of ``G_i`` with slot ``i`` equal to ``1/r_i``, order ``r_i``
    and age 1; ties go to the row with the most nonzero tail entries, then
    the smallest ones.  Without an explicit ``slot_order`` the coordinate
    orders are tried lexicographically, identity first.
    """
    n = group.rank
    if not group.is_gorenstein:
        raise NoAgeOneSystem(f"{group} is not in SL({n})")
    orders = [tuple(slot_order)] if slot_order is not None else permutations(range(n))
    elements = group.elements
    for order in orders:
        rows = _triangular_rows(elements, order, n)
        if rows is None:
            continue
        system = BasicGeneratingSystem(n, tuple(rows), tuple(order))
        if overlattice(system.nontrivial(), n) != group.lattice:
            raise AssertionError("basic generating system does not regenerate the group")
        return system
    raise NoAgeOneSystem(f"no triangular age-1 generating system for {group}")


def phi_embed(i: int, f: ProperFraction, x: Sequence[Fraction]) -> Point:
    """``x - x_i e_i + x_i f`` for ``x`` in ``Z^n + R_i(f) Z`` (``i`` is 1-based)."""
    if f.age != 1:
        raise ValueError(f"{f} is not Gorenstein of age 1")
    child = remainder_map(i, f)
    lattice = overlattice([] if child is INFINITY else [child], len(f))
    x = tuple(Fraction(c) for c in x)
    if x not in lattice:
        raise ValueError(f"point is not in the lattice of R_{i}({f})")
    xi = x[i - 1]
    return tuple(c - (xi if k == i - 1 else 0) + xi * v for k, (c, v) in enumerate(zip(x, f.point)))


@dataclass
class ConeResolution:
    cone: Cone
    apex: int
    type: ProperFraction
    transcript: ResolutionTranscript
    polynomial: RemainderPolynomial


@dataclass
class Stage:
    generator: ProperFraction
    lattice: Overlattice
    fan: Fan
    resolutions: list[ConeResolution] = field(default_factory=list)

    @property
    def polynomials(self) -> list[RemainderPolynomial]:
        return [res.polynomial for res in self.resolutions]


@dataclass
class StageTranscript:
    stages: list[Stage] = field(default_factory=list)

    def __len__(self):
        return len(self.stages)

    def coefficients(self):
        for stage in self.stages:
            for poly in stage.polynomials:
                yield from poly.coefficients()


def _apex_order(cone: Cone, generator: ProperFraction) -> list[int]:
    n = len(cone.rays)
    units = [k for k, a in enumerate(generator.numerators) if a == 1]
    if not units:
        units = [k for k, a in enumerate(generator.numerators) if a]
    preferred = [j for j, ray in enumerate(cone.rays)
                 if units and ray == tuple(Fraction(int(m == units[0])) for m in range(n))]
    return preferred + [j for j in range(n) if j not in preferred]


def _resolve_stage(fan: Fan, generator: ProperFraction, lattice: Overlattice, number: int,
                   max_cones: int | None) -> Stage:
    stage = Stage(generator, lattice, Fan(lattice, []))
    for cone in fan.cones:
        if cone_determinant(lattice, cone.rays) == 1:
            stage.fan.cones.append(cone)
            continue
        for apex in _apex_order(cone, generator):
            try:
                f = singularity_type(cone, apex, lattice)
            except NotSemiUnimodular:
                continue
            break
        else:
            raise SemiUnimodularityLost(cone, number)
        sub, transcript = fujiki_oka_resolve(cone, apex, lattice, max_cones)
        stage.fan.cones.extend(sub.cones)
        stage.resolutions.append(
            ConeResolution(cone, apex, f, transcript, remainder_polynomial(f)))
        if max_cones is not None and len(stage.fan.cones) > max_cones:
            raise ResourceLimitExceeded(f"resolution exceeds {max_cones} cones")
    return stage


def iterated_fujiki_oka(group: AbelianGroup, chain: Sequence[ProperFraction] | None = None,
                        max_cones: int | None = None) -> tuple[Fan, StageTranscript]:
    """Iterated Fujiki-Oka resolution of ``C^n / G``.

    ``chain`` lists stage generators; ``H_j`` is generated by the first
    ``j`` of them.  By default it is the basic generating system read from
    its last row upward.
    """
    n = group.rank
    if chain is None:
        chain = basic_generating_system(group).chain()
    chain = [g for g in chain if not g.is_trivial]
    if overlattice(chain, n) != group.lattice:
        raise ValueError("chain does not generate the group")
    fan = Fan(overlattice([], n), [orthant(n)])
    transcript = StageTranscript()
    for j in range(1, len(chain) + 1):
        lattice = overlattice(chain[:j], n)
        stage = _resolve_stage(fan, chain[j - 1], lattice, j, max_cones)
        transcript.stages.append(stage)
        fan = stage.fan
    return Fan(group.lattice, fan.cones), transcript


@dataclass(frozen=True)
class IteratedVerdict:
    crepant: bool
    fan_crepant: bool
    witness: ProperFraction | None = None
    fan: Fan | None = field(default=None, compare=False, repr=False)
    transcript: StageTranscript | None = field(default=None, compare=False, repr=False)

    def __str__(self):
        if self.crepant:
            return "Crepant"
        return f"NotDetermined({self.witness}, age {self.witness.age})"


def crepant_iterated(group: AbelianGroup, chain: Sequence[ProperFraction] | None = None,
                     max_cones: int | None = None) -> IteratedVerdict:
    """Crepant when every stage coefficient has age 1, else NotDetermined.

    The age test is sufficient only; the assembled fan is checked with
    :func:`is_crepant` and the two answers must agree when it fires.
    """
    fan, transcript = iterated_fujiki_oka(group, chain, max_cones)
    fan_ok = is_crepant(fan, group.lattice)
    witness = next((c for c in transcript.coefficients() if c.age != 1), None)
    if witness is None and not fan_ok:
        raise AssertionError("age-1 stage coefficients but the assembled fan is not crepant")
    return IteratedVerdict(witness is None, fan_ok, witness, fan, transcript)
