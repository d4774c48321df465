"""Hirzebruch-Jung continued fractions and Ashikaga's continued fractions.

Words over the variables ``x_2, ..., x_n`` are tuples of 1-based slot
indices, so ``(3, 3, 2)`` is ``x3x3x2``.  All polynomial maps are
ordered shortlex on their words.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Sequence

from .lattice import Point, ProperFraction

Word = tuple[int, ...]


class NotSemiUnimodular(ValueError):
    """The fraction (or cone) is not in semi-unimodular normal position."""


class NotGorenstein(ValueError):
    pass


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def shortlex(word: Word) -> tuple[int, Word]:
    return (len(word), word)


def format_word(word: Word) -> str:
    return "".join(f"x{i}" for i in word) or "1"


def is_iterated(word: Word) -> bool:
    return len(word) >= 1 and len(set(word)) == 1


# -- Hirzebruch-Jung ---------------------------------------------------------

@dataclass(frozen=True)
class HJExpansion:
    r: int
    a: int
    coefficients: tuple[int, ...]

    def __str__(self):
        return "[" + ",".join(map(str, self.coefficients)) + "]"

    def value(self) -> Fraction:
        val = Fraction(self.coefficients[-1])
        for x in reversed(self.coefficients[:-1]):
            val = x - 1 / val
        return val


def _check_pair(r: int, a: int) -> None:
    if not 0 < a < r:
        raise ValueError(f"need 0 < a < r, got r={r}, a={a}")
    if gcd(r, a) != 1:
        raise ValueError(f"r={r} and a={a} are not coprime")


def hj_expand(r: int, a: int) -> HJExpansion:
    """Expansion ``r/a = x_1 - 1/(x_2 - 1/(... - 1/x_s))`` with ``x_i >= 2``."""
    _check_pair(r, a)
    coeffs = []
    num, den = r, a
    while den:
        x = -(-num // den)
        coeffs.append(x)
        num, den = den, x * den - num
    return HJExpansion(r, a, tuple(coeffs))


def hj_from_coeffs(coeffs: Sequence[int]) -> tuple[int, int]:
    """Inverse of :func:`hj_expand`: ``[3, 2, 2] -> (7, 3)``."""
    if not coeffs:
        raise ValueError("empty continued fraction")
    if any(x < 2 for x in coeffs):
        raise ValueError(f"all coefficients must be >= 2, got {list(coeffs)}")
    val = Fraction(coeffs[-1])
    for x in reversed(coeffs[:-1]):
        val = x - 1 / val
    return val.numerator, val.denominator


def hj_rays(r: int, a: int) -> list[Point]:
    """Rays ``v_0 = (0,1), v_1 = 1/r(1,a), ..., v_{s+1} = (1,0)``.

    They satisfy ``v_{i-1} + v_{i+1} = x_i v_i`` and span the minimal
    resolution of ``1/r(1,a)``.
    """
    exp = hj_expand(r, a)
    rays = [(Fraction(0), Fraction(1)), (Fraction(1, r), Fraction(a, r))]
    for x in exp.coefficients:
        prev, cur = rays[-2], rays[-1]
        rays.append(tuple(x * c - p for c, p in zip(cur, prev)))
    if rays[-1] != (Fraction(1), Fraction(0)):
        raise AssertionError(f"recurrence for {r}/{a} did not end at (1,0)")
    return rays


# -- Ashikaga maps -----------------------------------------------------------

def _require_normal(f: ProperFraction) -> None:
    if f.denominator == 1 or f.numerators[0] != 1:
        raise NotSemiUnimodular(f"{f} does not have 1 in its first slot")


def _slot(f: ProperFraction, i: int) -> int:
    if not 2 <= i <= len(f):
        raise IndexError(f"variable index {i} outside 2..{len(f)}")
    return f.numerators[i - 1]


def remainder_map(i: int, f: ProperFraction) -> ProperFraction | _Infinity:
    """``R_i``: reduce every entry modulo ``a_i``, with ``-r`` in slot ``i``."""
    _require_normal(f)
    ai = _slot(f, i)
    if ai == 0:
        return INFINITY
    nums = list(f.numerators)
    nums[i - 1] = -f.denominator
    return ProperFraction(tuple(x % ai for x in nums), ai)


def rounddown_map(i: int, f: ProperFraction) -> tuple[int, ...] | _Infinity:
    """``Z_i``: floor of every entry divided by ``a_i``, with ``-r`` in slot ``i``."""
    _require_normal(f)
    ai = _slot(f, i)
    if ai == 0:
        return INFINITY
    nums = list(f.numerators)
    nums[i - 1] = -f.denominator
    return tuple(x // ai for x in nums)


class RemainderPolynomial:
    """Noncommutative polynomial ``word -> proper fraction`` (shortlex order).

    Terms with coefficient infinity or ``(0,...,0)/1`` are absent.
    """

    def __init__(self, terms: dict[Word, ProperFraction]):
        self._terms = dict(sorted(terms.items(), key=lambda kv: shortlex(kv[0])))

    def __getitem__(self, word: Word) -> ProperFraction:
        return self._terms[tuple(word)]

    def __contains__(self, word) -> bool:
        return tuple(word) in self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Word]:
        return iter(self._terms)

    def __eq__(self, other):
        if isinstance(other, RemainderPolynomial):
            return list(self.items()) == list(other.items())
        return NotImplemented

    def items(self):
        return self._terms.items()

    def coefficients(self) -> list[ProperFraction]:
        return list(self._terms.values())

    def iterated_terms(self) -> list[tuple[Word, ProperFraction]]:
        return [(w, c) for w, c in self._terms.items() if is_iterated(w)]

    def __str__(self):
        return "\n".join(f"{format_word(w)}: {c}" for w, c in self.items())

    def __repr__(self):
        return f"RemainderPolynomial({len(self)} terms)"


def remainder_polynomial(f: ProperFraction) -> RemainderPolynomial:
    _require_normal(f)
    n = len(f)
    terms: dict[Word, ProperFraction] = {}
    stack: list[tuple[Word, ProperFraction]] = [((), f)]
    while stack:
        word, coeff = stack.pop()
        terms[word] = coeff
        for i in range(2, n + 1):
            child = remainder_map(i, coeff)
            if child is INFINITY or child.is_trivial:
                continue
            if child.denominator >= coeff.denominator:
                raise AssertionError("remainder recursion failed to decrease")
            stack.append((word + (i,), child))
    return RemainderPolynomial(terms)


def rounddown_polynomial(f: ProperFraction, terminal: bool = False) -> dict[Word, tuple[int, ...]]:
    """Round down polynomial as ``{word x_j: Z_j(coefficient at word)}``.

    By default a term ``w x_j`` is kept only when ``R_j`` of the
    coefficient at ``w`` is itself a surviving remainder term (short form).
    ``terminal=True`` also keeps the terms with ``a_j = 1``, whose
    remainder is the trivial fraction; for ``n = 2`` the slot-2 entries of
    that long form are minus the Hirzebruch-Jung coefficients.
    """
    rpoly = remainder_polynomial(f)
    n = len(f)
    out: dict[Word, tuple[int, ...]] = {}
    for word, coeff in rpoly.items():
        for j in range(2, n + 1):
            aj = coeff.numerators[j - 1]
            if aj == 0 or (aj == 1 and not terminal):
                continue
            out[word + (j,)] = rounddown_map(j, coeff)
    return dict(sorted(out.items(), key=lambda kv: shortlex(kv[0])))


# -- crepancy criteria -------------------------------------------------------

@dataclass(frozen=True)
class FOVerdict:
    """Outcome of the age test on a remainder polynomial."""

    crepant: bool
    witness: Word | None = None
    coefficient: ProperFraction | None = None

    def __str__(self):
        if self.crepant:
            return "CrepantFO"
        return f"NotCrepantFO({format_word(self.witness)}: {self.coefficient}, age {self.coefficient.age})"


def crepant_by_ages(f: ProperFraction) -> FOVerdict:
    """The Fujiki-Oka resolution is crepant iff every coefficient has age 1."""
    for word, coeff in remainder_polynomial(f).items():
        if coeff.age != 1:
            return FOVerdict(False, word, coeff)
    return FOVerdict(True)


@dataclass(frozen=True)
class Obstruction:
    kind: str  # "generator-age" or "iterated-term"
    word: Word
    coefficient: ProperFraction

    @property
    def age(self) -> Fraction:
        return self.coefficient.age

    def __str__(self):
        if self.kind == "generator-age":
            return f"generator {self.coefficient} has age {self.age}"
        return f"iterated term {format_word(self.word)} with coefficient {self.coefficient}, age {self.age}"


@dataclass(frozen=True)
class ObstructionReport:
    """Sufficient obstructions to toric crepant resolutions that fired.

    An empty report means *no obstruction found*, never that a crepant
    resolution exists.
    """

    fraction: ProperFraction
    obstructions: tuple[Obstruction, ...] = ()

    @property
    def obstructed(self) -> bool:
        return bool(self.obstructions)

    def __str__(self):
        if not self.obstructions:
            return "NoObstructionFound"
        return "; ".join(map(str, self.obstructions))


def obstruction_scan(f: ProperFraction, iterated: bool = True) -> ObstructionReport:
    """Check the generator-age and iterated-term obstructions.

    A generator ``1/r(1, a_2, ..., a_n)`` with ``1 + sum a_i >= 2r`` rules
    out toric crepant resolutions.  For age-1 generators, an iterated term
    ``x_i x_i ... x_i`` whose coefficient has age >= 2 does as well.
    """
    _require_normal(f)
    if f.age >= 2:
        return ObstructionReport(f, (Obstruction("generator-age", (), f),))
    if not iterated:
        return ObstructionReport(f)
    if f.age != 1:
        raise NotGorenstein(f"iterated-term test needs an age-1 generator, {f} has age {f.age}")
    found = tuple(Obstruction("iterated-term", w, c)
                  for w, c in remainder_polynomial(f).iterated_terms() if c.age >= 2)
    return ObstructionReport(f, found)


def minimal_points(f: ProperFraction, i: int) -> list[Point]:
    """The ``i``-th minimal points: lifts of the interior HJ rays of ``1/r(1, a_i)``."""
    _require_normal(f)
    if f.age.denominator != 1:
        raise NotGorenstein(f"{f} is not Gorenstein")
    r = f.denominator
    ai = _slot(f, i)
    if ai == 0 or gcd(r, ai) != 1:
        raise ValueError(f"gcd({r}, a_{i}={ai}) must be 1")
    out = []
    if ai == 1:
        ks = [1]
    else:
        ks = [int(v[0] * r) for v in hj_rays(r, ai)[1:-1]]
    for k in ks:
        out.append(tuple(Fraction(a * k % r, r) for a in f.numerators))
    return out


# -- normal position ---------------------------------------------------------

@dataclass(frozen=True)
class NormalForm:
    """A semi-unimodular representative ``f`` of a cyclic group.

    ``f.numerators[k] == power * g.numerators[permutation[k]] mod r``;
    ``permutation[0]`` is the apex slot (0-based) of the original group.
    """

    fraction: ProperFraction
    permutation: tuple[int, ...]
    power: int

    @property
    def apex(self) -> int:
        return self.permutation[0]


def normal_forms(g: ProperFraction, allow_power: bool = True) -> list[NormalForm]:
    """Every way to move a unit entry of ``g`` to the front.

    With ``allow_power`` any slot coprime to ``r`` qualifies (the generator
    is replaced by the power making that slot 1); otherwise only slots
    already equal to 1.  Other slots keep their relative order.
    """
    r = g.denominator
    out = []
    if r == 1:
        return out
    # slots already equal to 1 first, then slots needing a power
    order = sorted(range(len(g)), key=lambda j: (g.numerators[j] != 1, j))
    for slot in order:
        a = g.numerators[slot]
        if a == 1 or (allow_power and a and gcd(a, r) == 1):
            k = pow(a, -1, r)
            perm = (slot,) + tuple(j for j in range(len(g)) if j != slot)
            h = g * k
            out.append(NormalForm(ProperFraction(tuple(h.numerators[j] for j in perm), r), perm, k))
    return out


def normalize(g: ProperFraction, allow_power: bool = True) -> NormalForm:
    forms = normal_forms(g, allow_power)
    if not forms:
        raise NotSemiUnimodular(f"{g} has no {'unit' if allow_power else '1'} entry")
    return forms[0]
