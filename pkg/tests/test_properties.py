from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from crepantia.abelian import (
    NoAgeOneSystem,
    basic_generating_system,
    crepant_iterated,
    enumerate_group,
    iterated_fujiki_oka,
    phi_embed,
)
from crepantia.contfrac import (
    INFINITY,
    crepant_by_ages,
    hj_expand,
    hj_from_coeffs,
    hj_rays,
    normal_forms,
    remainder_map,
    remainder_polynomial,
    rounddown_map,
    rounddown_polynomial,
)
from crepantia.fan import fujiki_oka_resolve, is_crepant, orthant, verify_resolution
from crepantia.lattice import (
    ProperFraction,
    cone_determinant,
    height,
    is_primitive,
    make_proper_fraction as F,
    overlattice,
    primitive_representative,
)
from crepantia.oracle import box_points, first_existence_check

SLOW = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def fractions(draw, n=None, max_r=30, gorenstein=False, unit_first=True):
    n = draw(st.integers(2, 4)) if n is None else n
    r = draw(st.integers(2, max_r))
    tail = draw(st.lists(st.integers(0, r - 1), min_size=n - 1, max_size=n - 1))
    nums = [1 if unit_first else draw(st.integers(0, r - 1))] + tail
    if gorenstein:
        nums[-1] = (-sum(nums[:-1])) % r
    return F(nums, r)


@st.composite
def groups(draw, n=3, max_r=8, count=2):
    return [draw(fractions(n=n, max_r=max_r, gorenstein=True, unit_first=False))
            for _ in range(count)]


# -- continued fractions -----------------------------------------------------

def test_reconstruction_exhaustive():
    for r in range(2, 501):
        for a in range(1, r):
            if gcd(r, a) == 1:
                assert hj_from_coeffs(hj_expand(r, a).coefficients) == (r, a)


def test_ray_recurrence_exhaustive():
    Z2 = overlattice([], 2)
    for r in range(2, 201):
        for a in range(1, r):
            if gcd(r, a) != 1:
                continue
            L = overlattice([F((1, a), r)], 2)
            rays = hj_rays(r, a)
            coeffs = hj_expand(r, a).coefficients
            for i, x in enumerate(coeffs, start=1):
                assert tuple(p + q for p, q in zip(rays[i - 1], rays[i + 1])) == tuple(x * c for c in rays[i])
            assert all(is_primitive(L, v) for v in rays)
            assert all(cone_determinant(L, rays[k:k + 2]) == 1 for k in range(len(rays) - 1))
            assert Z2.index == 1


@given(fractions(max_r=60))
def test_division_identity(f):
    for word, parent in remainder_polynomial(f).items():
        for i in range(2, len(f) + 1):
            child = remainder_map(i, parent)
            if child is INFINITY:
                continue
            z = rounddown_map(i, parent)
            ai = parent.numerators[i - 1]
            # undo the gcd reduction to get the remainders over a_i
            raw = [c * (ai // child.denominator) for c in child.numerators]
            target = list(parent.numerators)
            target[i - 1] = -parent.denominator
            assert [ai * q + m for q, m in zip(z, raw)] == target
            assert child.denominator < parent.denominator


@given(fractions(max_r=60, gorenstein=True))
def test_gorenstein_integrality(f):
    assume(f.age == 1)
    for i in range(2, len(f) + 1):
        child = remainder_map(i, f)
        if child is not INFINITY:
            assert child.age.denominator == 1


def test_dimension_two_degeneration():
    for r in range(2, 80):
        for a in range(1, r):
            if gcd(r, a) == 1:
                z = rounddown_polynomial(F((1, a), r), terminal=True)
                assert [-v[1] for v in z.values()] == list(hj_expand(r, a).coefficients)


# -- lattice -----------------------------------------------------------------

@given(st.lists(fractions(n=3, max_r=9, unit_first=False), min_size=1, max_size=3))
def test_index_equals_enumeration(gens):
    L = overlattice(gens, 3)
    assert L.index == len(enumerate_group(gens, 3).elements) == len(box_points(L))


@given(fractions(n=3, max_r=40, gorenstein=True), st.permutations(range(3)))
def test_determinant_permutation_invariance(f, perm):
    L = overlattice([f], 3)
    fan, _ = fujiki_oka_resolve(orthant(3), 0, L)
    for cone in fan.cones[:5]:
        rays = list(cone.rays)
        assert cone_determinant(L, [rays[k] for k in perm]) == cone_determinant(L, rays)
        # another generator of the same lattice gives the same canonical basis
        other = overlattice([f, f + f], 3)
        assert cone_determinant(other, rays) == cone_determinant(L, rays)


@given(fractions(n=3, max_r=40), st.integers(1, 7))
def test_primitive_representative_idempotent(f, k):
    L = overlattice([f], 3)
    p = tuple(k * c for c in (f.point if not f.is_trivial else (1, 0, 0)))
    q = primitive_representative(L, p)
    assert primitive_representative(L, q) == q


def test_height_identity_exhaustive():
    for r in range(2, 21):
        for nums in itertools.product(range(r), repeat=3):
            if not any(nums):
                continue
            g = F(nums, r)
            assert height(g) == g.age + (-g).age


# -- fan engine --------------------------------------------------------------

def test_transcript_agreement_dim3():
    for r in range(2, 61):
        for a in range(r):
            f = F((1, a, (-1 - a) % r), r)
            _, transcript = fujiki_oka_resolve(orthant(3), 0, overlattice([f], 3))
            assert transcript.types() == dict(remainder_polynomial(f).items())


@SLOW
@given(fractions(n=4, max_r=30, gorenstein=True))
def test_age_criterion_matches_fan_dim4(f):
    assume(f.age == 1)
    L = overlattice([f], 4)
    fan, _ = fujiki_oka_resolve(orthant(4), 0, L)
    assert crepant_by_ages(f).crepant == is_crepant(fan, L)
    assert all(cone_determinant(L, c.rays) == 1 for c in fan.cones)


@settings(max_examples=20, deadline=None)
@given(fractions(n=4, max_r=16))
def test_fo_output_verifies(f):
    L = overlattice([f], 4)
    fan, _ = fujiki_oka_resolve(orthant(4), 0, L)
    assert verify_resolution(fan, L, orthant(4)).ok


# -- abelian -----------------------------------------------------------------

@given(fractions(n=4, max_r=30, gorenstein=True), st.integers(2, 4))
def test_phi_maps_bases_to_bases(f, i):
    assume(f.age == 1)
    child = remainder_map(i, f)
    assume(child is not INFINITY and not child.is_trivial)
    small = overlattice([child], 4)
    big = overlattice([f], 4)
    assume(normal_forms(child))
    fan, _ = fujiki_oka_resolve(orthant(4), normal_forms(child)[0].apex, small)
    for cone in fan.cones:
        images = [phi_embed(i, f, r) for r in cone.rays]
        assert all(sum(p) == sum(r) for p, r in zip(images, cone.rays))
        assert cone_determinant(big, images) == 1


@SLOW
@given(groups(n=3, max_r=8))
def test_bgs_rows_and_iterated_verification(gens):
    G = enumerate_group(gens, 3)
    assume(G.is_gorenstein)
    system = basic_generating_system(G)
    for g in system.nontrivial():
        assert g.age == 1
        lead = next(k for k in system.slot_order if g.numerators[k])
        assert g.numerators[lead] == 1
    fan, _ = iterated_fujiki_oka(G)
    assert verify_resolution(fan, G.lattice, orthant(3)).ok


@SLOW
@given(groups(n=4, max_r=6))
def test_iterated_crepant_implies_existence(gens):
    G = enumerate_group(gens, 4)
    assume(G.is_gorenstein)
    try:
        verdict = crepant_iterated(G)
    except NoAgeOneSystem:
        assume(False)
    if verdict.crepant:
        assert first_existence_check(G.lattice)


def test_iterated_crepant_implies_existence_cyclic_dim4():
    for f in (F((1, 2, 4, 8), 15), F((1, 1, 1, 1), 4), F((1, 3, 5, 7), 16)):
        G = enumerate_group([f], 4)
        if crepant_iterated(G).crepant:
            assert first_existence_check(G.lattice)


@pytest.mark.parametrize("n", [3, 4])
def test_group_elements_have_matching_ages(n):
    G = enumerate_group([F((1, 1, 0, 0)[:n], 2), F((0, 1, 1, 0)[:n], 2)], n)
    assert all(g.age.denominator == 1 for g in G.elements)
    assert all(height(g) == g.age + (-g).age for g in G.elements if not g.is_trivial)
    assert Fraction(0) == ProperFraction.identity(n).age
