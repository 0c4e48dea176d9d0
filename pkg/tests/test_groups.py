"""Window enumeration, word metric, balls/inner windows, family predicates."""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccw.errors import PreconditionError, SizeCapError
from ccw.groups import (
    ClippedBallWarning,
    EmptyInnerWindowWarning,
    FiniteGroupSpec,
    FreeAbelianSpec,
    FreeGroupSpec,
    ProductSpec,
    build_cayley_window,
    free_reduce,
    predicate_is_virtually_closed,
    subgroup_in_family,
)


def brute_force_free_ball(rank: int, radius: int) -> set[str]:
    """All reduced words of length <= radius by raw string enumeration."""
    letters = "abcdefghijklmnopqrstuvwxyz"[:rank]
    alphabet = list(letters) + [c.upper() for c in letters]
    words = {""}
    for n in range(1, radius + 1):
        for tup in itertools.product(alphabet, repeat=n):
            w = "".join(tup)
            if free_reduce(w) == w:
                words.add(w)
    return words


S3 = FiniteGroupSpec.from_permutations([(1, 0, 2), (0, 2, 1)])


# ---------------------------------------------------------------------------
# enumeration


def test_z_window_is_integer_interval():
    w = build_cayley_window(FreeAbelianSpec(1), 3)
    assert sorted(g[0] for g in w) == list(range(-3, 4))


def test_z2_window_radius_1():
    w = build_cayley_window(FreeAbelianSpec(2), 1)
    assert set(w) == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}


@pytest.mark.parametrize("radius,expected", [(3, 53), (5, 485)])
def test_f2_window_size_matches_brute_force(radius, expected):
    # oracle first: enumerate raw strings and filter reduced words
    oracle = brute_force_free_ball(2, radius)
    assert len(oracle) == expected
    w = build_cayley_window(FreeGroupSpec(2), radius)
    assert set(w.elements) == oracle


def test_finite_window_covers_whole_group():
    w = build_cayley_window(S3, 3)
    assert len(w) == 6
    assert max(w.length(g) for g in w) <= 3


def test_product_window_lengths_are_sums():
    spec = ProductSpec([FreeAbelianSpec(1), S3])
    w = build_cayley_window(spec, 2)
    for g in w:
        assert spec.length(g) == abs(g[0][0]) + S3.length(g[1])


def test_window_cap_enforced():
    with pytest.raises(SizeCapError):
        build_cayley_window(FreeGroupSpec(2), 8, cap=1000)


# ---------------------------------------------------------------------------
# metric and partial multiplication


@pytest.mark.parametrize(
    "spec,radius",
    [
        (FreeAbelianSpec(1), 10),
        (FreeAbelianSpec(2), 3),
        (FreeGroupSpec(2), 3),
        (S3, 3),
        (ProductSpec([FreeAbelianSpec(1), FiniteGroupSpec.cyclic(2)]), 3),
    ],
)
def test_dist_equals_length_of_quotient_exhaustively(spec, radius):
    w = build_cayley_window(spec, radius)
    assert len(w) <= 1000
    for g in w:
        for h in w:
            assert w.dist(g, h) == spec.length(spec.multiply(spec.inverse(g), h))
            assert w.dist(g, h) == w.dist(h, g)
        assert w.dist(g, g) == 0


def test_partial_mult_defined_iff_product_in_window():
    w = build_cayley_window(FreeAbelianSpec(1), 4)
    assert w.mult((3,), (1,)) == (4,)
    assert w.mult((3,), (2,)) is None
    assert w.mult((-4,), (8,)) == (4,)


def test_inverse_stays_in_window():
    w = build_cayley_window(FreeGroupSpec(2), 3)
    for g in w:
        assert w.inverse(g) in w
        assert w.length(w.inverse(g)) == w.length(g)


# ---------------------------------------------------------------------------
# balls


def test_ball_examples_on_z():
    w = build_cayley_window(FreeAbelianSpec(1), 64)
    assert w.ball((0,), 3) == {(-2,), (-1,), (0,), (1,), (2,)}
    assert w.ball((5,), 1) == {(5,)}


def test_ball_on_f2_radius_2():
    w = build_cayley_window(FreeGroupSpec(2), 5)
    assert w.ball("", 2) == {"", "a", "A", "b", "B"}


def test_ball_clipping_warns_and_clips():
    w = build_cayley_window(FreeAbelianSpec(1), 4)
    with pytest.warns(ClippedBallWarning):
        ball = w.ball((4,), 3)
    assert ball == {(2,), (3,), (4,)}


def test_ball_left_invariance_where_defined():
    w = build_cayley_window(FreeGroupSpec(2), 4)
    for g in ["", "a", "ab"]:
        translated = set()
        for h in w.ball_at_identity(2):
            p = w.mult(g, h)
            if p is not None:
                translated.add(p)
        assert w.ball(g, 2) == translated


def test_fractional_radius_ball_equals_integer_ceiling_behaviour():
    w = build_cayley_window(FreeAbelianSpec(1), 8)
    # open balls with integer distances: radius 5/2 sees distances 0,1,2
    assert w.ball((0,), Fraction(5, 2)) == w.ball((0,), 3)


# ---------------------------------------------------------------------------
# inner windows


def test_inner_window_z64_alpha3():
    w = build_cayley_window(FreeAbelianSpec(1), 64)
    inner = w.inner_window(3)
    assert sorted(g[0] for g in inner) == list(range(-62, 63))


def test_inner_window_empty_warns():
    w = build_cayley_window(FreeAbelianSpec(1), 2)
    with pytest.warns(EmptyInnerWindowWarning):
        assert w.inner_window(10) == ()


def test_inner_window_f2_alpha1_keeps_everything():
    w = build_cayley_window(FreeGroupSpec(2), 5)
    assert len(w.inner_window(1)) == 485


def test_inner_window_alpha_infinite_flag():
    w = build_cayley_window(FreeAbelianSpec(1), 6)
    assert w.inner_window(7) == ((0,),)
    assert w.alpha_is_infinite(7)
    assert not w.alpha_is_infinite(6)


@given(
    a=st.fractions(min_value=Fraction(1, 2), max_value=Fraction(6)),
    b=st.fractions(min_value=Fraction(1, 2), max_value=Fraction(6)),
)
@settings(max_examples=60, deadline=None)
def test_inner_window_monotone(a, b):
    w = build_cayley_window(FreeAbelianSpec(1), 6)
    lo, hi = min(a, b), max(a, b)
    assert set(w.inner_window(hi)) <= set(w.inner_window(lo))


def test_ball_inside_window_for_inner_elements():
    w = build_cayley_window(FreeGroupSpec(2), 4)
    for alpha in (1, 2, 3):
        for g in w.inner_window(alpha):
            ball = w.ball(g, alpha)
            assert len(ball) == len([h for h in w.ball_at_identity(alpha)])


# ---------------------------------------------------------------------------
# serialization round trips


@given(st.lists(st.sampled_from("abAB"), max_size=6))
def test_free_normal_form_round_trip(chars):
    spec = FreeGroupSpec(2)
    g = free_reduce("".join(chars))
    assert spec.element_from_str(spec.element_to_str(g)) == g


@given(st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
def test_abelian_normal_form_round_trip(g):
    spec = FreeAbelianSpec(2)
    assert spec.element_from_str(spec.element_to_str(g)) == g


def test_product_normal_form_round_trip():
    spec = ProductSpec([FreeAbelianSpec(2), FreeGroupSpec(1)])
    g = ((3, -2), "aa")
    assert spec.element_from_str(spec.element_to_str(g)) == g


def test_spec_json_round_trip():
    from ccw.groups import GroupSpec

    for spec in (FreeAbelianSpec(3), FreeGroupSpec(2), S3, ProductSpec([FreeAbelianSpec(1), S3])):
        again = GroupSpec.from_json(spec.to_json())
        assert again.to_json() == spec.to_json()


# ---------------------------------------------------------------------------
# family predicates


def test_trivial_only_predicate():
    spec = FreeAbelianSpec(2)
    assert subgroup_in_family(spec, [(0, 0)], "trivial-only")
    assert not subgroup_in_family(spec, [(1, 0)], "trivial-only")


def test_finite_predicate_in_torsion_free_groups():
    assert subgroup_in_family(FreeAbelianSpec(2), [(0, 0)], "finite")
    assert not subgroup_in_family(FreeAbelianSpec(2), [(2, 0)], "finite")
    assert not subgroup_in_family(FreeGroupSpec(2), ["ab"], "finite")


def test_finite_predicate_in_products():
    spec = ProductSpec([FreeAbelianSpec(1), S3])
    assert subgroup_in_family(spec, [((0,), 3)], "finite")
    assert not subgroup_in_family(spec, [((1,), 3)], "finite")


def test_vcyc_lattice_rank_on_zn():
    spec = FreeAbelianSpec(2)
    assert subgroup_in_family(spec, [(2, 4), (1, 2)], "virtually-cyclic")
    assert not subgroup_in_family(spec, [(1, 0), (0, 1)], "virtually-cyclic")


def test_vcyc_free_group_common_roots():
    spec = FreeGroupSpec(2)
    assert subgroup_in_family(spec, ["aa", "aaa"], "virtually-cyclic")
    assert not subgroup_in_family(spec, ["a", "b"], "virtually-cyclic")
    # non-cyclically-reduced powers of a common root
    w = "abA"
    ww = spec.multiply(w, w)
    assert ww == "abbA"
    assert subgroup_in_family(spec, [w, ww], "virtually-cyclic")
    assert not subgroup_in_family(spec, ["abA", "b"], "virtually-cyclic")


def test_vcyc_finite_always():
    assert subgroup_in_family(S3, [1, 2, 3], "virtually-cyclic")


def test_vcyc_product_with_finite_factor():
    spec = ProductSpec([FreeAbelianSpec(1), S3])
    # infinite cyclic times a finite group: still virtually cyclic even
    # though the finite components need not commute
    gens = [((1,), 0), ((0,), 1), ((0,), 2)]
    assert subgroup_in_family(spec, gens, "virtually-cyclic")


def test_vcyc_product_with_two_infinite_directions():
    spec = ProductSpec([FreeAbelianSpec(1), FreeGroupSpec(2)])
    assert not subgroup_in_family(spec, [((1,), ""), ((0,), "a")], "virtually-cyclic")
    assert subgroup_in_family(spec, [((1,), "a")], "virtually-cyclic")
    assert not subgroup_in_family(spec, [((0,), "a"), ((0,), "b")], "virtually-cyclic")


def test_all_predicate_and_virtual_closure_flags():
    assert subgroup_in_family(FreeGroupSpec(2), ["a", "b"], "all")
    assert predicate_is_virtually_closed("virtually-cyclic")
    assert predicate_is_virtually_closed("finite")
    assert not predicate_is_virtually_closed("trivial-only")
    with pytest.raises(PreconditionError):
        subgroup_in_family(FreeAbelianSpec(1), [(0,)], "amenable")
