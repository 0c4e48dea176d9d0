"""Cover checks against brute-force comprehension oracles."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccw.covers import (
    CoverFamily,
    FamilyPredicate,
    GroundSet,
    Verdict,
    max_lebesgue,
    nerve,
    pad_cover,
    pad_member,
    shrink_member,
    split_boundary_parts,
)
from ccw.errors import PreconditionError, SizeCapError
from ccw.groups import FreeAbelianSpec, build_cayley_window
from ccw.spaces import make_cycle_model, make_discrete_model, make_interval_compactification

Z = FreeAbelianSpec(1)


def z_ground(R=4, labels=("x",), mode="translation"):
    w = build_cayley_window(Z, R)
    return GroundSet(w, make_discrete_model(w, list(labels)), mode)


def seg(ground, lo, hi, labels=None):
    """Member [lo..hi] x labels of a rank-1 ground set."""
    pts = ground.points if labels is None else labels
    return frozenset(((n,), x) for n in range(lo, hi + 1) for x in pts)


# ---------------------------------------------------------------------------
# oracles


def oracle_lebesgue(family, alpha):
    g0 = family.ground
    w = g0.window
    spec = w.spec
    alpha = Fraction(alpha)
    for g in w:
        if spec.length(g) + alpha > w.radius + 1:
            continue
        ball = [h for h in w if spec.length(spec.multiply(spec.inverse(g), h)) < alpha]
        for x in g0.points:
            probe = {(h, x) for h in ball}
            if not any(probe <= s for _, s in family.members):
                return False
    return True


def oracle_pad(ground, member, alpha):
    spec = ground.window.spec
    out = set()
    for g, x in ground.pairs:
        for h, y in member:
            if y == x and spec.length(spec.multiply(spec.inverse(g), h)) < alpha:
                out.add((g, x))
                break
    return frozenset(out)


def oracle_shrink(ground, member, alpha):
    w = ground.window
    spec = w.spec
    out = set()
    for g, x in ground.pairs:
        if spec.length(g) + alpha > w.radius + 1:
            continue
        ball = [h for h in w if spec.length(spec.multiply(spec.inverse(g), h)) < alpha]
        if all((h, x) in member for h in ball):
            out.add((g, x))
    return frozenset(out)


# ---------------------------------------------------------------------------
# ground sets


def test_ground_size_and_membership():
    g = z_ground(4, ("x", "y"))
    assert len(g) == 18
    assert ((0,), "x") in g
    assert ((5,), "x") not in g
    assert g.pair_to_str(((-2,), "y")) == "(-2, y)"


def test_ground_cap_env(monkeypatch):
    w = build_cayley_window(Z, 4)
    m = make_cycle_model(w, 12)
    monkeypatch.setenv("CCW_MAX_GROUND", "100")
    with pytest.raises(SizeCapError):
        GroundSet(w, m)
    monkeypatch.setenv("CCW_MAX_GROUND", "108")
    GroundSet(w, m)
    monkeypatch.setenv("CCW_MAX_GROUND", "lots")
    with pytest.raises(PreconditionError):
        GroundSet(w, m)


def test_ground_rejects_mismatched_window():
    w4 = build_cayley_window(Z, 4)
    w3 = build_cayley_window(Z, 3)
    m = make_cycle_model(w4, 6)
    with pytest.raises(PreconditionError):
        GroundSet(w3, m)


def test_ground_act_modes():
    w = build_cayley_window(Z, 4)
    m = make_cycle_model(w, 3)
    diag = GroundSet(w, m, "diagonal")
    trans = GroundSet(w, m, "translation")
    assert diag.act((1,), ((0,), "0")) == ((1,), "1")
    assert trans.act((1,), ((0,), "0")) == ((1,), "0")
    assert diag.act((1,), ((4,), "0")) is None
    assert diag.metadata(2)["mode"] == "diagonal"
    assert trans.metadata()["ground_size"] == 27


# ---------------------------------------------------------------------------
# family construction and dimension


def test_family_validation():
    g = z_ground()
    with pytest.raises(PreconditionError):
        CoverFamily(g, [("A", {((9,), "x")})])
    with pytest.raises(PreconditionError):
        CoverFamily(g, [("A", seg(g, 0, 1)), ("A", seg(g, 2, 3))])
    with pytest.raises(PreconditionError):
        CoverFamily(g, [("A", seg(g, 0, 1))], periods={"B": [(1,)]})
    fam = CoverFamily(g, [("A", seg(g, 0, 1))])
    with pytest.raises(PreconditionError):
        fam.member("Z")


def test_family_dimension_and_coverage():
    g = z_ground(4, ("p", "q"))
    A = frozenset(((n,), "p") for n in range(-4, 5))
    B = frozenset(((n,), "q") for n in range(-4, 5))
    C = frozenset(((n,), x) for n in range(-1, 2) for x in ("p", "q"))
    fam = CoverFamily(g, [("A", A), ("B", B), ("C", C)])
    assert fam.family_dimension() == 1
    assert fam.coverage_check().passed
    partial = CoverFamily(g, [("A", A)])
    verdict = partial.coverage_check()
    assert not verdict.passed and "q" in verdict.witness["pair"]
    assert CoverFamily(g, []).family_dimension() == -1


# ---------------------------------------------------------------------------
# scale checks, frozen examples first


def two_interval_family():
    g = z_ground(4)
    U = seg(g, -4, 1)
    V = seg(g, -1, 4)
    return CoverFamily(g, [("U", U), ("V", V)])


def test_lebesgue_frozen_two_intervals():
    fam = two_interval_family()
    assert fam.lebesgue_check(2).passed
    bad = fam.lebesgue_check(3)
    assert not bad.passed
    assert bad.witness["g"] == "0"
    assert oracle_lebesgue(fam, 2)
    assert not oracle_lebesgue(fam, 3)
    assert max_lebesgue(fam) == 2


def test_lebesgue_full_member_any_scale():
    g = z_ground(4)
    fam = CoverFamily(g, [("all", frozenset(g.pairs))])
    for alpha in (1, 3, 5, Fraction(7, 2)):
        v = fam.lebesgue_check(alpha)
        assert v.passed and v.notes
    assert max_lebesgue(fam) == 5


def test_lebesgue_infinite_scale_is_fibre_check():
    g = z_ground(2, ("p", "q"))
    fibres = CoverFamily(
        g,
        [("P", seg(g, -2, 2, ["p"])), ("Q", seg(g, -2, 2, ["q"]))],
    )
    assert fibres.lebesgue_check(3).passed  # alpha = R+1, whole-window balls
    mixed = CoverFamily(
        g,
        [("L", seg(g, -2, 0)), ("R", seg(g, 0, 2))],
    )
    assert not mixed.lebesgue_check(3).passed


def test_g_multiplicity_frozen():
    fam = two_interval_family()
    assert fam.g_multiplicity(1) == {"value": 2, "witness": {"g": "0", "x": "x"}}
    assert fam.g_multiplicity(2)["value"] == 2
    assert fam.family_dimension() == 1


def test_r_disjointness_frozen():
    g = z_ground(4)
    fam = CoverFamily(g, [("A", seg(g, -4, -2)), ("B", seg(g, 1, 4))])
    assert fam.r_disjointness_check(3).passed
    v = fam.r_disjointness_check(Fraction(7, 2))
    assert not v.passed
    assert set(v.witness["members"]) == {"A", "B"}
    assert fam.r_disjointness_check(1).passed


def test_r_disjointness_different_fibres_never_clash():
    g = z_ground(2, ("p", "q"))
    fam = CoverFamily(g, [("P", seg(g, -2, 2, ["p"])), ("Q", seg(g, -2, 2, ["q"]))])
    assert fam.r_disjointness_check(5).passed


# ---------------------------------------------------------------------------
# randomized cross-checks


def bits_to_member(ground, mask):
    return frozenset(p for i, p in enumerate(ground.pairs) if mask >> i & 1)


@given(
    st.lists(st.integers(min_value=0, max_value=2**14 - 1), min_size=1, max_size=3),
    st.sampled_from([1, 2, 3, 4, Fraction(3, 2)]),
)
@settings(max_examples=150, deadline=None)
def test_lebesgue_matches_oracle(masks, alpha):
    g = z_ground(3, ("p", "q"))
    fam = CoverFamily(g, [(f"m{i}", bits_to_member(g, m)) for i, m in enumerate(masks)])
    assert fam.lebesgue_check(alpha).passed == oracle_lebesgue(fam, alpha)


@given(
    st.integers(min_value=0, max_value=2**14 - 1),
    st.sampled_from([1, 2, 3, Fraction(5, 2)]),
)
@settings(max_examples=150, deadline=None)
def test_pad_and_shrink_match_oracles(mask, alpha):
    g = z_ground(3, ("p", "q"))
    U = bits_to_member(g, mask)
    assert pad_member(g, U, alpha) == oracle_pad(g, U, alpha)
    assert shrink_member(g, U, alpha) == oracle_shrink(g, U, alpha)


@given(
    st.integers(min_value=0, max_value=2**14 - 1),
    st.sampled_from([1, 2, 3]),
)
@settings(max_examples=150, deadline=None)
def test_pad_shrink_duality(mask, alpha):
    g = z_ground(3, ("p", "q"))
    U = bits_to_member(g, mask)
    inner = set(g.window.inner_window(alpha))
    inner_pairs = frozenset(p for p in g.pairs if p[0] in inner)
    complement = frozenset(g.pairs) - U
    assert shrink_member(g, U, alpha) == inner_pairs - pad_member(g, complement, alpha)


def test_pad_frozen_small():
    g = z_ground(2)
    U = seg(g, -2, 0)
    assert pad_member(g, U, 1) == U
    assert pad_member(g, U, 2) == seg(g, -2, 1)
    assert shrink_member(g, U, 2) == {((-1,), "x")}
    padded = pad_cover(CoverFamily(g, [("U", U)]), 2)
    assert padded.member("U") == seg(g, -2, 1)


# ---------------------------------------------------------------------------
# equivariance checks


def test_translate_member_and_stabilizer():
    w = build_cayley_window(Z, 4)
    m = make_cycle_model(w, 3)
    g = GroundSet(w, m, "diagonal")
    fam = CoverFamily(g, [("U", frozenset(((n,), "0") for n in range(-4, 5)))])
    image, skipped = fam.translate_member((3,), "U")
    assert skipped == 0
    assert image == frozenset(((n,), "0") for n in range(-1, 5))
    assert fam.setwise_stabilizer("U") == [(0,)]


def test_f_subset_diagonal_cycle():
    w = build_cayley_window(Z, 4)
    m = make_cycle_model(w, 3)
    g = GroundSet(w, m, "diagonal")
    single = CoverFamily(g, [("U", frozenset(((n,), "0") for n in range(-4, 5)))])
    assert single.f_subset_check("virtually-cyclic").passed
    assert single.f_subset_check(FamilyPredicate("all")).passed
    v = single.f_subset_check("finite")
    assert not v.passed
    assert v.witness["member"] == "U"
    assert "3" in v.witness["stabilizer_generators"]


def test_f_subset_escape_witness():
    w = build_cayley_window(Z, 4)
    m = make_cycle_model(w, 3)
    g = GroundSet(w, m, "diagonal")
    two = CoverFamily(
        g, [("U", frozenset(((n,), x) for n in range(-4, 5) for x in ("0", "1")))]
    )
    v = two.f_subset_check("all")
    assert not v.passed
    assert v.witness["member"] == "U"
    assert "escaping_pair" in v.witness


def test_f_subset_translation_mode():
    g = z_ground(4)
    fam = CoverFamily(g, [("U", seg(g, -4, 4))])
    assert fam.f_subset_check("virtually-cyclic").passed
    assert fam.f_subset_check("all").passed
    assert not fam.f_subset_check("finite").passed
    assert not fam.f_subset_check("trivial-only").passed


def test_f_subset_periods_metadata():
    g = z_ground(2)
    lone = frozenset({((0,), "x")})
    plain = CoverFamily(g, [("U", lone)])
    assert plain.f_subset_check("trivial-only").passed
    declared = CoverFamily(g, [("U", lone)], periods={"U": [(5,)]})
    assert not declared.f_subset_check("finite").passed
    assert declared.f_subset_check("virtually-cyclic").passed


def test_f_subset_disjoint_translates_pass_trivial():
    g = z_ground(4)
    fam = CoverFamily(g, [("A", seg(g, -1, 1))])
    # translates of [-1..1] by h != 0 always meet it, so invariance fails
    v = fam.f_subset_check("all")
    assert not v.passed
    spaced = CoverFamily(g, [("B", frozenset({((0,), "x")})), ("C", frozenset({((3,), "x")}))])
    assert spaced.f_subset_check("trivial-only").passed


# ---------------------------------------------------------------------------
# boundary split, nerve, predicate wrapper


def test_split_boundary_parts_interval():
    w = build_cayley_window(Z, 3)
    model = make_interval_compactification(w)
    g = GroundSet(w, model, "diagonal")
    fam = CoverFamily(g, [("all", frozenset(g.pairs))])
    interior, boundary = split_boundary_parts(fam)
    assert interior.names() == ["all:int"]
    assert boundary.names() == ["all:bnd"]
    assert len(interior.member("all:int")) == 7 * 7
    assert len(boundary.member("all:bnd")) == 7 * 2
    assert interior.family_dimension() == 0


def test_nerve_matches_dimension():
    g = z_ground(4, ("p", "q"))
    A = frozenset(((n,), "p") for n in range(-4, 5))
    B = frozenset(((n,), "q") for n in range(-4, 5))
    C = frozenset(((n,), x) for n in range(-1, 2) for x in ("p", "q"))
    fam = CoverFamily(g, [("A", A), ("B", B), ("C", C)])
    K = nerve(fam)
    assert set(K.vertices) == {"A", "B", "C"}
    assert K.contains({"A", "C"}) and K.contains({"B", "C"})
    assert not K.contains({"A", "B"})
    assert K.dimension == fam.family_dimension()
    with_act = nerve(fam, with_action=True)
    assert with_act.action.apply((0,), "A") == "A"


def test_predicate_wrapper():
    p = FamilyPredicate("finite")
    assert p.virtually_closed
    assert not FamilyPredicate("trivial-only").virtually_closed
    with pytest.raises(PreconditionError):
        FamilyPredicate("amenable")
    assert p.allows(Z, [])
    assert not p.allows(Z, [(3,)])


def test_verdict_bool_and_json():
    v = Verdict(True, checked=5, notes=("fine",))
    assert v
    assert v.to_json()["notes"] == ["fine"]
    assert not Verdict(False, witness={"pair": "(0, x)"})
