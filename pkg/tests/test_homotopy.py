"""Homotopy actions, approximate diagonal balls, and the genuine bridge."""

from __future__ import annotations

from fractions import Fraction

import pytest

from ccw.errors import DomainError, PreconditionError
from ccw.groups import FreeAbelianSpec, FreeGroupSpec, build_cayley_window
from ccw.homotopy import (
    HomotopyActionModel,
    adb,
    adb_modulus_probe,
    genuine_to_homotopy,
    make_cycle_homotopy_action,
    make_interval_homotopy_action,
    n_long_check,
    straighten,
)
from ccw.spaces import (
    CompactificationModel,
    FiniteMetricSpace,
    PartialAction,
    make_cycle_model,
    make_discrete_model,
    make_interval_compactification,
    make_tree_boundary_model,
)

Z = FreeAbelianSpec(1)
F2 = FreeGroupSpec(2)


def zwin(R):
    return build_cayley_window(Z, R)


# ---------------------------------------------------------------------------
# wrapping genuine actions


def test_cycle_wrap_is_valid_and_families_collapse():
    ham = make_cycle_homotopy_action(zwin(3), 5)
    assert ham.validate().passed
    fams = ham.families()
    for g, maps in fams.items():
        assert len(maps) == 1  # composite equals product map exactly


def test_interval_and_tree_wraps_are_valid():
    w = zwin(3)
    ham = genuine_to_homotopy(make_interval_compactification(w))
    assert ham.validate().passed
    tw = build_cayley_window(F2, 2)
    tree = genuine_to_homotopy(make_tree_boundary_model(tw, 2))
    assert tree.validate().passed


def test_wrap_rejects_empty_generator_map():
    w = zwin(1)
    space = make_discrete_model(w, ["a", "b"]).space
    act = PartialAction(w, ["a", "b"], {(1,): {}, (-1,): {}})
    model = CompactificationModel("stuck", space, frozenset(), act, w)
    with pytest.raises(DomainError):
        genuine_to_homotopy(model)


def test_wrap_rejects_empty_length_two_core():
    w = zwin(2)
    space = make_discrete_model(w, ["a", "b"]).space
    maps = {(1,): {"a": "b"}, (-1,): {"b": "a"}, (2,): {}, (-2,): {}}
    act = PartialAction(w, ["a", "b"], maps)
    model = CompactificationModel("short", space, frozenset(), act, w)
    with pytest.raises(DomainError):
        genuine_to_homotopy(model)


def test_validate_catches_wrong_endpoint():
    w = zwin(2)
    m = make_cycle_model(w, 4)
    phi = m.action.maps
    comp = {x: phi[(1,)][phi[(1,)][x]] for x in m.space.points}
    bad_last = {x: x for x in m.space.points}  # not the map of the product
    ham = HomotopyActionModel(
        "bad", w, m.space, phi, {((1,), (1,)): [comp, bad_last]}
    )
    v = ham.validate()
    assert not v.passed
    assert v.witness["pair"] == ["1", "1"]
    assert v.witness["stage"] == 1


def test_homotopy_rejects_products_outside_window():
    w = zwin(2)
    m = make_cycle_model(w, 4)
    with pytest.raises(PreconditionError):
        HomotopyActionModel("bad", w, m.space, m.action.maps, {((2,), (1,)): [{}]})


# ---------------------------------------------------------------------------
# approximate diagonal balls


def test_adb_one_step_frozen():
    ham = make_cycle_homotopy_action(zwin(3), 5)
    out = adb(ham, ((0,), "2"), 1)
    assert out["pairs"] == {((0,), "2"), ((1,), "1"), ((-1,), "3")}
    assert not out["clipped"]


def test_adb_radius_zero_is_seed():
    ham = make_cycle_homotopy_action(zwin(3), 5)
    out = adb(ham, ((2,), "0"), 0)
    assert out["pairs"] == {((2,), "0")}
    assert not out["clipped"]


def test_adb_window_exit_clips():
    ham = make_cycle_homotopy_action(zwin(2), 5)
    out = adb(ham, ((2,), "0"), 1)
    assert out["clipped"]
    assert any(c["kind"] == "window-exit" for c in out["clips"])


def test_adb_undefined_step_clips_on_partial_interval():
    w = zwin(3)
    ham = genuine_to_homotopy(make_interval_compactification(w))
    out = adb(ham, ((0,), "3"), 1)
    assert out["clipped"]
    assert any(c["kind"] == "undefined-step" for c in out["clips"])
    # the defined direction is still found
    assert ((1,), "2") in out["pairs"]


def test_adb_bridge_matches_translated_balls():
    """adb of the straightened pair at radius a-1 equals the straightened
    group ball at scale a, for genuine total actions and integer scales."""
    w = zwin(4)
    ham = make_cycle_homotopy_action(w, 7)
    spec = w.spec
    for alpha in range(1, 6):
        for g in w.inner_window(alpha):
            for x in ham.carrier:
                seed = straighten(ham, (g, x))
                assert seed is not None
                out = adb(ham, seed, alpha - 1)
                assert not out["clipped"]
                expect = set()
                for h in w:
                    if spec.length(spec.multiply(spec.inverse(g), h)) < alpha:
                        expect.add(straighten(ham, (h, x)))
                assert out["pairs"] == expect


def test_n_long_check_pass_and_inconclusive():
    total = make_interval_homotopy_action(zwin(3))
    assert n_long_check(total, 2).passed
    partial = genuine_to_homotopy(make_interval_compactification(zwin(3)))
    v = n_long_check(partial, 1)
    assert not v.passed
    assert v.inconclusive
    cyc = make_cycle_homotopy_action(zwin(4), 6)
    assert n_long_check(cyc, 3).passed
    with_domain = n_long_check(cyc, 1, seed_domain=[(0,), (1,)])
    assert with_domain.passed
    with pytest.raises(PreconditionError):
        n_long_check(cyc, 1, seed_domain=[(9,)])


# ---------------------------------------------------------------------------
# totalized interval builder


def test_interval_total_is_valid_with_nonconstant_homotopies():
    ham = make_interval_homotopy_action(zwin(3))
    assert ham.validate().passed
    for g in ham.window:
        assert ham.phi.is_total(g)
    # absorb-return composites disagree with the product map, so some
    # homotopy needs at least one intermediate stage
    longest = max(len(s) for s in ham.homotopies.values())
    assert longest > 2


def test_interval_total_absorption_values():
    ham = make_interval_homotopy_action(zwin(3))
    assert ham.phi.apply((3,), "1") == "+inf"
    assert ham.phi.apply((-2,), "-2") == "-inf"
    comp = ham.homotopies[((-2,), (3,))][0]
    assert comp["1"] == "+inf"  # absorbed before returning
    assert ham.phi.apply((1,), "1") == "2"


def test_interval_total_n_long_beats_partial():
    total = make_interval_homotopy_action(zwin(4))
    assert n_long_check(total, 3).passed


# ---------------------------------------------------------------------------
# modulus probe


def test_modulus_probe_frozen_on_cycle():
    ham = make_cycle_homotopy_action(zwin(2), 5)
    assert adb_modulus_probe(ham, 1)["delta"] == 2
    assert adb_modulus_probe(ham, 0)["delta"] == 1
    assert adb_modulus_probe(ham, 2)["delta"] == 4


def test_modulus_probe_positive_on_perturbed_interval():
    ham = make_interval_homotopy_action(zwin(3))
    out = adb_modulus_probe(ham, Fraction(1, 8))
    assert out["delta"] is not None and out["delta"] > 0


def test_modulus_probe_monotone_in_epsilon():
    ham = make_interval_homotopy_action(zwin(3))
    deltas = [adb_modulus_probe(ham, eps)["delta"] for eps in (0, Fraction(1, 4), 1, 2)]
    assert all(a <= b for a, b in zip(deltas, deltas[1:]))
