"""Shared instance builders for the conversion and acceptance tests."""

from __future__ import annotations

from fractions import Fraction

from ccw import docio
from ccw.characterise import EquivariantMap
from ccw.covers import CoverFamily, GroundSet
from ccw.groups import FreeAbelianSpec, FreeGroupSpec, build_cayley_window
from ccw.homotopy import genuine_to_homotopy
from ccw.refine import FiniteGroupAction
from ccw.spaces import (
    FiniteMetricSpace,
    L1Point,
    SimplicialComplexModel,
    make_cycle_model,
    make_tree_boundary_model,
)

Z = FreeAbelianSpec(1)


def brick_instance(n, k, R, L):
    """Cycle carrier with n+1 staggered layers of group-interval bricks.

    Layer j tiles the window with bricks of length 2(k+1) whose starts
    are congruent to j*2(k+1)/(n+1); a pair lies in at most n+1 bricks,
    so the family has dimension n, and inside the inner window the
    swallowed-level weights ramp by one per step.  Deliberately not
    invariant under the diagonal action: bricks ignore the point slot.
    """
    w = build_cayley_window(Z, R)
    model = make_cycle_model(w, L)
    ham = genuine_to_homotopy(model)
    ground = GroundSet(w, model, "diagonal")
    if n == 0:
        fam = CoverFamily(ground, [("all", frozenset(ground.pairs))])
        return ham, ground, fam
    P = 2 * (k + 1)
    if P % (n + 1):
        raise ValueError("2(k+1) must be divisible by n+1")
    offset = P // (n + 1)
    members = []
    for j in range(n + 1):
        for a in range(-R - P + 1, R + 1):
            if (a - j * offset) % P:
                continue
            body = frozenset(
                ((g,), y)
                for g in range(max(a, -R), min(a + P - 1, R) + 1)
                for y in ground.points
            )
            if body:
                members.append((f"b{j}:{a}", body))
    return ham, ground, CoverFamily(ground, members)


def ramp_map_instance(R=20, L=6, slope_den=12):
    """Hand-profiled two-vertex map with displacement 2/slope_den.

    The A-coordinate ramps linearly across the middle of the window and
    saturates outside it, giving full-window domain with a small
    measured constant; the carrier rotation supplies the point action.
    """
    w = build_cayley_window(Z, R)
    model = make_cycle_model(w, L)
    ham = genuine_to_homotopy(model)
    ground = GroundSet(w, model, "diagonal")
    K = SimplicialComplexModel(["A", "B"], [["A", "B"]])
    half = slope_den // 2
    values = {}
    for g in w:
        t = Fraction(g[0] + half, slope_den)
        t = max(Fraction(0), min(Fraction(1), t))
        for x in ground.points:
            values[((g[0],), x)] = L1Point({"A": t, "B": 1 - t})
    phi = EquivariantMap("diagonal", w, K, values, point_action=model.action)
    return phi, ham, ground


def tree_cylinder_instance(R, depth):
    """Depth-truncated two-generator tree with straightened boundary
    cylinders: (g, x) joins the letter's member when the pulled word
    g^-1.x is a boundary word opening with that letter.  Pulls are
    unique, so the four members are pairwise disjoint."""
    w = build_cayley_window(FreeGroupSpec(2), R)
    model = make_tree_boundary_model(w, depth)
    ground = GroundSet(w, model, "diagonal")
    members = []
    for letter in ("a", "A", "b", "B"):
        body = set()
        for g in w:
            ginv = w.inverse(g)
            for x in sorted(model.boundary):
                y = model.action.apply(ginv, x)
                if y is not None and y in model.boundary and y.startswith(letter):
                    body.add((g, x))
        members.append((f"C{letter}", frozenset(body)))
    return w, model, ground, CoverFamily(ground, members)


def write_tree_docs(d, R=2, depth=3):
    """Cylinder-cover and full-interior documents for the command line."""
    w, model, ground, fam = tree_cylinder_instance(R, depth)
    docio.write_doc(str(d / "bdy.json"), docio.cover_doc(fam))
    interior = CoverFamily(ground, [("everything", frozenset(ground.pairs))])
    docio.write_doc(str(d / "interior.json"), docio.cover_doc(interior))


def write_negation_docs(d):
    """Sign-flip action on a four-point line plus an invariant cover."""
    labels = ("-2", "-1", "1", "2")
    dist = {(a, b): Fraction(abs(int(a) - int(b)))
            for a in labels for b in labels if a != b}
    space = FiniteMetricSpace(labels, dist)
    act = FiniteGroupAction.generated_by(
        space, {"-2": "2", "-1": "1", "1": "-1", "2": "-2"})
    docio.write_doc(str(d / "act.json"), docio.group_action_doc(act))
    members = [("A", frozenset({"1"})), ("A'", frozenset({"-1"})),
               ("B", frozenset({"-2", "2"}))]
    docio.write_doc(str(d / "cover.json"), docio.space_cover_doc(space, members))
    return space
