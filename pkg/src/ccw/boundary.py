"""Interior covers, boundary scale assignment, and the two-part assembly.

Interior covers come in two flavours: a simplicial one built from
second-subdivision stars, and a metric one built per point from
orbit-avoiding balls.  A cover of the boundary slice is enlarged into
the whole space by half-epsilon balls, and the two parts are glued with
an exact dimension and Lebesgue certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .covers import CoverFamily, FamilyPredicate, GroundSet, Verdict
from .errors import DomainError, PreconditionError
from .spaces import (
    CompactificationModel,
    FiniteMetricSpace,
    PartialAction,
    SimplicialComplexModel,
    barycentric_subdivision,
)


def _simplex_label(s) -> str:
    return "+".join(sorted(map(str, s)))


def _chain_label(chain) -> str:
    return "<".join(_simplex_label(s) for s in sorted(chain, key=len))


def second_subdivision_model(K: SimplicialComplexModel) -> tuple[CompactificationModel, SimplicialComplexModel, dict]:
    """Finite stand-in for |K| built on second-subdivision vertices.

    Vertices of S2K are chains of simplices of K; the metric is the
    1-skeleton path metric (components more than any path apart), and
    the induced chain action carries the original window action.  The
    boundary is empty: this models an interior.
    """
    if K.action is None:
        raise PreconditionError("complex needs a window action")
    S1 = barycentric_subdivision(K)
    S2 = barycentric_subdivision(S1)
    labels = {c: _chain_label(c) for c in S2.vertices}
    if len(set(labels.values())) != len(labels):
        raise PreconditionError("chain labels collide")
    verts = list(S2.vertices)
    index = {c: i for i, c in enumerate(verts)}
    n = len(verts)
    far = Fraction(n)
    dist = [[None] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = Fraction(0)
    for s in S2.simplices:
        if len(s) == 2:
            i, j = (index[c] for c in s)
            dist[i][j] = dist[j][i] = Fraction(1)
    for k in range(n):
        for i in range(n):
            if dist[i][k] is None:
                continue
            for j in range(n):
                if dist[k][j] is None:
                    continue
                cand = dist[i][k] + dist[k][j]
                if dist[i][j] is None or cand < dist[i][j]:
                    dist[i][j] = cand
    table = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                table[(labels[verts[i]], labels[verts[j]])] = (
                    dist[i][j] if dist[i][j] is not None else far
                )
    space = FiniteMetricSpace([labels[c] for c in verts], table, validate=False)
    w = K.action.window
    maps = {}
    for g in w:
        m = {}
        for c in verts:
            image = S2.action.apply(g, c)
            if image is not None:
                m[labels[c]] = labels[image]
        maps[g] = m
    action = PartialAction(w, [labels[c] for c in verts], maps)
    model = CompactificationModel("second-subdivision", space, frozenset(), action, w)
    return model, S2, labels


def simplicial_interior_cover(K: SimplicialComplexModel, predicate) -> tuple[CoverFamily, dict]:
    """One window-product member per simplex, from subdivision stars.

    The neighbourhood of a simplex collects the second-subdivision
    vertices whose chain passes through it; a chain holds at most one
    simplex per dimension, so neighbourhoods of same-dimension simplices
    are disjoint and the family dimension is at most dim K.
    """
    if isinstance(predicate, str):
        predicate = FamilyPredicate(predicate)
    if K.action is None:
        raise PreconditionError("complex needs a window action")
    w = K.action.window
    order = sorted(K.simplices, key=lambda s: (len(s), sorted(map(str, s))))
    for s in order:
        stab = K.simplex_stabilizer(s)
        if not predicate.allows(w.spec, stab):
            raise DomainError(
                "simplex stabilizer leaves the allowed family",
                witness={
                    "simplex": _simplex_label(s),
                    "stabilizer": [w.to_str(g) for g in stab],
                    "family": predicate.kind,
                },
            )
    model, S2, labels = second_subdivision_model(K)
    ground = GroundSet(w, model, "diagonal")
    members = []
    for s in order:
        hood = [labels[c] for c in S2.vertices if s in c]
        members.append(
            (f"N({_simplex_label(s)})", frozenset((g, x) for g in w for x in hood))
        )
    fam = CoverFamily(ground, members)

    by_dim: dict[int, list] = {}
    for s in order:
        by_dim.setdefault(len(s), []).append(f"N({_simplex_label(s)})")
    sets = {name: body for name, body in fam.members}
    clash = None
    pairs_checked = 0
    for names in by_dim.values():
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                pairs_checked += 1
                hit = sets[a] & sets[b]
                if hit and clash is None:
                    p = next(iter(hit))
                    clash = {"members": (a, b), "pair": ground.pair_to_str(p)}
    same_dim = Verdict(clash is None, witness=clash, checked=pairs_checked)

    mismatch = None
    checked = 0
    for h in w:
        for s in order:
            image = K.act_simplex(h, s)
            if image is None:
                continue
            translated, _ = fam.translate_member(h, f"N({_simplex_label(s)})")
            checked += 1
            if not translated <= sets[f"N({_simplex_label(image)})"]:
                stray = next(iter(translated - sets[f"N({_simplex_label(image)})"]))
                mismatch = {
                    "h": w.to_str(h),
                    "simplex": _simplex_label(s),
                    "pair": ground.pair_to_str(stray),
                }
                break
        if mismatch:
            break
    equivariance = Verdict(mismatch is None, witness=mismatch, checked=checked)

    cert = {
        "dimension": fam.family_dimension(),
        "dimension_bound": K.dimension,
        "dimension_ok": fam.family_dimension() <= K.dimension,
        "same_dimension_disjoint": same_dim,
        "coverage": fam.coverage_check(),
        "equivariance": equivariance,
        "stabilizers_checked": len(order),
    }
    return fam, cert


def proper_interior_cover(model: CompactificationModel, predicate) -> tuple[CoverFamily, dict]:
    """Per-point orbit-avoiding neighbourhoods, then a covering orbit family.

    Each interior point gets the largest realized-radius ball avoiding
    the rest of its orbit, trimmed by the translates that move the point
    and symmetrized over its stabilizer; representatives are chosen
    greedily until the window translates of their neighbourhoods cover
    the interior, and every member is a window product over one
    translate.
    """
    if isinstance(predicate, str):
        predicate = FamilyPredicate(predicate)
    w = model.window
    act = model.action
    space = model.space
    interior = [x for x in space.points if x not in model.boundary]
    if not interior:
        raise PreconditionError("model has no interior points")
    interior_set = frozenset(interior)
    candidates = sorted({d for d in space.realized_distances() if d > 0}, reverse=True)
    candidates = [space.diameter() + 1] + candidates

    reports = {}
    hoods = {}
    for x in interior:
        stab = [g for g in w if act.apply(g, x) == x]
        if not predicate.allows(w.spec, stab):
            raise DomainError(
                "point stabilizer leaves the allowed family",
                witness={"x": x, "stabilizer": [w.to_str(g) for g in stab], "family": predicate.kind},
            )
        orbit = {act.apply(g, x) for g in w} - {None}
        completion = (orbit - {x}) & set(space.points)
        u0 = None
        for r in candidates:
            ball = frozenset(space.ball(x, r)) & interior_set
            if not (ball & completion):
                u0 = ball
                break
        if u0 is None:
            raise DomainError("no orbit-avoiding ball", witness={"x": x})
        rs = [g for g in w if any(act.apply(g, y) in u0 for y in u0)]
        u1 = u0
        removed = set()
        skipped_moves = 0
        for g in w:
            gx = act.apply(g, x)
            if gx is None:
                skipped_moves += 1
                continue
            if gx == x:
                continue
            removed |= {act.apply(g, y) for y in u1} - {None}
        u2 = u1 - removed
        if x not in u2:
            raise DomainError(
                "construction lost its centre",
                witness={"x": x, "note": "a translate covered the centre"},
            )
        ux = set(u2)
        for g in stab:
            image = {act.apply(g, y) for y in u2} - {None}
            ux &= image
        ux &= interior_set
        hoods[x] = frozenset(ux)
        setwise = [g for g in w if {act.apply(g, y) for y in ux} == ux]
        reports[x] = {
            "radius": next(r for r in candidates if (frozenset(space.ball(x, r)) & interior_set) == u0),
            "size": len(ux),
            "rs_size": len(rs),
            "stabilizer_size": len(stab),
            "stabilizer_matches": set(setwise) == set(stab),
            "skipped_moves": skipped_moves,
        }

    reps = []
    covered: set = set()
    fibres: dict[frozenset, str] = {}
    order = []
    for x in interior:
        if x in covered:
            continue
        reps.append(x)
        for g in w:
            img = frozenset({act.apply(g, y) for y in hoods[x]} - {None}) & interior_set
            if not img:
                continue
            covered |= img
            if img not in fibres:
                name = f"U[{x}]*{w.to_str(g)}"
                fibres[img] = name
                order.append((name, img))
    ground = GroundSet(w, model, "diagonal")
    members = [(name, frozenset((g, y) for g in w for y in img)) for name, img in order]
    fam = CoverFamily(ground, members)

    missing = next((y for y in interior if y not in covered), None)
    dim = fam.family_dimension()
    cert = {
        "representatives": list(reps),
        "member_count": len(members),
        "dimension": dim,
        "dimension_bound": len(reps) - 1,
        "dimension_ok": dim <= len(reps) - 1,
        "interior_coverage": Verdict(missing is None, witness=None if missing is None else {"x": missing}),
        "properness": "finite window and finite model: return sets are finite by inspection",
        "points": reports,
    }
    return fam, cert


# ---------------------------------------------------------------------------
# boundary covers and their extension


class BoundaryCover:
    """A cover family whose members live over boundary points only."""

    def __init__(self, family: CoverFamily):
        ground = family.ground
        model = ground.model
        if ground.mode != "diagonal":
            raise PreconditionError("boundary covers need a diagonal ground set")
        if not model.boundary:
            raise PreconditionError("model has no boundary")
        for name, s in family.members:
            for g, x in s:
                if x not in model.boundary:
                    raise PreconditionError(f"member {name!r} holds a non-boundary pair")
        self.family = family
        ident = ground.window.identity
        self.v1 = {
            name: frozenset(x for g, x in s if g == ident) for name, s in family.members
        }

    def slices(self, name: str) -> dict:
        out: dict = {}
        for g, x in self.family.member(name):
            out.setdefault(g, set()).add(x)
        return {g: frozenset(xs) for g, xs in out.items()}


@dataclass(frozen=True)
class EpsilonAssignment:
    """Per-boundary-point scale, halved when used for enlargement."""

    eps: Mapping
    notes: tuple = ()


def boundary_epsilon(bc: BoundaryCover) -> EpsilonAssignment:
    """Largest scale (at most 1) keeping the boundary ball inside every
    identity-slice member through the point.

    Candidates are realized distances and 1, scanned descending; the
    smallest positive candidate always passes because its open ball is
    the point alone.
    """
    model = bc.family.ground.model
    space = model.space
    bdry = sorted(model.boundary, key=str)
    candidates = sorted(
        {Fraction(1)} | {d for d in space.realized_distances() if 0 < d <= 1},
        reverse=True,
    )
    eps = {}
    for x in bdry:
        containing = [name for name, pts in bc.v1.items() if x in pts]
        if not containing:
            raise DomainError(
                "boundary point uncovered at the identity slice", witness={"x": x}
            )
        target = set(bdry)
        for name in containing:
            target &= bc.v1[name]
        got = None
        for c in candidates:
            if {y for y in bdry if space.dist(x, y) < c} <= target:
                got = c
                break
        if got is None:
            raise DomainError("no candidate scale works", witness={"x": x})
        eps[x] = got
    return EpsilonAssignment(
        eps, notes=("open balls; candidates are realized distances and 1",)
    )


def enlarge_boundary_set(Y, eps: EpsilonAssignment, space: FiniteMetricSpace) -> frozenset:
    """Union of half-scale open balls around the boundary points of Y."""
    out: set = set()
    for x in Y:
        r = eps.eps[x] / 2
        out |= {y for y in space.points if space.dist(x, y) < r}
    return frozenset(out)


def extend_boundary_cover(
    bc: BoundaryCover, eps: EpsilonAssignment, check_sizes=(2, 3)
) -> tuple[CoverFamily, dict]:
    """Enlarge each slice through the straightened boundary set.

    The slice over g is pulled back by g, enlarged by half-scale balls,
    and pushed forward again; a nonempty slice whose pull-push dies
    entirely is an action-domain shortfall and raises.  The restriction
    law (the enlargement meets the boundary in exactly the original
    member), dimension preservation, and the identity-slice intersection
    law are all checked exactly and certified.
    """
    family = bc.family
    ground = family.ground
    model = ground.model
    space = model.space
    w = ground.window
    act = model.action
    skips = {"down": 0, "off_boundary": 0, "up": 0}
    members_out = []
    for name, s in family.members:
        slices: dict = {}
        for g, x in s:
            slices.setdefault(g, set()).add(x)
        pairs: set = set()
        for g, xs in slices.items():
            ginv = w.inverse(g)
            down = set()
            for x in xs:
                y = act.apply(ginv, x)
                if y is None:
                    skips["down"] += 1
                    continue
                if y not in model.boundary:
                    skips["off_boundary"] += 1
                    continue
                down.add(y)
            up = set()
            for y in enlarge_boundary_set(down, eps, space):
                z = act.apply(g, y)
                if z is None:
                    skips["up"] += 1
                    continue
                up.add(z)
            if xs and not up:
                raise DomainError(
                    "action too partial to extend a slice",
                    witness={"member": name, "g": w.to_str(g)},
                )
            pairs |= {(g, z) for z in up}
        members_out.append((name, frozenset(pairs)))
    out = CoverFamily(ground, members_out)

    old = {name: s for name, s in family.members}
    bad = None
    for name, s in members_out:
        restricted = frozenset(p for p in s if p[1] in model.boundary)
        if restricted != old[name]:
            diff = (restricted ^ old[name])
            bad = {"member": name, "pair": ground.pair_to_str(next(iter(diff)))}
            break
    restriction = Verdict(bad is None, witness=bad, checked=len(members_out))

    law_bad = None
    law_checked = 0
    names = list(bc.v1)
    for size in check_sizes:
        if size > len(names):
            continue
        for combo in itertools.combinations(names, size):
            law_checked += 1
            lhs = None
            for name in combo:
                e = enlarge_boundary_set(bc.v1[name], eps, space)
                lhs = e if lhs is None else (lhs & e)
            meet = set(model.boundary)
            for name in combo:
                meet &= bc.v1[name]
            rhs = enlarge_boundary_set(meet, eps, space)
            if lhs != rhs:
                law_bad = {"members": combo, "point": next(iter(lhs ^ rhs))}
                break
        if law_bad:
            break
    law = Verdict(law_bad is None, witness=law_bad, checked=law_checked)

    new_sets = {name: s for name, s in members_out}
    eq_checked = 0
    eq_bad = None
    for h in w:
        for name, s in family.members:
            moved, skipped = family.translate_member(h, name)
            if skipped or not moved:
                continue
            target = next((m for m, body in family.members if moved == body), None)
            if target is None:
                continue
            pushed, pskip = out.translate_member(h, name)
            if pskip:
                continue
            eq_checked += 1
            if pushed != new_sets[target]:
                eq_bad = {"h": w.to_str(h), "member": name, "target": target}
                break
        if eq_bad:
            break
    equivariance = Verdict(eq_bad is None, witness=eq_bad, checked=eq_checked)

    cert = {
        "restriction": restriction,
        "dimension_before": family.family_dimension(),
        "dimension_after": out.family_dimension(),
        "dimension_preserved": family.family_dimension() == out.family_dimension(),
        "intersection_law": law,
        "equivariance": equivariance,
        "skips": skips,
    }
    return out, cert


def assemble_full_cover(
    u_bdy: CoverFamily, u_inf: CoverFamily, alpha
) -> tuple[CoverFamily, dict]:
    """Union of a boundary-extended family and an interior family.

    Certifies the dimension ledger (sum bound plus one), the boundary
    Lebesgue scale of the first part, the window-product coverage of the
    second, and the Lebesgue scale of the union on the whole ground set.
    """
    g1, g2 = u_bdy.ground, u_inf.ground
    if g1 is not g2 and (
        g1.mode != g2.mode
        or g1.points != g2.points
        or g1.window.radius != g2.window.radius
        or g1.window.spec.to_json() != g2.window.spec.to_json()
    ):
        raise PreconditionError("families live on different ground sets")
    overlap = set(u_bdy.names()) & set(u_inf.names())
    if overlap:
        raise PreconditionError(f"member names collide: {sorted(overlap)}")
    union = CoverFamily(g1, list(u_bdy.members) + list(u_inf.members))
    coverage = union.coverage_check()
    if not coverage.passed:
        raise DomainError("assembled family leaves a coverage gap", witness=coverage.witness)

    w = g1.window
    model = g1.model
    bdry_bad = None
    bdry_checked = 0
    for h in w.inner_window(alpha):
        ball = w.ball(h, alpha)
        for x in sorted(model.boundary, key=str):
            bdry_checked += 1
            need = {(u, x) for u in ball}
            if not any(need <= s for _, s in u_bdy.members):
                bdry_bad = {"g": w.to_str(h), "x": x}
                break
        if bdry_bad:
            break
    boundary_lebesgue = Verdict(bdry_bad is None, witness=bdry_bad, checked=bdry_checked)

    full = frozenset(w)
    int_bad = None
    int_checked = 0
    for x in model.interior:
        int_checked += 1
        need = {(u, x) for u in full}
        if not any(need <= s for _, s in u_inf.members):
            int_bad = {"x": x}
            break
    interior_window = Verdict(int_bad is None, witness=int_bad, checked=int_checked)

    d_bdy = u_bdy.family_dimension()
    d_inf = u_inf.family_dimension()
    d_all = union.family_dimension()
    cert = {
        "alpha": Fraction(alpha),
        "alpha_is_infinite": w.alpha_is_infinite(alpha),
        "coverage": coverage,
        "boundary_lebesgue": boundary_lebesgue,
        "interior_window_lebesgue": interior_window,
        "lebesgue": union.lebesgue_check(alpha),
        "dimension": {
            "boundary": d_bdy,
            "interior": d_inf,
            "total": d_all,
            "bound": d_bdy + d_inf + 1,
            "bound_ok": d_all <= d_bdy + d_inf + 1,
        },
        "notes": (
            "finite model is metrisable by construction; no claim transfers to the genuine space",
        ),
    }
    return union, cert
