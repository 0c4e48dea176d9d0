"""Quotients by finite isometry groups and equivariant refinement lifting.

Everything here lives on a plain finite metric space carrying a total
action of a finite group; there is no window and no boundary.  Families
of subsets are bare (name, frozenset) lists so the same helpers serve
both the quotient side and the lifted side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .covers import FamilyPredicate, Verdict
from .errors import DomainError, PreconditionError
from .groups import FiniteGroupSpec
from .spaces import FiniteMetricSpace

PlainFamily = Sequence[tuple]


class FiniteGroupAction:
    """Total action of a finite group on a finite metric space.

    ``maps[h]`` must be a point bijection for every element of the group.
    The constructor checks that the identity acts trivially, that the maps
    compose according to the multiplication table, and that every map
    preserves all distances exactly.
    """

    def __init__(self, spec: FiniteGroupSpec, space: FiniteMetricSpace, maps: Mapping):
        self.spec = spec
        self.space = space
        pts = list(space.points)
        pset = set(pts)
        fixed = {}
        for h in range(len(spec.table)):
            if h not in maps:
                raise PreconditionError(f"no map supplied for group element {h}")
            m = dict(maps[h])
            if set(m) != pset or set(m.values()) != pset:
                raise PreconditionError(f"map for element {h} is not a bijection of the points")
            fixed[h] = m
        e = spec.identity()
        if any(fixed[e][y] != y for y in pts):
            raise PreconditionError("identity element must act as the identity map")
        for a in fixed:
            for b in fixed:
                ab = spec.multiply(a, b)
                if any(fixed[ab][y] != fixed[a][fixed[b][y]] for y in pts):
                    raise PreconditionError(f"maps do not respect the multiplication table at ({a}, {b})")
        for h, m in fixed.items():
            for i, y in enumerate(pts):
                for z in pts[i + 1:]:
                    if space.dist(m[y], m[z]) != space.dist(y, z):
                        raise DomainError(
                            f"element {h} does not act by isometries: distorts the pair ({y}, {z})")
        self.maps = fixed

    @classmethod
    def generated_by(cls, space: FiniteMetricSpace, step: Mapping) -> "FiniteGroupAction":
        """Cyclic action generated by one bijection; the group order is the map's order."""
        pts = list(space.points)
        m = dict(step)
        powers = [{y: y for y in pts}]
        cur = dict(m)
        while any(cur[y] != y for y in pts):
            powers.append(dict(cur))
            cur = {y: m[cur[y]] for y in pts}
            if len(powers) > len(pts):
                raise PreconditionError("step map does not have finite order on the points")
        k = len(powers)
        return cls(FiniteGroupSpec.cyclic(k), space, dict(enumerate(powers)))

    def elements(self) -> range:
        return range(len(self.spec.table))

    def order(self) -> int:
        return len(self.spec.table)

    def apply(self, h, y):
        return self.maps[h][y]

    def orbit(self, y) -> frozenset:
        return frozenset(self.maps[h][y] for h in self.elements())

    def translate(self, h, member) -> frozenset:
        return frozenset(self.maps[h][y] for y in member)

    def setwise_stabilizer(self, member) -> tuple:
        m = frozenset(member)
        return tuple(h for h in self.elements() if self.translate(h, m) == m)


@dataclass(frozen=True)
class QuotientSpace:
    """Orbit space of a finite isometric action, with its quotient metric."""

    action: FiniteGroupAction
    space: FiniteMetricSpace
    classes: Mapping
    representatives: Mapping
    q: Mapping

    def project(self, y) -> str:
        return self.q[y]

    def push(self, member) -> frozenset:
        return frozenset(self.q[y] for y in member)

    def pull(self, member) -> frozenset:
        want = frozenset(member)
        return frozenset(y for y in self.action.space.points if self.q[y] in want)


def quotient_space(action: FiniteGroupAction) -> QuotientSpace:
    """Collapse orbits and metrise the result.

    The distance between two classes is the smallest distance from a
    translate of one representative to the other; moving only one side
    is enough because the action is isometric.  The resulting table is
    re-validated as a metric rather than trusted.
    """
    src = action.space
    label_of: dict = {}
    classes: dict = {}
    reps: dict = {}
    order: list = []
    for y in src.points:
        if y in label_of:
            continue
        orb = action.orbit(y)
        name = f"[{y}]"
        classes[name] = orb
        reps[name] = y
        order.append(name)
        for z in orb:
            label_of[z] = name
    dist = {}
    for a in order:
        for b in order:
            ya, yb = reps[a], reps[b]
            dist[(a, b)] = min(src.dist(action.apply(h, ya), yb) for h in action.elements())
    for a in order:
        for b in order:
            if a != b and dist[(a, b)] == 0:
                raise DomainError(f"distinct orbits at distance zero: {a} and {b}")
    qspace = FiniteMetricSpace(tuple(order), dist, validate=True)
    return QuotientSpace(action=action, space=qspace, classes=classes,
                         representatives=reps, q=label_of)


def family_dimension(points, members: PlainFamily) -> int:
    """Largest point multiplicity minus one, over a bare family."""
    best = -1
    for y in points:
        mult = sum(1 for _, m in members if y in m)
        if mult - 1 > best:
            best = mult - 1
    return best


def min_dim_refinement(space: FiniteMetricSpace, members: PlainFamily,
                       exact_limit: int = 16) -> tuple[list, dict]:
    """Refine a finite cover down to dimension zero.

    On a finite model every cover refines to a partition, so the whole
    question is the tie-break: keep as many input members unchanged as
    possible, preferring the lexicographically earliest name set.  Kept
    members must be pairwise disjoint, so this is a maximum disjoint
    subfamily problem: branch and bound (exact) up to ``exact_limit``
    points, greedy in name order above that.  Leftover points go to their
    first containing unkept member, as one extra piece per member.
    """
    pts = list(space.points)
    named = [(str(name), frozenset(m)) for name, m in members]
    if len(set(n for n, _ in named)) != len(named):
        raise PreconditionError("member names must be distinct")
    pall = set(pts)
    for name, m in named:
        if not m <= pall:
            raise PreconditionError(f"member {name} leaves the space")
    covered = set().union(*[m for _, m in named]) if named else set()
    if covered != pall:
        missing = sorted(pall - covered, key=str)[0]
        raise PreconditionError(f"input family does not cover the space: {missing!r} uncovered")

    by_name = sorted(range(len(named)), key=lambda i: named[i][0])
    sets = [named[i][1] for i in by_name]
    exact = len(pts) <= exact_limit
    if exact:
        best: list[int] = []

        def walk(i: int, chosen: list[int], used: set) -> None:
            nonlocal best
            if len(chosen) > len(best):
                best = list(chosen)
            if i == len(sets) or len(chosen) + (len(sets) - i) <= len(best):
                return
            if not (sets[i] & used):
                chosen.append(i)
                walk(i + 1, chosen, used | sets[i])
                chosen.pop()
            walk(i + 1, chosen, used)

        walk(0, [], set())
        kept_sorted = best
    else:
        kept_sorted = []
        used: set = set()
        for i in range(len(sets)):
            if not (sets[i] & used):
                kept_sorted.append(i)
                used |= sets[i]
    kept = sorted(by_name[i] for i in kept_sorted)
    kept_union = set().union(*[named[i][1] for i in kept]) if kept else set()

    rest: dict[int, set] = {}
    for y in pts:
        if y in kept_union:
            continue
        j = next(i for i in by_name if y in named[i][1] and i not in kept)
        rest.setdefault(j, set()).add(y)

    existing = {n for n, _ in named}
    out = [(named[i][0], named[i][1]) for i in kept]
    for j in sorted(rest, key=lambda i: named[i][0]):
        nm = f"{named[j][0]}~rest"
        while nm in existing:
            nm += "~"
        existing.add(nm)
        out.append((nm, frozenset(rest[j])))

    refine_fail = None
    for nm, w in out:
        if not any(w <= m for _, m in named):
            refine_fail = {"member": nm}
            break
    union = set().union(*[w for _, w in out]) if out else set()
    report = {
        "dimension": family_dimension(pts, out),
        "unchanged": tuple(named[i][0] for i in kept),
        "optimal": exact,
        "method": "branch-and-bound" if exact else "greedy",
        "refines": Verdict(passed=refine_fail is None, witness=refine_fail, checked=len(out)),
        "covers": Verdict(passed=union == pall, checked=len(pts),
                          witness=None if union == pall else {"point": str(sorted(pall - union, key=str)[0])}),
    }
    return out, report


def f_subset_report(action: FiniteGroupAction, members: PlainFamily,
                    predicate: FamilyPredicate | str | None = None) -> dict:
    """Equal-or-disjoint translate check with per-member stabilizers.

    A family qualifies when every translate of a member either equals the
    member or misses it, translates stay inside the family, and (when a
    predicate is given) each setwise stabilizer generates an allowed
    subgroup.
    """
    if predicate is not None and not isinstance(predicate, FamilyPredicate):
        predicate = FamilyPredicate(predicate)
    named = [(name, frozenset(s)) for name, s in members]
    sets = {s for _, s in named}
    clash = None
    stray = None
    per = []
    for name, u in named:
        for h in action.elements():
            hu = action.translate(h, u)
            if hu != u and (hu & u) and clash is None:
                clash = {"member": name, "h": action.spec.element_to_str(h)}
            if hu not in sets and stray is None:
                stray = {"member": name, "h": action.spec.element_to_str(h)}
        stab = action.setwise_stabilizer(u)
        entry = {"member": name, "stabilizer_size": len(stab)}
        if predicate is not None:
            ok = predicate.allows(action.spec, stab)
            entry["allowed"] = Verdict(passed=ok, checked=1,
                                       witness=None if ok else {"member": name})
        per.append(entry)
    n = len(named) * action.order()
    report = {
        "equal_or_disjoint": Verdict(passed=clash is None, witness=clash, checked=n),
        "invariant": Verdict(passed=stray is None, witness=stray, checked=n),
        "members": per,
    }
    if predicate is not None:
        report["all_allowed"] = all(e["allowed"].passed for e in per)
    return report


def _validate_invariant_cover(action: FiniteGroupAction, named_u: list) -> None:
    """A lawful input cover is a group-invariant family whose distinct
    translates of a member are pairwise disjoint."""
    usets = {s for _, s in named_u}
    for name, u in named_u:
        for h in action.elements():
            hu = action.translate(h, u)
            if hu not in usets:
                raise PreconditionError(
                    f"cover is not group invariant: element {h} moves member {name} outside the family")
            if hu != u and (hu & u):
                raise PreconditionError(
                    f"distinct translates of member {name} overlap (element {h})")


def equivariant_lift(quotient: QuotientSpace, refinement: PlainFamily,
                     cover: PlainFamily, predicate: FamilyPredicate | str | None = None) -> tuple[list, dict]:
    """Lift a refinement of the pushed-down cover back to the acted space.

    Each refinement member V is assigned the first cover member U whose
    image downstairs contains V; the lift of V is the family of pieces
    preimage(V) & hU over coset representatives of the setwise stabilizer
    of U.  Those translates tile the full preimage of the image of U, so
    the pieces of one V are disjoint and the lift cannot have higher
    dimension than the refinement.  All of that is checked, not assumed.
    """
    act = quotient.action
    pts = list(act.space.points)
    named_u = [(str(n), frozenset(s)) for n, s in cover]
    named_v = [(str(n), frozenset(s)) for n, s in refinement]
    if not named_u:
        raise PreconditionError("cover is empty")
    _validate_invariant_cover(act, named_u)
    labels = set(quotient.space.points)
    for name, v in named_v:
        if not v <= labels:
            raise PreconditionError(f"refinement member {name} is not a set of classes")
    if predicate is not None and not isinstance(predicate, FamilyPredicate):
        predicate = FamilyPredicate(predicate)

    pushed = [(n, quotient.push(u)) for n, u in named_u]
    out: list = []
    per_member: list = []
    assignment: dict = {}
    for name, v in named_v:
        feas = [j for j, (_, pu) in enumerate(pushed) if v <= pu]
        if not feas:
            raise DomainError(f"no cover member pushes over refinement member {name}")
        j = feas[0]
        uname, u = named_u[j]
        assignment[name] = uname
        stab = act.setwise_stabilizer(u)
        sset = set(stab)
        seen: set = set()
        reps: list = []
        for h in act.elements():
            coset = frozenset(act.spec.multiply(h, s) for s in sset)
            if coset not in seen:
                seen.add(coset)
                reps.append(h)
        pre = quotient.pull(v)
        tiles = [act.translate(h, u) for h in reps]
        tiled = (set().union(*tiles) if tiles else set()) == set(quotient.pull(quotient.push(u)))
        disjoint = all(not (tiles[i] & tiles[k])
                       for i in range(len(tiles)) for k in range(i + 1, len(tiles)))
        home = pre & u
        if home:
            stab_ok = act.setwise_stabilizer(home) == stab
            stab_note = ()
        else:
            stab_ok = True
            stab_note = ("empty home piece",)
        entry = {
            "member": name,
            "assigned": uname,
            "stabilizer_size": len(stab),
            "cosets": len(reps),
            "tiling": Verdict(passed=tiled and disjoint, checked=len(tiles),
                              witness=None if tiled and disjoint else {"member": name}),
            "stabilizer_preserved": Verdict(passed=stab_ok, checked=1, notes=stab_note,
                                            witness=None if stab_ok else {"member": name}),
        }
        if predicate is not None:
            allowed = predicate.allows(act.spec, stab)
            entry["stabilizer_allowed"] = Verdict(passed=allowed, checked=1,
                                                  witness=None if allowed else {"member": uname, "generators": stab})
        per_member.append(entry)
        for h in reps:
            w = pre & act.translate(h, u)
            if w:
                out.append((f"{name}^{uname}@{act.spec.element_to_str(h)}", w))

    wsets = {w for _, w in out}
    equi_fail = None
    for h in act.elements():
        for nm, w in out:
            if act.translate(h, w) not in wsets:
                equi_fail = {"h": act.spec.element_to_str(h), "member": nm}
                break
        if equi_fail:
            break
    refine_fail = None
    for nm, w in out:
        if not any(w <= u for _, u in named_u):
            refine_fail = {"member": nm}
            break
    union = set().union(*[w for _, w in out]) if out else set()
    covers_ok = union == set(pts)
    dim_v = family_dimension(quotient.space.points, named_v)
    dim_w = family_dimension(pts, out)
    cert = {
        "assignment": assignment,
        "dimension": {
            "refinement": dim_v,
            "lift": dim_w,
            "bounded": Verdict(passed=dim_w <= dim_v, checked=len(pts)),
        },
        "refines": Verdict(passed=refine_fail is None, witness=refine_fail, checked=len(out)),
        "covers": Verdict(passed=covers_ok, checked=len(pts),
                          witness=None if covers_ok else {"point": str(sorted(set(pts) - union, key=str)[0])}),
        "equivariant": Verdict(passed=equi_fail is None, witness=equi_fail,
                               checked=len(out) * act.order()),
        "members": per_member,
    }
    return out, cert
