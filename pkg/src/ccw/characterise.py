"""Conversions between covers, simplex-valued maps, and disjoint families.

The forward route turns a finite-dimensional cover into a normalized
map to the nerve, weighting each member by how many expansion levels of
the seed it swallows; displacement per generator step is then measured,
never assumed.  The reverse route subdivides the target complex once
and pulls back vertex stars, grouped by grade, into families whose
disjointness is checked exactly.  Every conversion returns its
certificate alongside the object.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .covers import CoverFamily, FamilyPredicate, GroundSet, Verdict, nerve, pad_cover, shrink_cover
from .errors import PreconditionError
from .groups import GroupWindow
from .homotopy import HomotopyActionModel, adb_levels, n_long_check
from .spaces import (
    L1Point,
    PartialAction,
    SimplicialComplexModel,
    barycentric_subdivision,
    subdivide_point,
)

MAP_MODES = ("translation", "diagonal")


class EquivariantMap:
    """Pairs (g, x) to normalized simplex points, with a mode.

    Translation mode compares values along (g, x) -> (hg, x);
    diagonal mode along (g, x) -> (hg, hx) through the point action.
    """

    def __init__(
        self,
        mode: str,
        window: GroupWindow,
        target: SimplicialComplexModel,
        values: Mapping,
        point_action: PartialAction | None = None,
    ):
        if mode not in MAP_MODES:
            raise PreconditionError(f"mode must be one of {MAP_MODES}")
        if mode == "diagonal" and point_action is None:
            raise PreconditionError("diagonal mode needs the point action")
        self.mode = mode
        self.window = window
        self.target = target
        self.point_action = point_action
        self.values: dict = {}
        for (g, x), v in values.items():
            if g not in window:
                raise PreconditionError("map value indexed outside the window")
            if not isinstance(v, L1Point):
                v = L1Point(v)
            v.validate_on(target)
            self.values[(g, x)] = v

    def domain(self) -> frozenset:
        return frozenset(self.values)

    def norm_check(self, expected=1) -> Verdict:
        expected = Fraction(expected)
        for p, v in self.values.items():
            if v.norm() != expected:
                return Verdict(
                    False,
                    witness={"g": self.window.to_str(p[0]), "x": p[1], "norm": str(v.norm())},
                )
        return Verdict(True, checked=len(self.values))

    def measured_constant(self) -> Fraction:
        """Largest l1 displacement over one right generator step."""
        return self.measured_constant_detail()["value"]

    def measured_constant_detail(self) -> dict:
        w = self.window
        spec = w.spec
        gens = [s for s in spec.generators() if s != spec.identity()]
        best = Fraction(0)
        arg = None
        for (g, x), v in self.values.items():
            for s in gens:
                gs = w.mult(g, s)
                if gs is None:
                    continue
                other = self.values.get((gs, x))
                if other is None:
                    continue
                d = v.dist(other)
                if d > best:
                    best = d
                    arg = {"g": w.to_str(g), "x": x, "s": w.to_str(s)}
        return {"value": best, "witness": arg}

    def equivariance_check(self) -> Verdict:
        """Compare values along the mode's group motion, pushed through
        the target action; applications missing any piece are skipped."""
        act = self.target.action
        if act is None:
            return Verdict(
                False, inconclusive=True, notes=("target complex has no action to compare against",)
            )
        w = self.window
        checked = 0
        skips = 0
        for h in w:
            for (g, x), v in self.values.items():
                hg = w.mult(h, g)
                if hg is None:
                    continue
                if self.mode == "translation":
                    key = (hg, x)
                else:
                    hx = self.point_action.apply(h, x)
                    if hx is None:
                        skips += 1
                        continue
                    key = (hg, hx)
                other = self.values.get(key)
                if other is None:
                    continue
                pushed: dict = {}
                ok = True
                for vtx, c in v.coords.items():
                    u = act.apply(h, vtx)
                    if u is None:
                        ok = False
                        break
                    pushed[u] = pushed.get(u, Fraction(0)) + c
                if not ok:
                    skips += 1
                    continue
                checked += 1
                if L1Point(pushed) != other:
                    return Verdict(
                        False,
                        witness={
                            "h": w.to_str(h),
                            "g": w.to_str(g),
                            "x": x,
                        },
                        checked=checked,
                    )
        notes = (f"{skips} undefined applications skipped",) if skips else ()
        return Verdict(True, checked=checked, notes=notes)


# ---------------------------------------------------------------------------
# cover -> map


def cover_to_map(ham: HomotopyActionModel, family: CoverFamily, k: int) -> tuple[EquivariantMap, dict]:
    """Weight members by swallowed expansion levels and normalize.

    For each seed (g, x) with g in inner-window(k+1), a member U gets
    weight equal to the number of levels r in 0..k whose expansion stays
    inside U.  When every level is swallowed somewhere the total weight
    is at least k+1, so the normalized map exists; its per-step
    displacement is measured and reported, not assumed.
    """
    ground = family.ground
    if k < 0:
        raise PreconditionError("k must be >= 0")
    if ground.mode != "diagonal":
        raise PreconditionError("expansion weights need a diagonal ground set")
    if set(ground.points) != set(ham.carrier):
        raise PreconditionError("family and homotopy action live on different carriers")
    if ground.window.radius != ham.window.radius or len(ground.window) != len(ham.window):
        raise PreconditionError("family and homotopy action use different windows")
    K = nerve(family, with_action=True)
    w = ground.window
    values = {}
    min_norm = None
    clipped = 0
    fail = None
    checked = 0
    for g in w.inner_window(k + 1):
        for x in ground.points:
            checked += 1
            levels, clips = adb_levels(ham, (g, x), k)
            if clips:
                clipped += 1
                continue
            weights = {}
            for name, s in family.members:
                if (g, x) not in s:
                    continue
                count = 0
                for lev in levels:
                    if lev <= s:
                        count += 1
                    else:
                        break
                if count:
                    weights[name] = count
            total = sum(weights.values())
            if total == 0 and fail is None:
                fail = {"g": w.to_str(g), "x": x, "reason": "no member holds the seed"}
                continue
            if total == 0:
                continue
            if min_norm is None or total < min_norm:
                min_norm = total
            values[(g, x)] = L1Point({n: Fraction(c, total) for n, c in weights.items()})
    emap = EquivariantMap("diagonal", w, K, values, point_action=ground.model.action)
    eps = emap.measured_constant()
    passed = fail is None and clipped == 0 and min_norm is not None and min_norm >= k + 1
    if not passed and fail is None and min_norm is not None and min_norm < k + 1:
        fail = {"reason": "some seed total weight below k+1", "min_norm": min_norm}
    verdict = Verdict(
        passed,
        witness=fail,
        checked=checked,
        inconclusive=fail is None and clipped > 0,
        notes=(f"{clipped} clipped seeds excluded",) if clipped else (),
    )
    cert = {
        "k": k,
        "min_norm": min_norm,
        "measured_constant": eps,
        "clipped_seeds": clipped,
        "verdict": verdict,
    }
    return emap, cert


# ---------------------------------------------------------------------------
# map -> disjoint families


def map_to_disjoint_families(
    phi: EquivariantMap,
    ham: HomotopyActionModel,
    ground: GroundSet,
    r: int,
    n: int,
) -> dict:
    """Pull back subdivision vertex stars, grouped by grade.

    After one barycentric subdivision, vertices of equal grade are never
    adjacent, so within a grade the star preimages (coordinate at least
    1/(n+1)) are disjoint by structure; their group-scale r-disjointness
    and the window's ability to expand r steps are then checked exactly,
    alongside the displacement positivity margin.
    """
    if r < 1 or n < 0:
        raise PreconditionError("need r >= 1 and n >= 0")
    if phi.target.dimension > n:
        raise PreconditionError("target dimension exceeds n")
    eps = phi.measured_constant()
    pre_ok = eps <= Fraction(1, (n + 1) * (r + 1))
    SK = barycentric_subdivision(phi.target)
    sub_values = {p: subdivide_point(v, phi.target) for p, v in phi.values.items()}
    sub_map = EquivariantMap(phi.mode, phi.window, SK, sub_values, point_action=phi.point_action)
    sub_eps = sub_map.measured_constant()
    threshold = Fraction(1, n + 1)
    stars: dict[int, list] = {}
    covered = set()
    for vtx in SK.vertices:
        members = frozenset(p for p, sv in sub_values.items() if sv.coords.get(vtx, 0) >= threshold)
        if not members:
            continue
        covered |= members
        label = "+".join(sorted(vtx))
        stars.setdefault(len(vtx), []).append((label, members))
    families = []
    verdicts = []
    for grade_val in sorted(stars):
        fam = CoverFamily(ground, stars[grade_val])
        families.append((grade_val, fam))
        verdicts.append(fam.r_disjointness_check(r))
    seed_domain = sorted(
        {g for g, _ in sub_values} & set(ground.window.inner_window(r + 1)),
        key=ground.window.to_str,
    )
    long_enough = n_long_check(ham, r, seed_domain=seed_domain)
    return {
        "families": families,
        "pre_modulus_ok": pre_ok,
        "measured_constant": eps,
        "subdivided_constant": sub_eps,
        "positivity_margin": threshold - r * sub_eps,
        "r_disjoint": verdicts,
        "n_long": long_enough,
        "covers_domain": covered == set(sub_values),
    }


# ---------------------------------------------------------------------------
# point-map conversions


def map_to_point_map(phi: EquivariantMap) -> dict:
    """Restrict to the identity slot: psi(x) = phi(1, x)."""
    ident = phi.window.identity
    psi = {}
    for (g, x), v in phi.values.items():
        if g == ident:
            psi[x] = v
    if not psi:
        raise PreconditionError("identity slot is empty")
    return psi


def point_map_to_map(
    window: GroupWindow,
    target: SimplicialComplexModel,
    psi: Mapping,
    mode: str = "translation",
    point_action: PartialAction | None = None,
) -> EquivariantMap:
    """Spread a point map over the window: phi(g, x) = g.psi(x).

    Pairs whose push through the target action is undefined are left
    out of the domain rather than filled in.
    """
    if target.action is None:
        raise PreconditionError("target complex needs an action to spread along")
    values = {}
    for g in window:
        for x, v in psi.items():
            pushed: dict = {}
            ok = True
            for vtx, c in v.coords.items():
                u = target.action.apply(g, vtx)
                if u is None:
                    ok = False
                    break
                pushed[u] = pushed.get(u, Fraction(0)) + c
            if ok:
                values[(g, x)] = L1Point(pushed)
    return EquivariantMap(mode, window, target, values, point_action=point_action)


# ---------------------------------------------------------------------------
# scale trades between cover statistics


def multiplicity_to_lebesgue_cover(family: CoverFamily, alpha) -> tuple[CoverFamily, dict]:
    """Pad every member by alpha; the result carries alpha as a ball
    scale, verified exactly rather than by the padding argument."""
    padded = pad_cover(family, alpha)
    cert = {
        "alpha": Fraction(alpha),
        "lebesgue": padded.lebesgue_check(alpha),
        "dimension_before": family.family_dimension(),
        "dimension_after": padded.family_dimension(),
    }
    return padded, cert


def cover_to_multiplicity_cover(family: CoverFamily, d) -> tuple[CoverFamily, dict]:
    """Shrink every member by d; scale-d ball multiplicity then drops to
    the pointwise dimension of the original family, and inner coverage
    survives when the original had Lebesgue scale d.  Both facts are
    checked exactly on the result."""
    shrunk = shrink_cover(family, d)
    d = Fraction(d)
    w = family.ground.window
    inner = set(w.inner_window(d))
    missing = None
    union = shrunk.union_pairs()
    for g, x in family.ground.pairs:
        if g in inner and (g, x) not in union:
            missing = {"g": w.to_str(g), "x": x}
            break
    mult = shrunk.g_multiplicity(d)
    bound = family.family_dimension() + 1
    cert = {
        "d": d,
        "multiplicity": mult,
        "multiplicity_bound": bound,
        "multiplicity_ok": mult["value"] <= bound,
        "inner_coverage": Verdict(missing is None, witness=missing),
    }
    return shrunk, cert


# ---------------------------------------------------------------------------
# partition weights


def partition_lU(family: CoverFamily, k: int) -> tuple[EquivariantMap, dict]:
    """Distance-discounted slice weights over a ground partition.

    Each member sees weight k times its translated slice weight minus
    the group distance to the translating element, maximized over the
    closed k-ball; slice weights split 1 over the members whose point
    slice holds the point.  Members must partition the ground and
    translate into single members wherever their image is nonempty.
    """
    if k < 1:
        raise PreconditionError("k must be >= 1")
    ground = family.ground
    if ground.mode != "diagonal":
        raise PreconditionError("partition weights need a diagonal ground set")
    union = set()
    for _, s in family.members:
        if union & s:
            raise PreconditionError("members must be pairwise disjoint")
        union |= s
    if union != set(ground.pairs):
        raise PreconditionError("members must partition the ground set")
    w = ground.window
    spec = w.spec
    act = ground.model.action
    names = family.names()
    sets = {n: s for n, s in family.members}
    slices = {n: frozenset(x for _, x in s) for n, s in family.members}
    slice_count = {}
    for x in ground.points:
        slice_count[x] = sum(1 for n in names if x in slices[n])

    def weight(name: str, x) -> Fraction:
        if x not in slices[name] or slice_count[x] == 0:
            return Fraction(0)
        return Fraction(1, slice_count[x])

    table: dict = {}
    for h in w:
        for i, n in enumerate(names):
            image, _ = family.translate_member(h, n)
            if not image:
                continue
            hits = [m for m in names if image <= sets[m]]
            if len(hits) == 1:
                table[(h, n)] = hits[0]

    closed_balls = {}
    for g in w.inner_window(k + 1):
        closed_balls[g] = [
            h for h in w if spec.length(spec.multiply(spec.inverse(g), h)) <= k
        ]
    values = {}
    min_norm = None
    for g, ball in closed_balls.items():
        for x in ground.points:
            weights = {}
            for n in names:
                best = Fraction(0)
                for h in ball:
                    h_inv = w.inverse(h)
                    if h_inv is None:
                        continue
                    moved = table.get((h_inv, n))
                    if moved is None:
                        continue
                    y = act.apply(h_inv, x)
                    if y is None:
                        continue
                    d = spec.length(spec.multiply(spec.inverse(g), h))
                    term = k * weight(moved, y) - d
                    if term > best:
                        best = term
                if best > 0:
                    weights[n] = best
            total = sum(weights.values(), Fraction(0))
            if total == 0:
                continue
            if min_norm is None or total < min_norm:
                min_norm = total
            values[(g, x)] = L1Point({n: c / total for n, c in weights.items()})
    emap = EquivariantMap("diagonal", w, nerve(family, with_action=True), values, point_action=act)
    n_dim = family.family_dimension()
    cert = {
        "k": k,
        "min_norm": min_norm,
        "measured_constant": emap.measured_constant(),
        "displacement_bound": Fraction(3 * (n_dim + 1) ** 2, k),
        "domain_size": len(values),
    }
    return emap, cert


# ---------------------------------------------------------------------------
# structure checks


def zero_dim_structure_check(family: CoverFamily, alpha=None) -> Verdict:
    """Members restricted to the inner window are disjoint products of a
    group part and a point slice."""
    w = family.ground.window
    inner = set(w.inner_window(alpha)) if alpha is not None else set(w)
    restricted = []
    for name, s in family.members:
        rs = frozenset(p for p in s if p[0] in inner)
        restricted.append((name, rs))
    seen: set = set()
    for name, rs in restricted:
        clash = seen & rs
        if clash:
            p = next(iter(clash))
            return Verdict(False, witness={"member": name, "pair": family.ground.pair_to_str(p)})
        seen |= rs
    for name, rs in restricted:
        if not rs:
            continue
        gpart = frozenset(g for g, _ in rs)
        xpart = frozenset(x for _, x in rs)
        if len(gpart) * len(xpart) != len(rs):
            return Verdict(False, witness={"member": name, "reason": "not a product on the inner window"})
    return Verdict(True, checked=len(family.members))


def abelian_obstruction_check(family: CoverFamily, alpha, predicate: FamilyPredicate | str) -> Verdict:
    """Point-fixing small elements that keep meeting a member must stay
    inside the allowed family.

    For every point x, elements z in the identity ball at scale alpha
    that fix x and whose translate of a member through (1, x) still
    meets that member generate a subgroup tested against the predicate.
    """
    if isinstance(predicate, str):
        predicate = FamilyPredicate(predicate)
    ground = family.ground
    if ground.mode != "diagonal":
        raise PreconditionError("obstruction check needs a diagonal ground set")
    w = ground.window
    act = ground.model.action
    ident = w.identity
    ball = [z for z in w.ball_at_identity(alpha) if z != ident]
    checked = 0
    for x in ground.points:
        fixers = [z for z in ball if act.apply(z, x) == x]
        if not fixers:
            continue
        for name, s in family.members:
            if (ident, x) not in s:
                continue
            gens = []
            for z in fixers:
                image, _ = family.translate_member(z, name)
                if image & s:
                    gens.append(z)
            checked += 1
            if gens and not predicate.allows(w.spec, gens):
                return Verdict(
                    False,
                    witness={
                        "x": x,
                        "member": name,
                        "fixing_generators": [w.to_str(z) for z in gens],
                        "family": predicate.kind,
                    },
                    checked=checked,
                )
    return Verdict(True, checked=checked)


# ---------------------------------------------------------------------------
# combined path metric


def antidiagonal_path_metric(ground: GroundSet, scale, m: int, max_pairs: int = 600):
    """Shortest-path metric mixing fibre, base, and antidiagonal moves.

    Fibre edges cost scale times the point distance, base edges (same
    point, one generator step) cost max(m+1, scale times the diameter),
    and antidiagonal steps (gs, s^-1.x) cost 1.  The all-pairs closure
    of symmetric positive edge weights is a metric by construction.
    """
    scale = Fraction(scale)
    if scale <= 0:
        raise PreconditionError("scale must be positive")
    n = len(ground.pairs)
    if n > max_pairs:
        raise PreconditionError(f"{n} pairs exceeds the all-pairs budget {max_pairs}")
    pairs = list(ground.pairs)
    index = {p: i for i, p in enumerate(pairs)}
    INF = None
    dist = [[INF] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = Fraction(0)

    def relax(i, j, wgt):
        if dist[i][j] is None or wgt < dist[i][j]:
            dist[i][j] = wgt
            dist[j][i] = wgt

    space = ground.model.space
    w = ground.window
    spec = w.spec
    gens = [s for s in spec.generators() if s != spec.identity()]
    base_cost = max(Fraction(m + 1), scale * space.diameter())
    for g, x in pairs:
        i = index[(g, x)]
        for y in ground.points:
            if y != x:
                relax(i, index[(g, y)], scale * space.dist(x, y))
        for s in gens:
            gs = w.mult(g, s)
            if gs is None:
                continue
            relax(i, index[(gs, x)], base_cost)
            y = ground.model.action.apply(spec.inverse(s), x)
            if y is not None:
                relax(i, index[(gs, y)], Fraction(1))
    for k_ in range(n):
        dk = dist[k_]
        for i in range(n):
            dik = dist[i][k_]
            if dik is None:
                continue
            di = dist[i]
            for j in range(n):
                if dk[j] is None:
                    continue
                cand = dik + dk[j]
                if di[j] is None or cand < di[j]:
                    di[j] = cand
    labels = [ground.pair_to_str(p) for p in pairs]
    table = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                if dist[i][j] is None:
                    raise PreconditionError("pair graph is disconnected")
                table[(labels[i], labels[j])] = dist[i][j]
    from .spaces import FiniteMetricSpace

    return FiniteMetricSpace(labels, table, validate=False)
