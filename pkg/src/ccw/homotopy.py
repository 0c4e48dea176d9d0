"""Homotopy actions on finite models and approximate diagonal balls.

A homotopy action keeps one partial point map per window element plus,
for each composable pair (g, h) inside the window, a finite sequence of
stage maps starting at the composite map and ending at the map of the
product.  The family F_g collects the map of g together with every
stage of every homotopy whose product is g; approximate diagonal balls
(adb) expand a pair (g, x) through generator steps whose point moves
are witnessed by F-maps, in either direction.  Steps that would leave
the window, or whose point move no F-map can witness, are clip events:
checks that meet one report inconclusive rather than pass.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .covers import Verdict
from .errors import DomainError, PreconditionError
from .groups import FreeAbelianSpec, GroupWindow
from .spaces import (
    CompactificationModel,
    FiniteMetricSpace,
    PartialAction,
    make_interval_compactification,
)


def _compose(outer: Mapping, inner: Mapping) -> dict:
    return {x: outer[y] for x, y in inner.items() if y in outer}


class HomotopyActionModel:
    """Window, finite metric carrier, point maps, and homotopies."""

    def __init__(
        self,
        name: str,
        window: GroupWindow,
        space: FiniteMetricSpace,
        phi: Mapping,
        homotopies: Mapping,
    ):
        self.name = name
        self.window = window
        self.space = space
        self.carrier = space.points
        self.phi = PartialAction(window, self.carrier, phi)
        carrier_set = set(self.carrier)
        self.homotopies: dict = {}
        for (g, h), stages in homotopies.items():
            if g not in window or h not in window:
                raise PreconditionError("homotopy indexed outside the window")
            if window.mult(g, h) is None:
                raise PreconditionError("homotopy for a pair whose product leaves the window")
            stages = [dict(s) for s in stages]
            if not stages:
                raise PreconditionError("empty homotopy stage list")
            for s in stages:
                for x, y in s.items():
                    if x not in carrier_set or y not in carrier_set:
                        raise PreconditionError("homotopy stage leaves the carrier")
            self.homotopies[(g, h)] = stages
        self._families: dict | None = None
        self._reverse: dict | None = None

    # -- the F-families ---------------------------------------------------

    def families(self) -> dict:
        """F_g: the map of g and all stages of homotopies with product g."""
        if self._families is None:
            fam: dict = {g: [self.phi.maps[g]] for g in self.window}
            for (g, h), stages in self.homotopies.items():
                prod = self.window.mult(g, h)
                fam[prod].extend(stages)
            deduped = {}
            for g, maps in fam.items():
                seen = set()
                keep = []
                for m in maps:
                    key = frozenset(m.items())
                    if key not in seen:
                        seen.add(key)
                        keep.append(m)
                deduped[g] = keep
            self._families = deduped
        return self._families

    def _reverse_families(self) -> dict:
        if self._reverse is None:
            rev = {}
            for g, maps in self.families().items():
                per_g = []
                for m in maps:
                    r: dict = {}
                    for x, y in m.items():
                        r.setdefault(y, []).append(x)
                    per_g.append(r)
                rev[g] = per_g
            self._reverse = rev
        return self._reverse

    # -- validation -------------------------------------------------------

    def validate(self) -> Verdict:
        """Endpoint laws where defined: first stage against the composite
        map, last stage against the map of the product."""
        w = self.window
        checked = 0
        for (g, h), stages in self.homotopies.items():
            comp = _compose(self.phi.maps[g], self.phi.maps[h])
            prod_map = self.phi.maps[w.mult(g, h)]
            for x, y in stages[0].items():
                checked += 1
                if x in comp and comp[x] != y:
                    return Verdict(
                        False,
                        witness={
                            "pair": [w.to_str(g), w.to_str(h)],
                            "stage": 0,
                            "x": x,
                            "stage_value": y,
                            "composite_value": comp[x],
                        },
                        checked=checked,
                    )
            for x, y in stages[-1].items():
                checked += 1
                if x in prod_map and prod_map[x] != y:
                    return Verdict(
                        False,
                        witness={
                            "pair": [w.to_str(g), w.to_str(h)],
                            "stage": len(stages) - 1,
                            "x": x,
                            "stage_value": y,
                            "product_value": prod_map[x],
                        },
                        checked=checked,
                    )
        return Verdict(True, checked=checked)


def genuine_to_homotopy(model: CompactificationModel, name: str | None = None) -> HomotopyActionModel:
    """Wrap a partial genuine action as a homotopy action.

    Every composable window pair gets the two-stage homotopy (composite
    map, product map); for a genuine action these agree wherever both
    are defined.  Fails only when a generator map is empty or no
    composite of two generator maps is defined anywhere: with no
    length-two information the homotopy data would certify nothing.
    """
    w = model.window
    spec = w.spec
    gens = [s for s in spec.generators() if s != spec.identity()]
    for s in gens:
        if not model.action.maps[s]:
            raise DomainError(f"generator {w.to_str(s)} acts nowhere")
    core = 0
    for s in gens:
        for t in gens:
            st = w.mult(s, t)
            if st is None or spec.length(st) != 2:
                continue
            core += len(_compose(model.action.maps[s], model.action.maps[t]))
    if core == 0:
        raise DomainError("no composite of two generator maps is defined anywhere")
    homotopies = {}
    for g in w:
        for h in w:
            if w.mult(g, h) is None:
                continue
            comp = _compose(model.action.maps[g], model.action.maps[h])
            homotopies[(g, h)] = [comp, dict(model.action.maps[w.mult(g, h)])]
    return HomotopyActionModel(
        name or f"{model.name}-homotopy", w, model.space, model.action.maps, homotopies
    )


# ---------------------------------------------------------------------------
# approximate diagonal balls


def adb_levels(ham: HomotopyActionModel, seed: tuple, radius: int) -> tuple[list[frozenset], tuple]:
    """Cumulative expansions of the seed at step counts 0..radius.

    Returns the list of reached-pair sets by level and the clip events:
    group-slot window exits and generator steps no F-map witnesses.
    """
    if radius < 0:
        raise PreconditionError("radius must be >= 0")
    g0, x0 = seed
    if g0 not in ham.window or x0 not in set(ham.carrier):
        raise PreconditionError("seed outside the ground set")
    spec = ham.window.spec
    gens = [s for s in spec.generators() if s != spec.identity()]
    fams = ham.families()
    revs = ham._reverse_families()
    current = {seed}
    reached = {seed}
    levels = [frozenset(reached)]
    clips: list[dict] = []
    for _ in range(radius):
        nxt = set()
        for g, x in current:
            for s in gens:
                gs = ham.window.mult(g, s)
                if gs is None:
                    clips.append({"kind": "window-exit", "g": ham.window.to_str(g), "s": ham.window.to_str(s)})
                    continue
                s_inv = spec.inverse(s)
                hit = False
                for m in fams[s_inv]:
                    y = m.get(x)
                    if y is not None:
                        nxt.add((gs, y))
                        hit = True
                for r in revs[s]:
                    for y in r.get(x, ()):
                        nxt.add((gs, y))
                        hit = True
                if not hit:
                    clips.append(
                        {"kind": "undefined-step", "g": ham.window.to_str(g), "x": x, "s": ham.window.to_str(s)}
                    )
        reached |= nxt
        current = nxt
        levels.append(frozenset(reached))
    return levels, tuple(clips)


def adb(ham: HomotopyActionModel, seed: tuple, radius: int) -> dict:
    """Pairs reachable from the seed in at most ``radius`` generator
    steps, point moves witnessed by F-maps in either direction.

    A step clips when the group slot would leave the window or when no
    F-map witnesses any point move for that generator; the result then
    under-approximates the ambient ball and is flagged.
    """
    levels, clips = adb_levels(ham, seed, radius)
    return {"pairs": levels[-1], "clipped": bool(clips), "clips": clips[:16]}


def n_long_check(ham: HomotopyActionModel, n: int, seed_domain: Sequence | None = None) -> Verdict:
    """The window is long enough to expand every seed n steps unclipped.

    Seeds default to inner-window(n+1) centres, the largest region where
    an ambient n-step expansion provably stays inside the window; a clip
    means the model cannot certify the expansion, so the verdict is
    inconclusive, never a pass.
    """
    if n < 0:
        raise PreconditionError("n must be >= 0")
    seeds_g = tuple(seed_domain) if seed_domain is not None else ham.window.inner_window(n + 1)
    checked = 0
    for g in seeds_g:
        if g not in ham.window:
            raise PreconditionError("seed domain leaves the window")
        for x in ham.carrier:
            checked += 1
            out = adb(ham, (g, x), n)
            if out["clipped"]:
                return Verdict(
                    False,
                    witness={"g": ham.window.to_str(g), "x": x, "clip": dict(out["clips"][0])},
                    checked=checked,
                    inconclusive=True,
                )
    return Verdict(True, checked=checked)


def straighten(ham: HomotopyActionModel, pair: tuple):
    """(g, x) -> (g, g^-1.x) through the point map, or None if undefined."""
    g, x = pair
    g_inv = ham.window.inverse(g)
    if g_inv is None:
        return None
    y = ham.phi.apply(g_inv, x)
    if y is None:
        return None
    return (g, y)


def adb_modulus_probe(ham: HomotopyActionModel, epsilon) -> dict:
    """Largest candidate delta making every F-map (epsilon, delta)-uniform.

    Candidates are the realized group distances and the realized carrier
    distances; the smallest positive candidate always passes (points
    closer than it coincide), so the returned delta is positive.
    """
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise PreconditionError("epsilon must be >= 0")
    w = ham.window
    cand = set()
    for r in range(1, 2 * w.radius + 1):
        cand.add(Fraction(r))
    cand.update(v for v in ham.space.realized_distances() if v > 0)
    all_maps = [m for maps in ham.families().values() for m in maps]
    checked = 0
    best = None
    for delta in sorted(cand, reverse=True):
        ok = True
        for m in all_maps:
            dom = sorted(m)
            for i, x in enumerate(dom):
                for y in dom[i + 1 :]:
                    if ham.space.dist(x, y) < delta:
                        checked += 1
                        if ham.space.dist(m[x], m[y]) > epsilon:
                            ok = False
                            break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            best = delta
            break
    return {"delta": best, "epsilon": epsilon, "checked": checked}


# ---------------------------------------------------------------------------
# builders


def make_interval_homotopy_action(window: GroupWindow) -> HomotopyActionModel:
    """Totalized interval translations with walk homotopies.

    Translations past the ends absorb into the endpoints, so composites
    and products genuinely disagree after an absorb-return; the homotopy
    walks each disagreeing point one position at a time from the
    composite value to the product value, keeping both endpoint laws
    exact and making the intermediate stages nonconstant.
    """
    base = make_interval_compactification(window)
    R = window.radius
    order = list(base.space.points)
    pos = {x: i for i, x in enumerate(order)}

    def total_shift(shift: int) -> dict:
        m = {"-inf": "-inf", "+inf": "+inf"}
        for n in range(-R, R + 1):
            t = n + shift
            if t > R:
                m[str(n)] = "+inf"
            elif t < -R:
                m[str(n)] = "-inf"
            else:
                m[str(n)] = str(t)
        return m

    phi = {g: total_shift(g[0]) for g in window}
    homotopies = {}
    for g in window:
        for h in window:
            if window.mult(g, h) is None:
                continue
            comp = _compose(phi[g], phi[h])
            target = phi[window.mult(g, h)]
            gap = max(abs(pos[comp[x]] - pos[target[x]]) for x in order)
            stages = [comp]
            for t in range(1, gap + 1):
                stage = {}
                for x in order:
                    a, b = pos[comp[x]], pos[target[x]]
                    if a < b:
                        stage[x] = order[min(a + t, b)]
                    else:
                        stage[x] = order[max(a - t, b)]
                stages.append(stage)
            homotopies[(g, h)] = stages
    return HomotopyActionModel("interval-total", window, base.space, phi, homotopies)


def make_cycle_homotopy_action(window: GroupWindow, size: int) -> HomotopyActionModel:
    """Genuine rotations of a finite cycle, wrapped as a homotopy action."""
    from .spaces import make_cycle_model

    return genuine_to_homotopy(make_cycle_model(window, size), name="cycle-homotopy")
