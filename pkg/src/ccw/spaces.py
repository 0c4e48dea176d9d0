"""Finite metric models of spaces, partial window actions, complexes.

Spaces are finite point sets with exact rational metrics.  Group windows
act partially: every map carries its explicit domain, and nothing is
ever clipped into a total map.  Compactification models split points
into interior and boundary; the two builders here are an interval
compactification for Z-windows and a depth-truncated tree with its
boundary for free-group windows, plus a finite cyclic quotient used when
a total genuine action is wanted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DomainError, PreconditionError
from .groups import FreeAbelianSpec, FreeGroupSpec, GroupWindow, free_reduce


class FiniteMetricSpace:
    """Finite point set with an exact rational metric.

    Point order is the construction order and is kept for canonical
    serialization.  ``validate=True`` checks all metric axioms including
    the triangle inequality exhaustively (exact rational comparisons);
    builders whose metrics are metrics by construction (injective line
    embeddings, common-prefix ultrametrics) may skip the cubic check.
    """

    def __init__(self, points: Sequence[str], distances: Mapping, validate: bool = True):
        if len(set(points)) != len(points):
            raise PreconditionError("duplicate point labels")
        self.points = tuple(points)
        self._dist: dict[tuple[str, str], Fraction] = {}
        for x in self.points:
            for y in self.points:
                if x == y:
                    continue
                d = distances.get((x, y))
                if d is None:
                    raise PreconditionError(f"missing distance ({x},{y})")
                self._dist[(x, y)] = Fraction(d)
        if validate:
            self._validate()
        self._realized: tuple[Fraction, ...] | None = None

    def _validate(self):
        for (x, y), d in self._dist.items():
            if d <= 0:
                raise PreconditionError(f"non-positive distance d({x},{y}) = {d}")
            if d != self._dist[(y, x)]:
                raise PreconditionError(f"asymmetric distance at ({x},{y})")
        pts = self.points
        for x in pts:
            for y in pts:
                if x == y:
                    continue
                dxy = self._dist[(x, y)]
                for z in pts:
                    if z == x or z == y:
                        continue
                    if dxy > self._dist[(x, z)] + self._dist[(z, y)]:
                        raise PreconditionError(f"triangle inequality fails at ({x},{z},{y})")

    def dist(self, x: str, y: str) -> Fraction:
        if x == y:
            return Fraction(0)
        return self._dist[(x, y)]

    def realized_distances(self) -> tuple[Fraction, ...]:
        """Sorted positive distances actually attained, plus 0."""
        if self._realized is None:
            vals = {Fraction(0)}
            vals.update(self._dist.values())
            self._realized = tuple(sorted(vals))
        return self._realized

    def diameter(self) -> Fraction:
        return self.realized_distances()[-1]

    def ball(self, x: str, r) -> frozenset:
        """Open metric ball {y : d(x, y) < r}."""
        r = Fraction(r)
        return frozenset(y for y in self.points if self.dist(x, y) < r)

    def __len__(self):
        return len(self.points)

    def __contains__(self, x):
        return x in set(self.points)


class PartialAction:
    """Window-indexed partial maps on a finite carrier.

    ``maps[g]`` is a dict sending carrier elements to carrier elements;
    absent keys are undefined applications.  The identity must act as
    the identity on the whole carrier.
    """

    def __init__(self, window: GroupWindow, carrier: Sequence, maps: Mapping):
        self.window = window
        self.carrier = tuple(carrier)
        carrier_set = set(self.carrier)
        self.maps: dict = {}
        for g in window:
            m = maps.get(g, {})
            for x, y in m.items():
                if x not in carrier_set or y not in carrier_set:
                    raise PreconditionError(f"action map of {window.to_str(g)} leaves the carrier")
            self.maps[g] = dict(m)
        ident = self.maps.get(window.identity, {})
        if any(y != x for x, y in ident.items()):
            raise PreconditionError("identity must act as the identity")
        self.maps[window.identity] = {x: x for x in self.carrier}

    def apply(self, g, x):
        """g.x, or None when undefined."""
        return self.maps[g].get(x)

    def defined(self, g, x) -> bool:
        return x in self.maps[g]

    def domain(self, g) -> frozenset:
        return frozenset(self.maps[g])

    def is_total(self, g) -> bool:
        return len(self.maps[g]) == len(self.carrier)

    def apply_set(self, g, xs: Iterable):
        """Image of a subset, or None if g is undefined on part of it."""
        out = set()
        m = self.maps[g]
        for x in xs:
            y = m.get(x)
            if y is None:
                return None
            out.add(y)
        return out

    def validate(self) -> dict:
        """Exhaustive identity/compatibility check.

        Compatibility: (gh).x == g.(h.x) whenever all three applications
        are defined.  Returns a report with the first witness on failure.
        """
        w = self.window
        for g in w:
            for h in w:
                gh = w.mult(g, h)
                if gh is None:
                    continue
                mg, mh, mgh = self.maps[g], self.maps[h], self.maps[gh]
                for x, hx in mh.items():
                    ghx = mg.get(hx)
                    direct = mgh.get(x)
                    if ghx is not None and direct is not None and ghx != direct:
                        return {
                            "ok": False,
                            "witness": {
                                "g": w.to_str(g),
                                "h": w.to_str(h),
                                "x": x,
                                "g_hx": ghx,
                                "gh_x": direct,
                            },
                        }
        return {"ok": True, "witness": None}

    def isometry_report(self, space: FiniteMetricSpace) -> dict:
        """Check d(gx, gy) = d(x, y) wherever both images exist."""
        for g in self.window:
            m = self.maps[g]
            dom = sorted(m)
            for i, x in enumerate(dom):
                for y in dom[i + 1 :]:
                    if space.dist(m[x], m[y]) != space.dist(x, y):
                        return {
                            "isometric": False,
                            "witness": {"g": self.window.to_str(g), "x": x, "y": y},
                        }
        return {"isometric": True, "witness": None}


@dataclass
class CompactificationModel:
    """A finite space with a boundary subset and a partial window action."""

    name: str
    space: FiniteMetricSpace
    boundary: frozenset
    action: PartialAction
    window: GroupWindow

    def __post_init__(self):
        if not self.boundary <= set(self.space.points):
            raise PreconditionError("boundary must be a subset of the points")

    @property
    def interior(self) -> tuple:
        return tuple(x for x in self.space.points if x not in self.boundary)

    def partition_report(self) -> dict:
        """Whether defined applications preserve the interior/boundary split.

        The truncated tree model genuinely moves boundary words into the
        interior (d-step truncation), so this is reported, not enforced.
        """
        for g in self.action.window:
            for x, y in self.action.maps[g].items():
                if (x in self.boundary) != (y in self.boundary):
                    return {
                        "preserved": False,
                        "witness": {"g": self.window.to_str(g), "x": x, "y": y},
                    }
        return {"preserved": True, "witness": None}


# ---------------------------------------------------------------------------
# model builders


def make_interval_compactification(window: GroupWindow) -> CompactificationModel:
    """Two-ended compactified integer interval for a Z-window.

    Points are -inf, -R..R, +inf with the metric pulled back through the
    order embedding n -> n/(1+|n|) (endpoints to -1/+1); the embedding is
    injective, so |f(x)-f(y)| is a metric without further checking.
    Window elements translate where the result stays in -R..R and fix
    both ends; everything else is undefined.
    """
    if not isinstance(window.spec, FreeAbelianSpec) or window.spec.rank != 1:
        raise PreconditionError("interval model needs a rank-1 free-abelian window")
    R = window.radius
    labels = ["-inf"] + [str(n) for n in range(-R, R + 1)] + ["+inf"]

    def embed(lbl: str) -> Fraction:
        if lbl == "-inf":
            return Fraction(-1)
        if lbl == "+inf":
            return Fraction(1)
        n = int(lbl)
        return Fraction(n, 1 + abs(n))

    dist = {}
    for x in labels:
        for y in labels:
            if x != y:
                dist[(x, y)] = abs(embed(x) - embed(y))
    space = FiniteMetricSpace(labels, dist, validate=False)

    maps = {}
    for g in window:
        shift = g[0]
        m = {"-inf": "-inf", "+inf": "+inf"}
        for n in range(-R, R + 1):
            if -R <= n + shift <= R:
                m[str(n)] = str(n + shift)
        maps[g] = m
    action = PartialAction(window, labels, maps)
    return CompactificationModel("interval", space, frozenset({"-inf", "+inf"}), action, window)


def make_tree_boundary_model(window: GroupWindow, depth: int) -> CompactificationModel:
    """Depth-truncated tree for a free-group window.

    Points are reduced words of length <= depth; words of length exactly
    ``depth`` form the boundary (cylinder representatives).  The metric
    is 2^-(common prefix length), an ultrametric by the prefix structure.
    The window acts by left multiplication then reduction, defined when
    the result has length <= depth.
    """
    if not isinstance(window.spec, FreeGroupSpec):
        raise PreconditionError("tree model needs a free-group window")
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    spec = window.spec
    words = [""]
    frontier = [""]
    letters = [s for s in spec.generators() if s]
    for _ in range(depth):
        nxt = []
        for w in frontier:
            for s in letters:
                u = spec.multiply(w, s)
                if len(u) == len(w) + 1:
                    nxt.append(u)
        words.extend(nxt)
        frontier = nxt
    words = sorted(set(words), key=lambda u: (len(u), u))

    def common_prefix(x: str, y: str) -> int:
        n = 0
        for a, b in zip(x, y):
            if a != b:
                break
            n += 1
        return n

    dist = {}
    for x in words:
        for y in words:
            if x != y:
                dist[(x, y)] = Fraction(1, 2 ** common_prefix(x, y))
    space = FiniteMetricSpace(words, dist, validate=False)

    maps = {}
    for g in window:
        m = {}
        for x in words:
            y = spec.multiply(g, x)
            if len(y) <= depth:
                m[x] = y
        maps[g] = m
    action = PartialAction(window, words, maps)
    boundary = frozenset(w for w in words if len(w) == depth)
    return CompactificationModel("tree", space, boundary, action, window)


def make_cycle_model(window: GroupWindow, size: int) -> CompactificationModel:
    """Finite cyclic quotient of the line: a total genuine Z-action.

    Rotation by the window element g is defined everywhere and satisfies
    the group laws exactly, which makes this the model of choice when an
    honest (un-clipped) action is required.  The boundary is empty.
    """
    if not isinstance(window.spec, FreeAbelianSpec) or window.spec.rank != 1:
        raise PreconditionError("cycle model needs a rank-1 free-abelian window")
    if size < 3:
        raise PreconditionError("cycle size must be >= 3")
    labels = [str(i) for i in range(size)]
    dist = {}
    for i in range(size):
        for j in range(size):
            if i != j:
                k = abs(i - j)
                dist[(labels[i], labels[j])] = Fraction(min(k, size - k))
    space = FiniteMetricSpace(labels, dist, validate=False)
    maps = {}
    for g in window:
        shift = g[0] % size
        maps[g] = {str(i): str((i + shift) % size) for i in range(size)}
    action = PartialAction(window, labels, maps)
    return CompactificationModel("cycle", space, frozenset(), action, window)


def make_discrete_model(
    window: GroupWindow,
    labels: Sequence[str],
    boundary: Iterable[str] = (),
    permutation: Mapping[str, str] | None = None,
) -> CompactificationModel:
    """Discrete space (all distances 1) with a trivial or cyclic action.

    With ``permutation`` given (a single permutation p of the labels),
    the Z-window element g acts by p**g, which is total and genuine.
    Without it every window element acts as the identity.
    """
    labels = list(labels)
    dist = {(x, y): Fraction(1) for x in labels for y in labels if x != y}
    space = FiniteMetricSpace(labels, dist, validate=False)
    maps = {}
    if permutation is None:
        for g in window:
            maps[g] = {x: x for x in labels}
    else:
        if not isinstance(window.spec, FreeAbelianSpec) or window.spec.rank != 1:
            raise PreconditionError("permutation action needs a rank-1 free-abelian window")
        perm = dict(permutation)
        if sorted(perm) != sorted(labels) or sorted(perm.values()) != sorted(labels):
            raise PreconditionError("permutation must be a bijection of the labels")
        inv = {v: k for k, v in perm.items()}
        for g in window:
            n = g[0]
            m = {x: x for x in labels}
            step = perm if n >= 0 else inv
            for _ in range(abs(n)):
                m = {x: step[y] for x, y in m.items()}
            maps[g] = m
    action = PartialAction(window, labels, maps)
    return CompactificationModel("discrete", space, frozenset(boundary), action, window)


# ---------------------------------------------------------------------------
# simplicial complexes


class SimplicialComplexModel:
    """Finite abstract simplicial complex with an optional vertex action.

    Simplices are nonempty frozensets of vertices, stored downward
    closed.  The action, when present, is a partial window action on the
    vertex set that maps simplices to simplices where fully defined.
    """

    def __init__(
        self,
        vertices: Sequence,
        maximal_simplices: Iterable[Iterable],
        action: PartialAction | None = None,
    ):
        self.vertices = tuple(vertices)
        vset = set(self.vertices)
        simplices: set[frozenset] = set()
        for m in maximal_simplices:
            fs = frozenset(m)
            if not fs or not fs <= vset:
                raise PreconditionError(f"bad maximal simplex {sorted(map(str, m))}")
            simplices.update(_faces(fs))
        for v in self.vertices:
            simplices.add(frozenset([v]))
        self.simplices = frozenset(simplices)
        self.action = action
        if action is not None and tuple(action.carrier) != self.vertices:
            raise PreconditionError("action carrier must be the vertex list")

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1 if self.simplices else -1

    def contains(self, candidate: Iterable) -> bool:
        return frozenset(candidate) in self.simplices

    def maximal(self) -> list[frozenset]:
        out = []
        for s in self.simplices:
            if not any(s < t for t in self.simplices):
                out.append(s)
        return sorted(out, key=lambda s: (len(s), sorted(map(str, s))))

    def act_simplex(self, g, simplex: frozenset):
        """Image of a simplex under g, or None if partially undefined."""
        if self.action is None:
            raise PreconditionError("complex has no action")
        image = self.action.apply_set(g, simplex)
        if image is None:
            return None
        fs = frozenset(image)
        if fs not in self.simplices:
            return None
        return fs

    def action_report(self) -> dict:
        """Verify the action maps simplices to simplices where defined."""
        if self.action is None:
            return {"ok": True, "witness": None, "note": "no action"}
        for g in self.action.window:
            for s in self.simplices:
                image = self.action.apply_set(g, s)
                if image is not None and frozenset(image) not in self.simplices:
                    return {
                        "ok": False,
                        "witness": {"g": self.action.window.to_str(g), "simplex": sorted(map(str, s))},
                    }
        return {"ok": True, "witness": None}

    def vertex_stabilizer(self, v) -> list:
        if self.action is None:
            return []
        return [g for g in self.action.window if self.action.apply(g, v) == v]

    def simplex_stabilizer(self, s: frozenset) -> list:
        """Window elements fixing the simplex setwise (fully defined only)."""
        if self.action is None:
            return []
        out = []
        for g in self.action.window:
            image = self.action.apply_set(g, s)
            if image is not None and frozenset(image) == s:
                out.append(g)
        return out


def _faces(s: frozenset):
    items = sorted(s, key=str)
    n = len(items)
    for mask in range(1, 1 << n):
        yield frozenset(items[i] for i in range(n) if mask >> i & 1)


def barycentric_subdivision(K: SimplicialComplexModel) -> SimplicialComplexModel:
    """Subdivision SK: vertices are simplices of K, simplices are chains.

    The cardinality of a K-simplex grades the SK-vertex; two SK-vertices
    of equal grade are never adjacent (chains are totally ordered by
    strict inclusion), and the induced action sends the vertex s to the
    vertex g.s where fully defined.
    """
    sk_vertices = sorted(K.simplices, key=lambda s: (len(s), sorted(map(str, s))))
    maximal_chains = []
    for top in K.maximal():
        maximal_chains.extend(_chains_ending_at(top, K))
    action = None
    if K.action is not None:
        maps = {}
        for g in K.action.window:
            m = {}
            for s in sk_vertices:
                image = K.act_simplex(g, s)
                if image is not None:
                    m[s] = image
            maps[g] = m
        action = PartialAction(K.action.window, sk_vertices, maps)
    return SimplicialComplexModel(sk_vertices, maximal_chains, action)


def _chains_ending_at(top: frozenset, K: SimplicialComplexModel) -> list[frozenset]:
    """All maximal chains of faces of ``top`` ending at ``top``."""
    if len(top) == 1:
        return [frozenset([top])]
    out = []
    for sub in _faces(top):
        if len(sub) == len(top) - 1:
            for chain in _chains_ending_at(sub, K):
                out.append(chain | {top})
    return out


def grade(sk_vertex: frozenset) -> int:
    """Cardinality grade of a subdivision vertex."""
    return len(sk_vertex)


# ---------------------------------------------------------------------------
# l1 points


class L1Point:
    """Sparse nonnegative rational vector over complex vertices."""

    __slots__ = ("coords",)

    def __init__(self, coords: Mapping):
        clean = {}
        for v, c in coords.items():
            c = Fraction(c)
            if c < 0:
                raise PreconditionError(f"negative coordinate at {v}")
            if c:
                clean[v] = c
        self.coords = clean

    def norm(self) -> Fraction:
        return sum(self.coords.values(), Fraction(0))

    def support(self) -> frozenset:
        return frozenset(self.coords)

    def dist(self, other: "L1Point") -> Fraction:
        keys = set(self.coords) | set(other.coords)
        z = Fraction(0)
        return sum((abs(self.coords.get(v, z) - other.coords.get(v, z)) for v in keys), z)

    def normalized(self) -> "L1Point":
        n = self.norm()
        if n == 0:
            raise PreconditionError("cannot normalize the zero vector")
        return L1Point({v: c / n for v, c in self.coords.items()})

    def relabel(self, mapping: Callable) -> "L1Point":
        """Push forward along an injective vertex map."""
        out = {}
        for v, c in self.coords.items():
            w = mapping(v)
            if w in out:
                raise PreconditionError("relabeling is not injective on the support")
            out[w] = c
        return L1Point(out)

    def validate_on(self, K: SimplicialComplexModel):
        if self.coords and not K.contains(self.support()):
            raise PreconditionError("support does not span a simplex")

    def __eq__(self, other):
        return isinstance(other, L1Point) and self.coords == other.coords

    def __hash__(self):
        return hash(frozenset(self.coords.items()))

    def __repr__(self):
        inner = ", ".join(f"{v}: {c}" for v, c in sorted(self.coords.items(), key=lambda kv: str(kv[0])))
        return f"L1Point({{{inner}}})"


def subdivide_point(p: L1Point, K: SimplicialComplexModel) -> L1Point:
    """Barycentric re-coordinates of a point of K as a point of SK.

    Coordinates are sorted descending (ties broken by vertex label); the
    chain of prefix sets receives weights (i+1)(t_i - t_{i+1}).  Mass is
    preserved exactly.
    """
    p.validate_on(K)
    if not p.coords:
        return L1Point({})
    items = sorted(p.coords.items(), key=lambda kv: (-kv[1], str(kv[0])))
    out = {}
    prefix: list = []
    for i, (v, t) in enumerate(items):
        prefix.append(v)
        t_next = items[i + 1][1] if i + 1 < len(items) else Fraction(0)
        weight = (i + 1) * (t - t_next)
        if weight:
            out[frozenset(prefix)] = weight
    return L1Point(out)
