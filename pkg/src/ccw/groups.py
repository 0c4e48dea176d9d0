"""Finite windows of finitely generated groups with exact word metrics.

A window of radius R is the ball of word length <= R in the ambient
group, enumerated breadth-first from a symmetric generating set that
contains the identity.  Elements are canonical normal forms (coordinate
tuples for free-abelian groups, reduced words for free groups, table
indices for finite groups, component tuples for direct products), so
equality is string equality and the word metric is computed exactly in
the ambient group -- never approximated from the truncation.

Balls are open throughout: ball(g, alpha) = {h : d(g, h) < alpha}.
"""

from __future__ import annotations

import warnings
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError, SizeCapError

DEFAULT_WINDOW_CAP = 10**6

_FREE_LETTERS = "abcdefghijklmnopqrstuvwxyz"


class ClippedBallWarning(UserWarning):
    """A requested ball may exceed the window and has been clipped."""


class EmptyInnerWindowWarning(UserWarning):
    """inner_window was requested for a radius larger than the window allows."""


def _as_rational(alpha) -> Fraction:
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, int):
        return Fraction(alpha)
    if isinstance(alpha, str):
        return Fraction(alpha)
    raise PreconditionError(f"radius must be an int or rational, got {alpha!r}")


# ---------------------------------------------------------------------------
# group specs


class GroupSpec:
    """Ambient group interface: total multiplication, exact word length."""

    kind = "abstract"

    def identity(self):
        raise NotImplementedError

    def multiply(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    def length(self, a) -> int:
        """Word length w.r.t. this spec's canonical generating set."""
        raise NotImplementedError

    def generators(self) -> list:
        """Symmetric generator list including the identity."""
        raise NotImplementedError

    def element_to_str(self, a) -> str:
        raise NotImplementedError

    def element_from_str(self, s: str):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(doc: dict) -> "GroupSpec":
        kind = doc.get("kind")
        if kind == "free-abelian":
            return FreeAbelianSpec(doc["rank"])
        if kind == "free":
            return FreeGroupSpec(doc["rank"])
        if kind == "finite":
            return FiniteGroupSpec(doc["table"], doc["generators"])
        if kind == "product":
            return ProductSpec([GroupSpec.from_json(f) for f in doc["factors"]])
        raise PreconditionError(f"unknown group kind {kind!r}")


class FreeAbelianSpec(GroupSpec):
    """Z^n with generators +-e_i; elements are integer tuples."""

    kind = "free-abelian"

    def __init__(self, rank: int):
        if rank < 1:
            raise PreconditionError("free-abelian rank must be >= 1")
        self.rank = rank

    def identity(self):
        return (0,) * self.rank

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    def length(self, a) -> int:
        return sum(abs(x) for x in a)

    def generators(self):
        gens = [self.identity()]
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1
            gens.append(tuple(e))
            e2 = list(e)
            e2[i] = -1
            gens.append(tuple(e2))
        return gens

    def element_to_str(self, a) -> str:
        return ",".join(str(x) for x in a)

    def element_from_str(self, s: str):
        parts = s.split(",")
        if len(parts) != self.rank:
            raise PreconditionError(f"expected {self.rank} coordinates in {s!r}")
        return tuple(int(p) for p in parts)

    def to_json(self):
        return {"kind": self.kind, "rank": self.rank}


def free_reduce(word: str) -> str:
    """Cancel adjacent inverse pairs until the word is reduced."""
    out: list[str] = []
    for ch in word:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


class FreeGroupSpec(GroupSpec):
    """Free group F_k; elements are reduced words, capitals are inverses."""

    kind = "free"

    def __init__(self, rank: int):
        if not 1 <= rank <= len(_FREE_LETTERS):
            raise PreconditionError(f"free rank must be in 1..{len(_FREE_LETTERS)}")
        self.rank = rank
        self._letters = _FREE_LETTERS[:rank]
        self._alphabet = set(self._letters) | {c.upper() for c in self._letters}

    def identity(self):
        return ""

    def multiply(self, a, b):
        # a and b are reduced, so cancellation happens only at the seam.
        i = len(a)
        j = 0
        while i > 0 and j < len(b) and a[i - 1] == b[j].swapcase():
            i -= 1
            j += 1
        return a[:i] + b[j:]

    def inverse(self, a):
        return a[::-1].swapcase()

    def length(self, a) -> int:
        return len(a)

    def generators(self):
        gens = [""]
        for c in self._letters:
            gens.append(c)
            gens.append(c.upper())
        return gens

    def element_to_str(self, a) -> str:
        return a

    def element_from_str(self, s: str):
        if any(ch not in self._alphabet for ch in s):
            raise PreconditionError(f"letters of {s!r} outside rank-{self.rank} alphabet")
        if free_reduce(s) != s:
            raise PreconditionError(f"word {s!r} is not reduced")
        return s

    def to_json(self):
        return {"kind": self.kind, "rank": self.rank}


class FiniteGroupSpec(GroupSpec):
    """Finite group given by a multiplication table; elements are indices.

    The generator list must be symmetric (closed under inverse), include
    the identity, and generate the whole table.
    """

    kind = "finite"

    def __init__(self, table: Sequence[Sequence[int]], generators: Iterable[int]):
        self.table = tuple(tuple(row) for row in table)
        n = len(self.table)
        if any(len(row) != n for row in self.table):
            raise PreconditionError("multiplication table must be square")
        if any(not 0 <= v < n for row in self.table for v in row):
            raise PreconditionError("table entries must be element indices")
        self._identity = self._find_identity()
        self._inverses = self._find_inverses()
        if n <= 64:
            self._check_associativity()
        self.generator_indices = tuple(sorted(set(generators)))
        gset = set(self.generator_indices)
        if self._identity not in gset:
            raise PreconditionError("generator set must include the identity")
        for g in gset:
            if self._inverses[g] not in gset:
                raise PreconditionError(f"generator set not symmetric: missing inverse of {g}")
        self._lengths = self._bfs_lengths()
        if any(l is None for l in self._lengths):
            raise PreconditionError("generators do not generate the whole table")

    def _find_identity(self) -> int:
        for e in range(len(self.table)):
            if all(self.table[e][x] == x and self.table[x][e] == x for x in range(len(self.table))):
                return e
        raise PreconditionError("table has no identity element")

    def _find_inverses(self):
        n = len(self.table)
        inv = [None] * n
        for a in range(n):
            for b in range(n):
                if self.table[a][b] == self._identity and self.table[b][a] == self._identity:
                    inv[a] = b
                    break
            if inv[a] is None:
                raise PreconditionError(f"element {a} has no inverse")
        return tuple(inv)

    def _check_associativity(self):
        n = len(self.table)
        t = self.table
        for a in range(n):
            for b in range(n):
                ab = t[a][b]
                for c in range(n):
                    if t[ab][c] != t[a][t[b][c]]:
                        raise PreconditionError(f"table not associative at ({a},{b},{c})")

    def _bfs_lengths(self):
        n = len(self.table)
        lengths: list = [None] * n
        lengths[self._identity] = 0
        frontier = [self._identity]
        dist = 0
        while frontier:
            dist += 1
            nxt = []
            for g in frontier:
                for s in self.generator_indices:
                    h = self.table[g][s]
                    if lengths[h] is None:
                        lengths[h] = dist
                        nxt.append(h)
            frontier = nxt
        return tuple(lengths)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroupSpec":
        table = [[(i + j) % n for j in range(n)] for i in range(n)]
        return cls(table, [0, 1 % n, (n - 1) % n])

    @classmethod
    def from_permutations(cls, perms: Sequence[Sequence[int]]) -> "FiniteGroupSpec":
        """Close a list of permutations under composition and build the table.

        Generators of the spec are the given permutations, their inverses
        and the identity.
        """
        degree = len(perms[0])
        ident = tuple(range(degree))
        gens = {tuple(p) for p in perms}
        gens |= {_perm_inverse(p) for p in gens}
        gens.add(ident)
        elements = sorted(gens)
        frontier = list(elements)
        seen = set(elements)
        while frontier:
            nxt = []
            for p in frontier:
                for q in gens:
                    r = _perm_compose(p, q)
                    if r not in seen:
                        seen.add(r)
                        nxt.append(r)
            frontier = nxt
        ordered = sorted(seen)
        index = {p: i for i, p in enumerate(ordered)}
        table = [[index[_perm_compose(p, q)] for q in ordered] for p in ordered]
        return cls(table, [index[p] for p in gens])

    def identity(self):
        return self._identity

    def multiply(self, a, b):
        return self.table[a][b]

    def inverse(self, a):
        return self._inverses[a]

    def length(self, a) -> int:
        return self._lengths[a]

    def generators(self):
        return list(self.generator_indices)

    def element_to_str(self, a) -> str:
        return str(a)

    def element_from_str(self, s: str):
        v = int(s)
        if not 0 <= v < len(self.table):
            raise PreconditionError(f"element index {v} out of range")
        return v

    def to_json(self):
        return {
            "kind": self.kind,
            "table": [list(row) for row in self.table],
            "generators": list(self.generator_indices),
        }


def _perm_compose(p, q):
    """(p. q)(x) = p(q(x))"""
    return tuple(p[q[x]] for x in range(len(p)))


def _perm_inverse(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


class ProductSpec(GroupSpec):
    """Direct product; elements are tuples of factor elements.

    Word length is the sum over factors (generators act in one factor at
    a time).  Nested products are flattened so the serialized component
    separator stays unambiguous.
    """

    kind = "product"

    def __init__(self, factors: Sequence[GroupSpec]):
        flat: list[GroupSpec] = []
        for f in factors:
            if isinstance(f, ProductSpec):
                flat.extend(f.factors)
            else:
                flat.append(f)
        if len(flat) < 2:
            raise PreconditionError("product needs at least two factors")
        self.factors = tuple(flat)

    def identity(self):
        return tuple(f.identity() for f in self.factors)

    def multiply(self, a, b):
        return tuple(f.multiply(x, y) for f, x, y in zip(self.factors, a, b))

    def inverse(self, a):
        return tuple(f.inverse(x) for f, x in zip(self.factors, a))

    def length(self, a) -> int:
        return sum(f.length(x) for f, x in zip(self.factors, a))

    def generators(self):
        gens = [self.identity()]
        for i, f in enumerate(self.factors):
            for s in f.generators():
                if s == f.identity():
                    continue
                g = list(self.identity())
                g[i] = s
                gens.append(tuple(g))
        return gens

    def element_to_str(self, a) -> str:
        return "|".join(f.element_to_str(x) for f, x in zip(self.factors, a))

    def element_from_str(self, s: str):
        parts = s.split("|")
        if len(parts) != len(self.factors):
            raise PreconditionError(f"expected {len(self.factors)} components in {s!r}")
        return tuple(f.element_from_str(p) for f, p in zip(self.factors, parts))

    def to_json(self):
        return {"kind": self.kind, "factors": [f.to_json() for f in self.factors]}


# ---------------------------------------------------------------------------
# windows


class GroupWindow:
    """Radius-R ball of a group, with the word metric of the ambient group.

    Multiplication inside the window is partial: ``mult`` returns None
    when the true product falls outside the window.  Distances are always
    exact (computed in the ambient group).
    """

    def __init__(self, spec: GroupSpec, radius: int, elements: Sequence):
        self.spec = spec
        self.radius = radius
        key = lambda g: (spec.length(g), spec.element_to_str(g))
        self.elements = tuple(sorted(elements, key=key))
        self._members = frozenset(self.elements)
        self.identity = spec.identity()
        self._ball0_cache: dict[Fraction, tuple] = {}
        self._inner_cache: dict[Fraction, tuple] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g) -> bool:
        return g in self._members

    def __iter__(self):
        return iter(self.elements)

    def length(self, g) -> int:
        return self.spec.length(g)

    def mult(self, g, h):
        """Product if it stays in the window, else None."""
        p = self.spec.multiply(g, h)
        return p if p in self._members else None

    def inverse(self, g):
        return self.spec.inverse(g)

    def dist(self, g, h) -> int:
        """Word metric d(g, h) = |g^-1 h|, exact in the ambient group."""
        return self.spec.length(self.spec.multiply(self.spec.inverse(g), h))

    def ball_at_identity(self, alpha) -> tuple:
        """Open ball {h in window : |h| < alpha}, in canonical order."""
        alpha = _as_rational(alpha)
        cached = self._ball0_cache.get(alpha)
        if cached is None:
            cached = tuple(g for g in self.elements if self.spec.length(g) < alpha)
            self._ball0_cache[alpha] = cached
        return cached

    def ball(self, g, alpha) -> frozenset:
        """Open ball {h in window : d(g, h) < alpha}.

        Warns with ClippedBallWarning when the true ball may exceed the
        window, in which case the result is the in-window part only.
        Because balls are open, containment is guaranteed exactly for
        wordLength(g) + alpha <= R + 1 (the inner-window criterion).
        """
        alpha = _as_rational(alpha)
        if alpha <= 0:
            raise PreconditionError("ball radius must be positive")
        if g not in self._members:
            raise PreconditionError("ball center must lie in the window")
        if self.spec.length(g) + alpha > self.radius + 1:
            warnings.warn(
                f"ball(|g|={self.spec.length(g)}, alpha={alpha}) may exceed the "
                f"radius-{self.radius} window; result clipped to the window",
                ClippedBallWarning,
                stacklevel=2,
            )
        mul = self.spec.multiply
        out = []
        for h in self.ball_at_identity(alpha):
            p = mul(g, h)
            if p in self._members:
                out.append(p)
        return frozenset(out)

    def inner_window(self, alpha) -> tuple:
        """Elements g with wordLength(g) + alpha <= R + 1, canonical order.

        For every such g the full open ball B(g, alpha) lies inside the
        window.  alpha = R + 1 stands for the whole-window ("infinite")
        radius and leaves exactly the identity.
        """
        alpha = _as_rational(alpha)
        cached = self._inner_cache.get(alpha)
        if cached is not None:
            return cached
        bound = self.radius + 1 - alpha
        result = tuple(g for g in self.elements if self.spec.length(g) <= bound)
        if not result:
            warnings.warn(
                f"inner_window(alpha={alpha}) is empty for radius {self.radius}",
                EmptyInnerWindowWarning,
                stacklevel=2,
            )
        self._inner_cache[alpha] = result
        return result

    def alpha_is_infinite(self, alpha) -> bool:
        """Whether alpha means 'whole window' under the alpha = R+1 convention."""
        return _as_rational(alpha) >= self.radius + 1

    def to_str(self, g) -> str:
        return self.spec.element_to_str(g)

    def from_str(self, s: str):
        g = self.spec.element_from_str(s)
        if g not in self._members:
            raise PreconditionError(f"element {s!r} outside the window")
        return g

    def metadata(self, alpha=None) -> dict:
        """Window facts recorded in every certificate."""
        meta = {"kind": self.spec.kind, "radius": self.radius, "size": len(self.elements)}
        if alpha is not None:
            alpha = _as_rational(alpha)
            meta["alpha"] = str(alpha)
            meta["inner_radius_bound"] = str(self.radius + 1 - alpha)
            meta["alpha_is_infinite"] = self.alpha_is_infinite(alpha)
        return meta


def build_cayley_window(spec: GroupSpec, radius: int, cap: int = DEFAULT_WINDOW_CAP) -> GroupWindow:
    """Enumerate the radius-R ball breadth-first from the generating set.

    Raises SizeCapError when more than ``cap`` elements would be produced.
    """
    if radius < 0:
        raise PreconditionError("window radius must be >= 0")
    gens = [s for s in spec.generators() if s != spec.identity()]
    seen = {spec.identity()}
    frontier = [spec.identity()]
    for dist in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = spec.multiply(g, s)
                if h not in seen and spec.length(h) == dist:
                    seen.add(h)
                    if len(seen) > cap:
                        raise SizeCapError(
                            f"window of radius {radius} exceeds cap of {cap} elements"
                        )
                    nxt.append(h)
        frontier = nxt
    return GroupWindow(spec, radius, seen)


# ---------------------------------------------------------------------------
# subgroup classification for family predicates

PREDICATE_KINDS = ("trivial-only", "finite", "virtually-cyclic", "all")


def _torsion_free_factors(spec: GroupSpec):
    """(factors, component extractor) for the torsion-free part of spec."""
    if isinstance(spec, ProductSpec):
        idx = [i for i, f in enumerate(spec.factors) if not isinstance(f, FiniteGroupSpec)]
        factors = [spec.factors[i] for i in idx]
        return factors, lambda g: [g[i] for i in idx]
    if isinstance(spec, FiniteGroupSpec):
        return [], lambda g: []
    return [spec], lambda g: [g]


def _cyclic_core(word: str):
    """Split a reduced word as c * core * c^-1 with core cyclically reduced."""
    i, j = 0, len(word)
    while j - i >= 2 and word[i] == word[j - 1].swapcase():
        i += 1
        j -= 1
    return word[:i], word[i:j]


def _primitive_root(core: str) -> str:
    """Shortest period of a cyclically reduced word (powers cannot cancel)."""
    n = len(core)
    for ell in range(1, n + 1):
        if n % ell == 0 and core == core[:ell] * (n // ell):
            return core[:ell]
    return core


def _free_exponent(factor: FreeGroupSpec, words: list[str]):
    """Common-root exponents for pairwise-commuting reduced words.

    Returns a list of integers e_i with words[i] = c r^{e_i} c^-1 for a
    common primitive root r, or None if no common root exists (which
    cannot happen for genuinely commuting elements; treated defensively).
    """
    nontrivial = [w for w in words if w]
    if not nontrivial:
        return [0] * len(words)
    conj, core = _cyclic_core(nontrivial[0])
    root = _primitive_root(core)
    based = conj + root + factor.inverse(conj)
    exps = []
    for w in words:
        if not w:
            exps.append(0)
            continue
        e = _match_power(factor, based, w)
        if e is None:
            return None
        exps.append(e)
    return exps


def _match_power(factor: FreeGroupSpec, root: str, w: str):
    """Exponent e with root^e == w, else None."""
    _, core = _cyclic_core(root)
    _, wcore = _cyclic_core(w)
    if len(wcore) % len(core) != 0:
        return None
    e = len(wcore) // len(core)
    for sign in (1, -1):
        cand = factor.identity()
        step = root if sign > 0 else factor.inverse(root)
        for _ in range(e):
            cand = factor.multiply(cand, step)
        if cand == w:
            return sign * e
    return None


def _rational_rank(rows: list[list[Fraction]]) -> int:
    """Rank of an exact rational matrix by Gaussian elimination."""
    m = [list(r) for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot = None
        for r in range(rank, len(m)):
            if m[r][c] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][c]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / pv
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def subgroup_in_family(spec: GroupSpec, gens: Iterable, kind: str) -> bool:
    """Decide whether the subgroup generated by ``gens`` lies in the family.

    Exact for every supported group kind.  The virtually-cyclic test
    projects away finite factors (a finite kernel never changes the
    answer); the remaining torsion-free part is virtually cyclic iff it
    is abelian of rank <= 1, decided by pairwise commutation plus an
    integer rank computation (free-factor exponents via common roots).
    """
    if kind not in PREDICATE_KINDS:
        raise PreconditionError(f"unknown family kind {kind!r}")
    gens = list(gens)
    if kind == "all":
        return True
    if kind == "trivial-only":
        return all(g == spec.identity() for g in gens)

    factors, project = _torsion_free_factors(spec)
    comps = [project(g) for g in gens]

    if kind == "finite":
        # Finite iff the projection to every torsion-free factor is trivial.
        return all(
            c == f.identity() for comp in comps for f, c in zip(factors, comp)
        )

    # virtually-cyclic
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            for f, a, b in zip(factors, comps[i], comps[j]):
                if f.multiply(a, b) != f.multiply(b, a):
                    return False
    columns: list[list[Fraction]] = [[] for _ in gens]
    for fi, f in enumerate(factors):
        parts = [comp[fi] for comp in comps]
        if isinstance(f, FreeAbelianSpec):
            for gi, p in enumerate(parts):
                columns[gi].extend(Fraction(x) for x in p)
        elif isinstance(f, FreeGroupSpec):
            exps = _free_exponent(f, parts)
            if exps is None:
                return False
            for gi, e in enumerate(exps):
                columns[gi].append(Fraction(e))
        else:  # pragma: no cover - torsion-free factors only
            raise PreconditionError(f"unsupported factor kind {f.kind!r}")
    if not columns or not columns[0]:
        return True
    return _rational_rank(columns) <= 1


def predicate_is_virtually_closed(kind: str) -> bool:
    """Whether the family is closed under finite-index overgroups."""
    if kind not in PREDICATE_KINDS:
        raise PreconditionError(f"unknown family kind {kind!r}")
    return kind in ("finite", "virtually-cyclic", "all")
