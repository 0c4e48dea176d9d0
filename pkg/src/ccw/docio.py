"""Canonical JSON documents: serialization, content hashes, schema guards.

Every artifact is a UTF-8 JSON object with a ``schema`` field of the
form ``ccw/v1/<kind>``.  Serialization is canonical (sorted keys, no
whitespace, rationals in lowest terms with positive denominator), so
identical inputs always produce byte-identical files and content hashes
are meaningful.  Documents round-trip; certificates are one-way
artifacts and are sanitized with :func:`jsonable` instead.
"""

from __future__ import annotations

import hashlib
import json
import os
from fractions import Fraction
from typing import Mapping, Sequence

from .characterise import EquivariantMap
from .covers import CoverFamily, GroundSet, Verdict
from .errors import PreconditionError, SchemaError
from .groups import GroupSpec, GroupWindow, build_cayley_window
from .homotopy import HomotopyActionModel
from .refine import FiniteGroupAction
from .spaces import (
    CompactificationModel,
    FiniteMetricSpace,
    L1Point,
    PartialAction,
    SimplicialComplexModel,
)

SCHEMA_PREFIX = "ccw/v1/"


# ---------------------------------------------------------------------------
# primitives


def rat_str(v) -> str:
    f = Fraction(v)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def rat_parse(s) -> Fraction:
    try:
        return Fraction(s if isinstance(s, int) else str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {s!r}") from exc


def jsonable(v):
    """Recursively reduce package values to JSON-stable primitives."""
    if isinstance(v, Verdict):
        return jsonable(v.to_json())
    if isinstance(v, Fraction):
        return rat_str(v)
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (set, frozenset)):
        items = [jsonable(x) for x in v]
        items.sort(key=lambda t: json.dumps(t, sort_keys=True))
        return items
    return str(v)


def canonical_dumps(doc) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False) + "\n"


def sha256_of(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def doc_hash(doc) -> str:
    return sha256_of(canonical_dumps(doc))


def write_doc(path: str, doc) -> str:
    """Canonical write through a temp file; returns the content hash."""
    text = canonical_dumps(doc)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return sha256_of(text)


def expect_kind(doc, kind: str, where: str = "document") -> None:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: must be a JSON object")
    want = SCHEMA_PREFIX + kind
    got = doc.get("schema")
    if got != want:
        raise SchemaError(f"{where}: expected schema {want!r}, got {got!r}")


def read_doc(path: str, kind: str | None = None) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if kind is not None:
        expect_kind(doc, kind, where=path)
    elif not isinstance(doc, dict):
        raise SchemaError(f"{path}: must be a JSON object")
    return doc


# ---------------------------------------------------------------------------
# windows and spaces


def window_doc(window: GroupWindow) -> dict:
    return {"schema": "ccw/v1/window", "group": window.spec.to_json(),
            "radius": window.radius}


def load_window(doc) -> GroupWindow:
    expect_kind(doc, "window")
    try:
        spec = GroupSpec.from_json(doc["group"])
        radius = int(doc["radius"])
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad window document: {exc}") from exc
    return build_cayley_window(spec, radius)


def space_doc(space: FiniteMetricSpace) -> dict:
    pts = list(space.points)
    rows = []
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            rows.append([x, y, rat_str(space.dist(x, y))])
    return {"schema": "ccw/v1/space", "points": pts, "distances": rows}


def load_space(doc, validate: bool = True) -> FiniteMetricSpace:
    expect_kind(doc, "space")
    try:
        pts = [str(p) for p in doc["points"]]
        dist = {}
        for x, y, v in doc["distances"]:
            d = rat_parse(v)
            dist[(x, y)] = d
            dist[(y, x)] = d
        return FiniteMetricSpace(tuple(pts), dist, validate=validate)
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad space document: {exc}") from exc


def _action_rows(window: GroupWindow, maps: Mapping) -> list:
    rows = []
    for g in window.elements:
        rows.append({"g": window.to_str(g),
                     "maps": sorted([x, y] for x, y in maps[g].items())})
    rows.sort(key=lambda e: e["g"])
    return rows


def _rows_to_maps(window: GroupWindow, rows) -> dict:
    out = {}
    for entry in rows:
        g = window.from_str(entry["g"])
        out[g] = {x: y for x, y in entry["maps"]}
    return out


def model_doc(model: CompactificationModel) -> dict:
    return {
        "schema": "ccw/v1/model",
        "name": model.name,
        "window": window_doc(model.window),
        "space": space_doc(model.space),
        "boundary": sorted(model.boundary),
        "action": _action_rows(model.window, model.action.maps),
    }


def load_model(doc, validate: bool = True) -> CompactificationModel:
    expect_kind(doc, "model")
    window = load_window(doc.get("window"))
    space = load_space(doc.get("space"), validate=validate)
    try:
        maps = _rows_to_maps(window, doc["action"])
        action = PartialAction(window, space.points, maps)
        return CompactificationModel(str(doc["name"]), space,
                                     frozenset(doc["boundary"]), action, window)
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad model document: {exc}") from exc


# ---------------------------------------------------------------------------
# covers


def cover_doc(family: CoverFamily) -> dict:
    g = family.ground
    members = []
    for name, body in family.members:
        pairs = sorted([g.window.to_str(p[0]), p[1]] for p in body)
        members.append({"name": name, "pairs": pairs})
    doc = {
        "schema": "ccw/v1/cover",
        "mode": g.mode,
        "model": model_doc(g.model),
        "members": members,
    }
    if family.periods:
        doc["periods"] = {
            name: [g.window.to_str(h) for h in hs] for name, hs in family.periods.items()
        }
    return doc


def load_cover(doc, validate: bool = True) -> CoverFamily:
    expect_kind(doc, "cover")
    model = load_model(doc.get("model"), validate=validate)
    try:
        ground = GroundSet(model.window, model, str(doc["mode"]))
        members = []
        for entry in doc["members"]:
            body = frozenset((ground.window.from_str(gs), x) for gs, x in entry["pairs"])
            members.append((str(entry["name"]), body))
        periods = {
            name: tuple(ground.window.from_str(s) for s in hs)
            for name, hs in doc.get("periods", {}).items()
        }
        return CoverFamily(ground, members, periods or None)
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad cover document: {exc}") from exc


# ---------------------------------------------------------------------------
# complexes and equivariant maps


def complex_doc(K: SimplicialComplexModel) -> dict:
    if any(not isinstance(v, str) for v in K.vertices):
        raise SchemaError("only string-vertex complexes serialize")
    doc = {
        "schema": "ccw/v1/complex",
        "vertices": list(K.vertices),
        "maximal": sorted(sorted(m) for m in K.maximal()),
        "window": None,
        "action": None,
    }
    if K.action is not None:
        doc["window"] = window_doc(K.action.window)
        doc["action"] = _action_rows(K.action.window, K.action.maps)
    return doc


def load_complex(doc) -> SimplicialComplexModel:
    expect_kind(doc, "complex")
    try:
        vertices = [str(v) for v in doc["vertices"]]
        maximal = [frozenset(m) for m in doc["maximal"]]
        action = None
        if doc.get("action") is not None:
            window = load_window(doc.get("window"))
            action = PartialAction(window, vertices, _rows_to_maps(window, doc["action"]))
        return SimplicialComplexModel(vertices, maximal, action)
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad complex document: {exc}") from exc


def eqmap_doc(phi: EquivariantMap) -> dict:
    rows = []
    for (g, x), v in phi.values.items():
        coords = {str(k): rat_str(c) for k, c in v.coords.items()}
        rows.append([phi.window.to_str(g), x, coords])
    rows.sort(key=lambda r: (r[0], r[1]))
    doc = {
        "schema": "ccw/v1/eqmap",
        "mode": phi.mode,
        "window": window_doc(phi.window),
        "target": complex_doc(phi.target),
        "values": rows,
        "point_action": None,
    }
    if phi.point_action is not None:
        doc["point_action"] = {
            "carrier": list(phi.point_action.carrier),
            "maps": _action_rows(phi.point_action.window, phi.point_action.maps),
        }
    return doc


def load_eqmap(doc) -> EquivariantMap:
    expect_kind(doc, "eqmap")
    window = load_window(doc.get("window"))
    target = load_complex(doc.get("target"))
    try:
        values = {}
        for gs, x, coords in doc["values"]:
            pt = L1Point({k: rat_parse(c) for k, c in coords.items()})
            values[(window.from_str(gs), x)] = pt
        point_action = None
        if doc.get("point_action") is not None:
            pa = doc["point_action"]
            point_action = PartialAction(window, [str(c) for c in pa["carrier"]],
                                         _rows_to_maps(window, pa["maps"]))
        return EquivariantMap(str(doc["mode"]), window, target, values,
                              point_action=point_action)
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad eqmap document: {exc}") from exc


# ---------------------------------------------------------------------------
# homotopy actions


def ham_doc(ham: HomotopyActionModel) -> dict:
    w = ham.window
    hom_rows = []
    for (g, h), stages in ham.homotopies.items():
        hom_rows.append({
            "g": w.to_str(g),
            "h": w.to_str(h),
            "stages": [sorted([x, y] for x, y in s.items()) for s in stages],
        })
    hom_rows.sort(key=lambda e: (e["g"], e["h"]))
    return {
        "schema": "ccw/v1/homotopy-action",
        "name": ham.name,
        "window": window_doc(w),
        "space": space_doc(ham.space),
        "phi": _action_rows(w, ham.phi.maps),
        "homotopies": hom_rows,
    }


def load_ham(doc, validate: bool = True) -> HomotopyActionModel:
    expect_kind(doc, "homotopy-action")
    window = load_window(doc.get("window"))
    space = load_space(doc.get("space"), validate=validate)
    try:
        phi = _rows_to_maps(window, doc["phi"])
        homotopies = {}
        for entry in doc["homotopies"]:
            g = window.from_str(entry["g"])
            h = window.from_str(entry["h"])
            homotopies[(g, h)] = [{x: y for x, y in s} for s in entry["stages"]]
        return HomotopyActionModel(str(doc["name"]), window, space, phi, homotopies)
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad homotopy-action document: {exc}") from exc


# ---------------------------------------------------------------------------
# finite group actions and plain space covers


def group_action_doc(action: FiniteGroupAction) -> dict:
    rows = []
    for h in action.elements():
        rows.append({"g": int(h), "maps": sorted([x, y] for x, y in action.maps[h].items())})
    return {
        "schema": "ccw/v1/group-action",
        "group": action.spec.to_json(),
        "space": space_doc(action.space),
        "maps": rows,
    }


def load_group_action(doc) -> FiniteGroupAction:
    expect_kind(doc, "group-action")
    try:
        spec = GroupSpec.from_json(doc["group"])
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad group-action document: {exc}") from exc
    if spec.kind != "finite":
        raise SchemaError("group-action documents need a finite group")
    space = load_space(doc.get("space"))
    try:
        maps = {int(e["g"]): {x: y for x, y in e["maps"]} for e in doc["maps"]}
        return FiniteGroupAction(spec, space, maps)
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise SchemaError(f"bad group-action document: {exc}") from exc


def space_cover_doc(space: FiniteMetricSpace, members: Sequence[tuple]) -> dict:
    return {
        "schema": "ccw/v1/space-cover",
        "space": space_doc(space),
        "members": [{"name": str(n), "points": sorted(m)} for n, m in members],
    }


def load_space_cover(doc) -> tuple[FiniteMetricSpace, list]:
    expect_kind(doc, "space-cover")
    space = load_space(doc.get("space"))
    try:
        members = [(str(e["name"]), frozenset(str(p) for p in e["points"]))
                   for e in doc["members"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad space-cover document: {exc}") from exc
    pall = set(space.points)
    for name, m in members:
        if not m <= pall:
            raise SchemaError(f"space-cover member {name!r} leaves the space")
    return space, members


# ---------------------------------------------------------------------------
# certificates


def verdict_word(v: Verdict) -> str:
    if v.inconclusive:
        return "inconclusive"
    return "pass" if v.passed else "fail"


def worst_word(words) -> str:
    words = list(words)
    if "fail" in words:
        return "fail"
    if "inconclusive" in words:
        return "inconclusive"
    return "pass"


def exit_code(word: str) -> int:
    return {"pass": 0, "fail": 2, "inconclusive": 3}[word]


def collect_verdicts(obj) -> list[Verdict]:
    if isinstance(obj, Verdict):
        return [obj]
    if isinstance(obj, dict):
        return [v for x in obj.values() for v in collect_verdicts(x)]
    if isinstance(obj, (list, tuple)):
        return [v for x in obj for v in collect_verdicts(x)]
    return []


def certificate_doc(kind: str, word: str, detail, params: Mapping,
                    inputs: Mapping, outputs: Mapping | None = None) -> dict:
    if word not in ("pass", "fail", "inconclusive"):
        raise PreconditionError(f"bad verdict word {word!r}")
    return {
        "schema": "ccw/v1/certificate",
        "kind": kind,
        "verdict": word,
        "detail": jsonable(detail),
        "manifest": {
            "params": jsonable(dict(params)),
            "inputs": jsonable(dict(inputs)),
            "outputs": jsonable(dict(outputs or {})),
        },
    }
