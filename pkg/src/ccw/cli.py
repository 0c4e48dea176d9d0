"""Command line front end: generate, check, convert, report.

Exit codes: 0 a passing check, 2 a mathematical failure (witness in the
certificate), 3 inconclusive (clipped windows or insufficient domain),
4 malformed documents or parameters.  Every check and convert writes a
certificate whether or not it passes.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from fractions import Fraction

from . import docio
from .boundary import (
    BoundaryCover,
    assemble_full_cover,
    boundary_epsilon,
    extend_boundary_cover,
    proper_interior_cover,
)
from .characterise import (
    EquivariantMap,
    cover_to_map,
    cover_to_multiplicity_cover,
    map_to_disjoint_families,
    map_to_point_map,
    multiplicity_to_lebesgue_cover,
    partition_lU,
    point_map_to_map,
    zero_dim_structure_check,
)
from .covers import CoverFamily, GroundSet, Verdict
from .errors import CcwError, PreconditionError, SchemaError
from .groups import PREDICATE_KINDS, FreeAbelianSpec, FreeGroupSpec, build_cayley_window
from .homotopy import genuine_to_homotopy, make_interval_homotopy_action
from .refine import equivariant_lift, min_dim_refinement, quotient_space
from .spaces import (
    L1Point,
    make_cycle_model,
    make_discrete_model,
    make_interval_compactification,
    make_tree_boundary_model,
)


class _Parser(argparse.ArgumentParser):
    """Bad arguments are schema problems (exit 4), not argparse's exit 2."""

    def error(self, message):
        raise SchemaError(message)


# ---------------------------------------------------------------------------
# generate


def _emit(out_dir: str, written: dict) -> int:
    for role in sorted(written):
        print(f"{role} {written[role]}")
    return 0


def _cmd_generate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    path = lambda name: os.path.join(args.out, name)
    written: dict = {}
    if args.kind == "interval":
        window = build_cayley_window(FreeAbelianSpec(1), args.R)
        model = make_interval_compactification(window)
        written["window"] = docio.write_doc(path("window.json"), docio.window_doc(window))
        written["space"] = docio.write_doc(path("space.json"), docio.space_doc(model.space))
        written["model"] = docio.write_doc(path("model.json"), docio.model_doc(model))
    elif args.kind == "cycle":
        window = build_cayley_window(FreeAbelianSpec(1), args.R)
        model = make_cycle_model(window, args.size)
        written["window"] = docio.write_doc(path("window.json"), docio.window_doc(window))
        written["space"] = docio.write_doc(path("space.json"), docio.space_doc(model.space))
        written["model"] = docio.write_doc(path("model.json"), docio.model_doc(model))
    elif args.kind == "tree":
        window = build_cayley_window(FreeGroupSpec(args.k), args.depth)
        model = make_tree_boundary_model(window, args.depth)
        written["window"] = docio.write_doc(path("window.json"), docio.window_doc(window))
        written["space"] = docio.write_doc(path("space.json"), docio.space_doc(model.space))
        written["model"] = docio.write_doc(path("model.json"), docio.model_doc(model))
    elif args.kind == "interval-action":
        window = build_cayley_window(FreeAbelianSpec(1), args.R)
        ham = make_interval_homotopy_action(window)
        written["action"] = docio.write_doc(path("action.json"), docio.ham_doc(ham))
    elif args.kind == "brick-cover":
        written = _generate_brick_cover(args, path)
    elif args.kind == "random-cover":
        written = _generate_random_cover(args, path)
    else:
        raise SchemaError(f"unknown generate kind {args.kind!r}")
    return _emit(args.out, written)


def _generate_brick_cover(args, path) -> dict:
    L, layers = args.L, args.layers
    if L < 1 or layers < 1 or L % layers:
        raise PreconditionError("need L >= 1 and layers dividing L")
    radius = args.R if args.R is not None else 2 * L
    window = build_cayley_window(FreeAbelianSpec(1), radius)
    if args.carrier == "cycle":
        model = make_cycle_model(window, args.size)
    else:
        model = make_interval_compactification(window)
    ground = GroundSet(window, model, "diagonal")
    pts = model.space.points
    members = []
    offs = L // layers
    for j in range(layers):
        start = j * offs
        t = -((radius + start) // L + 1)
        while True:
            s = start + t * L
            if s > radius:
                break
            block = range(max(s, -radius), min(s + L - 1, radius) + 1)
            if len(block):
                body = frozenset(((i,), x) for i in block for x in pts)
                members.append((f"brick[{j},{s}]", body))
            t += 1
    family = CoverFamily(ground, members)
    return {
        "model": docio.write_doc(path("model.json"), docio.model_doc(model)),
        "cover": docio.write_doc(path("cover.json"), docio.cover_doc(family)),
    }


def _generate_random_cover(args, path) -> dict:
    if args.points < 1 or args.members < 1:
        raise PreconditionError("need at least one point and one member")
    rng = random.Random(args.seed)
    window = build_cayley_window(FreeAbelianSpec(1), args.R)
    labels = [f"p{i}" for i in range(args.points)]
    model = make_discrete_model(window, labels)
    ground = GroundSet(window, model, "diagonal")
    shuffled = list(labels)
    rng.shuffle(shuffled)
    k = min(args.members, len(labels))
    cuts = sorted(rng.sample(range(1, len(labels)), k - 1)) if k > 1 else []
    fibres = []
    prev = 0
    for c in cuts + [len(labels)]:
        fibres.append(shuffled[prev:c])
        prev = c
    members = [
        (f"U{i}", frozenset((g, x) for g in window for x in fibre))
        for i, fibre in enumerate(fibres)
    ]
    family = CoverFamily(ground, members)
    return {
        "model": docio.write_doc(path("model.json"), docio.model_doc(model)),
        "cover": docio.write_doc(path("cover.json"), docio.cover_doc(family)),
    }


# ---------------------------------------------------------------------------
# check


def _finish(op: str, word: str, detail, params, inputs, outputs, cert_path) -> int:
    cert = docio.certificate_doc(op, word, detail, params, inputs, outputs)
    docio.write_doc(cert_path, cert)
    print(f"{op}: {word.upper()} ({cert_path})")
    return docio.exit_code(word)


def _cmd_check(args) -> int:
    doc = docio.read_doc(args.cover, "cover")
    family = docio.load_cover(doc)
    params: dict = {}
    if args.what == "lebesgue":
        alpha = docio.rat_parse(args.alpha)
        params["alpha"] = alpha
        verdict = family.lebesgue_check(alpha)
        detail: dict = {"result": verdict}
    elif args.what == "coverage":
        verdict = family.coverage_check()
        detail = {"result": verdict}
    elif args.what == "f-subset":
        params["family"] = args.family
        verdict = family.f_subset_check(args.family)
        detail = {"result": verdict, "dimension": family.family_dimension()}
    elif args.what == "disjoint":
        params["r"] = args.r
        verdict = family.r_disjointness_check(args.r)
        detail = {"result": verdict}
    elif args.what == "multiplicity":
        d = docio.rat_parse(args.d)
        params.update({"d": d, "max": args.max})
        found = family.g_multiplicity(d)
        ok = found["value"] <= args.max
        verdict = Verdict(ok, witness=None if ok else found["witness"], checked=1,
                          notes=(f"multiplicity {found['value']}",))
        detail = {"result": verdict, "multiplicity": found}
    elif args.what == "zero-dim":
        alpha = docio.rat_parse(args.alpha) if args.alpha is not None else None
        if alpha is not None:
            params["alpha"] = alpha
        verdict = zero_dim_structure_check(family, alpha)
        detail = {"result": verdict}
    else:
        raise SchemaError(f"unknown check {args.what!r}")
    word = docio.verdict_word(verdict)
    cert_path = args.cert or f"{args.what}.cert.json"
    return _finish(f"check-{args.what}", word, detail, params,
                   {"cover": docio.doc_hash(doc)}, {}, cert_path)


# ---------------------------------------------------------------------------
# convert


def _load_family(path: str) -> tuple[dict, CoverFamily]:
    doc = docio.read_doc(path, "cover")
    return doc, docio.load_cover(doc)


def _conv_cover_to_map(args) -> int:
    doc, family = _load_family(args.cover)
    ham = genuine_to_homotopy(family.ground.model)
    phi, cert = cover_to_map(ham, family, args.k)
    out_hash = docio.write_doc(args.out, docio.eqmap_doc(phi))
    n = family.family_dimension()
    detail = dict(cert)
    detail["dimension"] = n
    detail["bound"] = Fraction(3 * (n + 1), args.k + 1)
    detail["bound_ok"] = cert["measured_constant"] <= detail["bound"]
    word = docio.verdict_word(cert["verdict"])
    if word == "pass" and not detail["bound_ok"]:
        word = "fail"
    return _finish("convert-cover-to-map", word, detail, {"k": args.k},
                   {"cover": docio.doc_hash(doc)}, {"map": out_hash},
                   args.cert or "cover-to-map.cert.json")


def _conv_map_to_families(args) -> int:
    mdoc = docio.read_doc(args.map, "eqmap")
    phi = docio.load_eqmap(mdoc)
    cdoc, family = _load_family(args.cover)
    ground = family.ground
    if args.action:
        ham = docio.load_ham(docio.read_doc(args.action, "homotopy-action"))
    else:
        ham = genuine_to_homotopy(ground.model)
    res = map_to_disjoint_families(phi, ham, ground, args.r, args.n)
    os.makedirs(args.out, exist_ok=True)
    outputs = {}
    for grade, fam in res["families"]:
        p = os.path.join(args.out, f"family-grade{grade}.json")
        outputs[f"family-grade{grade}"] = docio.write_doc(p, docio.cover_doc(fam))
    detail = {k: v for k, v in res.items() if k != "families"}
    detail["grades"] = sorted(g for g, _ in res["families"])
    words = [docio.verdict_word(v) for v in docio.collect_verdicts(detail)]
    words.append("pass" if res["covers_domain"] else "fail")
    word = docio.worst_word(words)
    inputs = {"map": docio.doc_hash(mdoc), "cover": docio.doc_hash(cdoc)}
    return _finish("convert-map-to-families", word, detail,
                   {"r": args.r, "n": args.n}, inputs, outputs,
                   args.cert or "map-to-families.cert.json")


def _push_point(target, g, v):
    if target.action is None:
        return None
    out: dict = {}
    for vtx, c in v.coords.items():
        u = target.action.apply(g, vtx)
        if u is None:
            return None
        out[u] = out.get(u, Fraction(0)) + c
    return L1Point(out)


def _spread_from_slot(phi: EquivariantMap, psi: dict) -> EquivariantMap:
    """Largest map generated by the identity slot through the available actions."""
    if phi.mode == "translation":
        return point_map_to_map(phi.window, phi.target, psi, mode="translation",
                                point_action=phi.point_action)
    values = {}
    for g in phi.window:
        for y, v in psi.items():
            x = phi.point_action.apply(g, y)
            if x is None:
                continue
            if g == phi.window.identity:
                values[(g, x)] = v
                continue
            pushed = _push_point(phi.target, g, v)
            if pushed is not None:
                values[(g, x)] = pushed
    return EquivariantMap("diagonal", phi.window, phi.target, values,
                          point_action=phi.point_action)


def _conv_phi_psi(args) -> int:
    """Spread the identity slot psi(x) = phi(1, x) back out to a map.

    The verdict is idempotence: spreading the spread's own identity slot
    reproduces it table for table.  Whether the input map itself equals
    its spread is reported as ``faithful`` (maps whose values off the
    identity are richer than their slot, such as distance-discounted
    partitions over clipped windows, are honestly unfaithful).
    """
    mdoc = docio.read_doc(args.map, "eqmap")
    phi = docio.load_eqmap(mdoc)
    psi = map_to_point_map(phi)
    once = _spread_from_slot(phi, psi)
    twice = _spread_from_slot(once, map_to_point_map(once))
    out_doc = docio.eqmap_doc(once)
    out_hash = docio.write_doc(args.out, out_doc)
    h_in = docio.doc_hash({"values": mdoc["values"]})
    h_once = docio.doc_hash({"values": out_doc["values"]})
    h_twice = docio.doc_hash({"values": docio.eqmap_doc(twice)["values"]})
    detail = {
        "table_hash_in": h_in,
        "table_hash_out": h_once,
        "table_hash_again": h_twice,
        "idempotent": h_once == h_twice,
        "faithful": h_in == h_once,
        "points": len(psi),
    }
    return _finish("convert-phi-psi", "pass" if detail["idempotent"] else "fail",
                   detail, {}, {"map": docio.doc_hash(mdoc)}, {"map": out_hash},
                   args.cert or "phi-psi.cert.json")


def _conv_cover_to_mult(args) -> int:
    doc, family = _load_family(args.cover)
    d = docio.rat_parse(args.d)
    shrunk, cert = cover_to_multiplicity_cover(family, d)
    out_hash = docio.write_doc(args.out, docio.cover_doc(shrunk))
    words = [docio.verdict_word(v) for v in docio.collect_verdicts(cert)]
    words.append("pass" if cert["multiplicity_ok"] else "fail")
    return _finish("convert-cover-to-mult", docio.worst_word(words), cert, {"d": d},
                   {"cover": docio.doc_hash(doc)}, {"cover": out_hash},
                   args.cert or "cover-to-mult.cert.json")


def _conv_mult_to_cover(args) -> int:
    doc, family = _load_family(args.cover)
    alpha = docio.rat_parse(args.alpha)
    padded, cert = multiplicity_to_lebesgue_cover(family, alpha)
    out_hash = docio.write_doc(args.out, docio.cover_doc(padded))
    word = docio.verdict_word(cert["lebesgue"])
    return _finish("convert-mult-to-cover", word, cert, {"alpha": alpha},
                   {"cover": docio.doc_hash(doc)}, {"cover": out_hash},
                   args.cert or "mult-to-cover.cert.json")


def _conv_partition_lu(args) -> int:
    doc, family = _load_family(args.cover)
    phi, cert = partition_lU(family, args.k)
    out_hash = docio.write_doc(args.out, docio.eqmap_doc(phi))
    detail = dict(cert)
    detail["norm"] = phi.norm_check()
    detail["equivariance"] = phi.equivariance_check()
    words = [docio.verdict_word(v) for v in docio.collect_verdicts(detail)]
    return _finish("convert-partition-lu", docio.worst_word(words), detail,
                   {"k": args.k}, {"cover": docio.doc_hash(doc)}, {"map": out_hash},
                   args.cert or "partition-lu.cert.json")


def _conv_boundary_extend(args) -> int:
    doc, family = _load_family(args.cover)
    bc = BoundaryCover(family)
    eps = boundary_epsilon(bc)
    extended, ext_cert = extend_boundary_cover(bc, eps)
    inputs = {"cover": docio.doc_hash(doc)}
    if args.interior:
        idoc, interior = _load_family(args.interior)
        inputs["interior"] = docio.doc_hash(idoc)
        int_cert: dict = {"source": "document"}
    else:
        interior, int_cert = proper_interior_cover(family.ground.model, "all")
    alpha = docio.rat_parse(args.alpha)
    assembled, asm_cert = assemble_full_cover(extended, interior, alpha)
    out_hash = docio.write_doc(args.out, docio.cover_doc(assembled))
    detail = {
        "epsilon": {x: eps.eps[x] for x in sorted(eps.eps)},
        "extension": ext_cert,
        "interior": int_cert,
        "assembly": asm_cert,
    }
    # the per-part Lebesgue attributions in the assembly certificate are
    # diagnostics; the verdict rides on the union-level claims
    words = [docio.verdict_word(v) for v in docio.collect_verdicts(ext_cert)]
    words += [docio.verdict_word(v) for v in docio.collect_verdicts(int_cert)]
    words.append(docio.verdict_word(asm_cert["coverage"]))
    words.append(docio.verdict_word(asm_cert["lebesgue"]))
    words.append("pass" if ext_cert["dimension_preserved"] else "fail")
    words.append("pass" if asm_cert["dimension"]["bound_ok"] else "fail")
    return _finish("convert-boundary-extend", docio.worst_word(words), detail,
                   {"alpha": alpha}, inputs, {"cover": out_hash},
                   args.cert or "boundary-extend.cert.json")


def _conv_refine_equivariant(args) -> int:
    adoc = docio.read_doc(args.action, "group-action")
    action = docio.load_group_action(adoc)
    cdoc = docio.read_doc(args.cover, "space-cover")
    space, members = docio.load_space_cover(cdoc)
    if docio.doc_hash(docio.space_doc(space)) != docio.doc_hash(docio.space_doc(action.space)):
        raise SchemaError("cover space differs from the action's space")
    quo = quotient_space(action)
    pushed = [(name, quo.push(m)) for name, m in members]
    refinement, report = min_dim_refinement(quo.space, pushed)
    lift, cert = equivariant_lift(quo, refinement, members,
                                  predicate=args.family)
    out_hash = docio.write_doc(args.out, docio.space_cover_doc(action.space, lift))
    detail = {
        "quotient_classes": len(quo.classes),
        "refinement": {"members": [[n, sorted(m)] for n, m in refinement],
                       "report": report},
        "lift": cert,
    }
    words = [docio.verdict_word(v) for v in docio.collect_verdicts(detail)]
    word = docio.worst_word(words)
    inputs = {"action": docio.doc_hash(adoc), "cover": docio.doc_hash(cdoc)}
    return _finish("convert-refine-equivariant", word, detail,
                   {"family": args.family or ""}, inputs, {"cover": out_hash},
                   args.cert or "refine-equivariant.cert.json")


_CONVERTERS = {
    "cover-to-map": _conv_cover_to_map,
    "map-to-families": _conv_map_to_families,
    "phi-psi": _conv_phi_psi,
    "cover-to-mult": _conv_cover_to_mult,
    "mult-to-cover": _conv_mult_to_cover,
    "partition-lu": _conv_partition_lu,
    "boundary-extend": _conv_boundary_extend,
    "refine-equivariant": _conv_refine_equivariant,
}


def _cmd_convert(args) -> int:
    return _CONVERTERS[args.direction](args)


# ---------------------------------------------------------------------------
# report


def _cmd_report(args) -> int:
    rows = []
    for p in args.certs:
        doc = docio.read_doc(p, "certificate")
        word = doc.get("verdict")
        if word not in ("pass", "fail", "inconclusive"):
            raise SchemaError(f"{p}: certificate has no usable verdict")
        rows.append({"kind": doc.get("kind"), "verdict": word,
                     "hash": docio.doc_hash(doc)})
        print(f"{doc.get('kind')}: {word.upper()}  {p}")
    overall = docio.worst_word(r["verdict"] for r in rows)
    print(f"overall: {overall.upper()}")
    if args.out:
        docio.write_doc(args.out, {"schema": "ccw/v1/report",
                                   "certificates": rows, "overall": overall})
    return docio.exit_code(overall)


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> _Parser:
    p = _Parser(prog="ccw", description="finite-window equivariant cover toolkit")
    sub = p.add_subparsers(dest="command")

    gen = sub.add_parser("generate", help="write model/cover documents")
    gsub = gen.add_subparsers(dest="kind")
    g_int = gsub.add_parser("interval")
    g_int.add_argument("--R", type=int, required=True)
    g_cyc = gsub.add_parser("cycle")
    g_cyc.add_argument("--R", type=int, required=True)
    g_cyc.add_argument("--size", type=int, required=True)
    g_tree = gsub.add_parser("tree")
    g_tree.add_argument("--k", type=int, required=True)
    g_tree.add_argument("--depth", type=int, required=True)
    g_act = gsub.add_parser("interval-action")
    g_act.add_argument("--R", type=int, required=True)
    g_brick = gsub.add_parser("brick-cover")
    g_brick.add_argument("--L", type=int, required=True)
    g_brick.add_argument("--layers", type=int, required=True)
    g_brick.add_argument("--R", type=int, default=None)
    g_brick.add_argument("--carrier", choices=("interval", "cycle"), default="interval")
    g_brick.add_argument("--size", type=int, default=6)
    g_rand = gsub.add_parser("random-cover")
    g_rand.add_argument("--R", type=int, required=True)
    g_rand.add_argument("--points", type=int, required=True)
    g_rand.add_argument("--members", type=int, required=True)
    g_rand.add_argument("--seed", type=int, required=True)
    for sp in (g_int, g_cyc, g_tree, g_act, g_brick, g_rand):
        sp.add_argument("--out", default=".")
    gen.set_defaults(func=_cmd_generate)

    chk = sub.add_parser("check", help="run a cover checker, write a certificate")
    csub = chk.add_subparsers(dest="what")
    c_leb = csub.add_parser("lebesgue")
    c_leb.add_argument("--alpha", required=True)
    c_cov = csub.add_parser("coverage")
    c_fs = csub.add_parser("f-subset")
    c_fs.add_argument("--family", choices=PREDICATE_KINDS, required=True)
    c_dis = csub.add_parser("disjoint")
    c_dis.add_argument("--r", type=int, required=True)
    c_mult = csub.add_parser("multiplicity")
    c_mult.add_argument("--d", required=True)
    c_mult.add_argument("--max", type=int, required=True)
    c_zd = csub.add_parser("zero-dim")
    c_zd.add_argument("--alpha", default=None)
    for sp in (c_leb, c_cov, c_fs, c_dis, c_mult, c_zd):
        sp.add_argument("--cover", required=True)
        sp.add_argument("--cert", default=None)
    chk.set_defaults(func=_cmd_check)

    cnv = sub.add_parser("convert", help="run a construction, write doc + certificate")
    vsub = cnv.add_subparsers(dest="direction")
    v_c2m = vsub.add_parser("cover-to-map")
    v_c2m.add_argument("--cover", required=True)
    v_c2m.add_argument("--k", type=int, required=True)
    v_m2f = vsub.add_parser("map-to-families")
    v_m2f.add_argument("--map", required=True)
    v_m2f.add_argument("--cover", required=True)
    v_m2f.add_argument("--r", type=int, required=True)
    v_m2f.add_argument("--n", type=int, required=True)
    v_m2f.add_argument("--action", default=None)
    v_pp = vsub.add_parser("phi-psi")
    v_pp.add_argument("--map", required=True)
    v_c2u = vsub.add_parser("cover-to-mult")
    v_c2u.add_argument("--cover", required=True)
    v_c2u.add_argument("--d", required=True)
    v_u2c = vsub.add_parser("mult-to-cover")
    v_u2c.add_argument("--cover", required=True)
    v_u2c.add_argument("--alpha", required=True)
    v_plu = vsub.add_parser("partition-lu")
    v_plu.add_argument("--cover", required=True)
    v_plu.add_argument("--k", type=int, required=True)
    v_bdy = vsub.add_parser("boundary-extend")
    v_bdy.add_argument("--cover", required=True)
    v_bdy.add_argument("--alpha", required=True)
    v_bdy.add_argument("--interior", default=None)
    v_ref = vsub.add_parser("refine-equivariant")
    v_ref.add_argument("--action", required=True)
    v_ref.add_argument("--cover", required=True)
    v_ref.add_argument("--family", choices=PREDICATE_KINDS, default=None)
    for sp in (v_c2m, v_m2f, v_pp, v_c2u, v_u2c, v_plu, v_bdy, v_ref):
        sp.add_argument("--out", required=True)
        sp.add_argument("--cert", default=None)
    cnv.set_defaults(func=_cmd_convert)

    rep = sub.add_parser("report", help="summarize certificates")
    rep.add_argument("certs", nargs="+")
    rep.add_argument("--out", default=None)
    rep.set_defaults(func=_cmd_report)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_usage(sys.stderr)
            return 4
        if args.func is _cmd_generate and not getattr(args, "kind", None):
            raise SchemaError("generate needs a kind")
        if args.func is _cmd_check and not getattr(args, "what", None):
            raise SchemaError("check needs a checker name")
        if args.func is _cmd_convert and not getattr(args, "direction", None):
            raise SchemaError("convert needs a direction")
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 4
    except CcwError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
