"""Command-line interface: generate, check, lift, transform, curvature, complete-cube, export.

Exit codes: 0 when every residual gate passes, 1 when a gate fails (the
diagnostics name the worst item), 2 for usage, file or schema errors.
Reports are JSON on stdout; errors are JSON on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..binet import box_planes, check_principal
from ..consistency import complete_polar_cube, random_polar_cube
from ..constructors import (
    PROFILES,
    DegenerateDataError,
    family_circular_conical,
    generate_orthogonal,
    generate_principal,
    perturb_vertex,
    revolution_binet,
)
from ..binet import grid_binet
from ..curvature import curvature_table
from ..lifts import LiftError, canonical_anchors, laguerre_lift, lie_lift, moebius_lift, transform_binet
from .documents import BinetDocument, CubeDocument, SchemaError, _fmt, read_document, write_document, dumps
from .objmesh import export_obj

FAMILIES = (
    ["grid", "principal", "orthogonal", "perturbed"]
    + sorted(PROFILES)
    + ["cc-grid", "cc-cylinder", "cc-sphere", "cc-cone", "cube"]
)


class UsageError(Exception):
    pass


def _emit(obj, stream=None):
    (stream or sys.stdout).write(_fmt(obj) + "\n")


def _fail(message, **extra):
    _emit({"error": message, **extra}, sys.stderr)


def _load_binet_doc(path):
    doc = read_document(path)
    if not isinstance(doc, BinetDocument):
        raise UsageError(f"{path} holds cube data, not a binet")
    return doc


def _write_or_print(doc, out):
    if out:
        write_document(doc, out)
    else:
        sys.stdout.write(dumps(doc))


# ---------------------------------------------------------------------------
# subcommands


def generate(args):
    m, n = args.size if len(args.size) == 2 else (args.size[0], args.size[0])
    fam, seed = args.family, args.seed
    meta = {"generator": fam, "seed": seed, "size": [m, n]}
    extra = {}
    if fam == "cube":
        doc = CubeDocument(random_polar_cube(seed).hidden(), meta)
        _write_or_print(doc, args.out)
        return 0
    if fam == "grid":
        b = grid_binet(m, n)
    elif fam == "principal":
        b = generate_principal(seed, m, n, args.noise)
    elif fam == "orthogonal":
        b = generate_orthogonal(seed, m, n, args.noise)
    elif fam == "perturbed":
        b = perturb_vertex(generate_principal(seed, m, n, args.noise), seed, args.magnitude)
    elif fam in PROFILES:
        b = revolution_binet(PROFILES[fam](m, n))
    else:
        cc = family_circular_conical(fam[3:], m, n)
        b = cc.binet
        extra["planes"] = (cc.bistar.vertex, cc.bistar.face)
    _write_or_print(BinetDocument.from_binet(b, meta, **extra), args.out)
    return 0


def check(args):
    doc = _load_binet_doc(args.document)
    rep = check_principal(doc.binet(), args.tol)
    out = {"passed": bool(rep.passed), "conjugate": rep.conjugate.summary(), "orthogonal": rep.orthogonal.summary()}
    _emit(out)
    return 0 if rep.passed else 1


def _anchors(args, b):
    r0, s0 = canonical_anchors(b)
    return (r0 if args.anchor_rho is None else args.anchor_rho, s0 if args.anchor_sigma is None else args.anchor_sigma)


def lift(args):
    doc = _load_binet_doc(args.document)
    b = doc.binet()
    rho0, sigma0 = _anchors(args, b)
    res = {}
    try:
        if args.which in ("moebius", "lie"):
            ml = moebius_lift(b, rho0, tol=args.tol)
            doc.rho = (ml.rho.vertex, ml.rho.face)
            res["moebius_polarity"] = ml.polarity.summary()
        if args.which in ("laguerre", "lie"):
            planes = box_planes(b, args.tol)
            ll = laguerre_lift(planes, sigma0, tol=args.tol)
            doc.sigma = (ll.sigma.vertex, ll.sigma.face)
            doc.planes = (planes.vertex, planes.face)
            res["laguerre_polarity"] = ll.polarity.summary()
        if args.which == "lie":
            lie = lie_lift(b, rho0, sigma0, args.tol)
            res["line_polarity"] = lie.polarity.summary()
            res["lines_meet"] = lie.meets.summary()
    except (LiftError, ValueError) as exc:
        _fail(str(exc), worst=repr(getattr(exc, "worst", None)), residual=getattr(exc, "residual", None))
        return 1
    doc.metadata = dict(doc.metadata, lift=args.which, anchor_rho=rho0, anchor_sigma=sigma0, residuals=res)
    _write_or_print(doc, args.out)
    return 0


def transform(args):
    doc = _load_binet_doc(args.document)
    b = doc.binet()
    rho0, sigma0 = _anchors(args, b)
    try:
        t = transform_binet(b, args.form, args.seed, args.magnitude, rho0, sigma0, args.tol)
    except (LiftError, ValueError) as exc:
        _fail(str(exc), worst=repr(getattr(exc, "worst", None)))
        return 1
    meta = dict(doc.metadata, transform=args.form, seed=args.seed, magnitude=args.magnitude, matrix=t.transform.matrix)
    out = BinetDocument.from_binet(t.binet, meta, planes=(t.bistar.vertex, t.bistar.face))
    _write_or_print(out, args.out)
    return 0


def curvature(args):
    doc = _load_binet_doc(args.document)
    b = doc.binet()
    rho0, sigma0 = _anchors(args, b)
    try:
        lie = lie_lift(b, rho0, sigma0, args.tol)
    except (LiftError, ValueError) as exc:
        _fail(str(exc), worst=repr(getattr(exc, "worst", None)))
        return 1
    rows = curvature_table(b, lie.moebius, lie.lines, args.tol)
    table = []
    for r in rows:
        row = {"edge": [repr(c) for c in r["edge"]]}
        row.update({k: v for k, v in r.items() if k != "edge"})
        table.append(row)
    _emit({"anchor_rho": rho0, "anchor_sigma": sigma0, "edges": table})
    return 0


def complete_cube(args):
    doc = read_document(args.document)
    if not isinstance(doc, CubeDocument):
        raise UsageError(f"{args.document} is not cube data")
    try:
        done = complete_polar_cube(doc.cube, args.tol)
    except (DegenerateDataError, ValueError) as exc:
        _fail(str(exc))
        return 1
    _write_or_print(CubeDocument(done, dict(doc.metadata, completed=True)), args.out)
    return 0 if done.residuals["max_polarity"] <= args.tol else 1


def export(args):
    doc = _load_binet_doc(args.document)
    if not args.out:
        raise UsageError("export needs --out")
    export_obj(doc.binet(), args.out, args.edges, args.dual_edges, args.split)
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="binets", description="Construct, check, lift and transform principal binets.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol=1e-9):
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--out", default=None)

    g = sub.add_parser("generate", help="write a generated binet or cube document")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--size", type=int, nargs="+", default=[8, 8])
    g.add_argument("--noise", type=float, default=0.1)
    g.add_argument("--magnitude", type=float, default=1e-3, help="vertex displacement for the perturbed family")
    common(g)
    g.set_defaults(run=generate)

    c = sub.add_parser("check", help="principal check with exit code 0/1")
    c.add_argument("document")
    common(c)
    c.set_defaults(run=check)

    for name, fn, extra in (("lift", lift, True), ("transform", transform, False), ("curvature", curvature, False)):
        sp = sub.add_parser(name)
        sp.add_argument("document")
        sp.add_argument("--anchor-rho", type=float, default=None)
        sp.add_argument("--anchor-sigma", type=float, default=None)
        common(sp)
        if extra:
            sp.add_argument("--which", choices=["moebius", "laguerre", "lie"], default="lie")
        sp.set_defaults(run=fn)
        if name == "transform":
            sp.add_argument("--form", choices=["moebius", "laguerre", "lie"], default="lie")
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--magnitude", type=float, default=0.3)

    cc = sub.add_parser("complete-cube", help="complete polar cube data in RP^4")
    cc.add_argument("document")
    common(cc)
    cc.set_defaults(run=complete_cube)

    e = sub.add_parser("export", help="write an OBJ mesh")
    e.add_argument("document")
    e.add_argument("--edges", action="store_true")
    e.add_argument("--dual-edges", action="store_true")
    e.add_argument("--split", action="store_true")
    common(e)
    e.set_defaults(run=export)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "size", None) is not None and len(args.size) not in (1, 2):
        parser.error("--size takes one or two integers")
    try:
        return args.run(args)
    except (SchemaError, UsageError, OSError) as exc:
        _fail(str(exc), path=getattr(exc, "path", None))
        return 2


if __name__ == "__main__":
    sys.exit(main())
