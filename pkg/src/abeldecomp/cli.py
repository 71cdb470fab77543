"""Command-line front end.

Exit codes: 0 success, 1 verification failure or other error, 2 degenerate
form or zero image, 3 parse error, 4 sublattice not stable, 5 no solution.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

import mpmath

from . import decompose as dc
from . import latalg, serialize
from .errors import (
    AbelDecompError,
    DegenerateForm,
    DegenerateRank,
    NoSolution,
    NoSolutionFound,
    NotStable,
    NotSymplectic,
    ParseError,
    ZeroImage,
)
from .gaction import (
    N_STARTS,
    SEED,
    RestrictedRep,
    SymplecticRep,
    fixed_riemann,
    restrict_action,
    subgroup_idempotent,
)
from .numerics import DEFAULT_PRECISION
from .pav import PolarizationType, PolarizedAV
from .subvariety import SubvarietyEmbedding, embedding_from_basis, image_lattice, induced_polarization, subvariety_period

log = logging.getLogger("abeldecomp")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_DEGENERATE = 2
EXIT_PARSE = 3
EXIT_NOT_STABLE = 4
EXIT_NO_SOLUTION = 5


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, (DegenerateForm, ZeroImage, DegenerateRank)):
        return EXIT_DEGENERATE
    if isinstance(exc, (NotStable, NotSymplectic)):
        return EXIT_NOT_STABLE
    if isinstance(exc, (NoSolution, NoSolutionFound)):
        return EXIT_NO_SOLUTION
    return EXIT_FAIL


def _read(path, kind, args):
    obj = serialize.read_json(path, precision=args.precision)
    if kind is not None and not isinstance(obj, kind):
        raise ParseError(f"{path}: expected a {kind.__name__} document, got {type(obj).__name__}")
    return obj


def _emit(args, obj, kind=None, text: str | None = None) -> None:
    """Write ``obj`` to ``--output`` (atomically) and/or stdout."""
    if args.output:
        serialize.write_json(args.output, obj, kind)
        log.info("wrote %s", args.output)
    if args.json:
        print(serialize.dump(obj, kind))
    elif text is not None:
        print(text)
    elif not args.output:
        print(serialize.dump(obj, kind))


def _fmt_matrix(M) -> str:
    return "[" + "; ".join(", ".join(_fmt(x) for x in row) for row in M) + "]"


def _fmt(x) -> str:
    if isinstance(x, (mpmath.mpc, mpmath.mpf)):
        return mpmath.nstr(x, 20)
    return str(x)


# ---------------------------------------------------------------- commands


def cmd_induced_polarization(args) -> int:
    A = _read(args.pav, PolarizedAV, args)
    f = _read(args.endo, None, args)
    L = image_lattice(A, f)
    P, D, _ = induced_polarization(A, L)
    emb = embedding_from_basis(A, P, D)
    text = f"induced type {D}"
    if args.primitive:
        _, Dp, scale = induced_polarization(A, L, primitive=True)
        if scale > 1:
            text += f" (principal type {Dp} after rescaling by {scale})"
    text += f"\nP = {_fmt_matrix(P)}"
    _emit(args, emb, text=text)
    return EXIT_OK


def _sublattice(args, rep):
    """(P, D) of the sublattice named by the second input of restrict-action."""
    with open(args.sub) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.sub}: invalid JSON: {exc}") from exc
    if isinstance(doc, dict) and doc.get("schema") == "subgroup/1":
        elements = [serialize._int_matrix(N) for N in doc["elements"]]
        f = subgroup_idempotent(elements)
    elif isinstance(doc, dict) and doc.get("schema") == "embedding/1":
        # only the symplectic basis and type are needed; the host is optional
        try:
            return serialize._int_matrix(doc["P"]), serialize._type_list(doc["D"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{args.sub}: malformed embedding/1 document: {exc!r}") from exc
    else:
        f = serialize.from_json(doc, args.precision)
    L = latalg.saturate(latalg.rat_matrix(f))
    if L.shape[1] == 0:
        raise ZeroImage("the idempotent is zero")
    P, D = latalg.frobenius_symplectic_basis(L, rep.J)
    return P, PolarizationType(tuple(D))


def cmd_restrict_action(args) -> int:
    rep = _read(args.rep, SymplecticRep, args)
    P, D = _sublattice(args, rep)
    rrep = restrict_action(rep, P, D, primitive=args.primitive)
    if args.output:
        serialize.write_json(args.output, rrep)
    text = f"restricted type {rrep.D}, {len(rrep.generators)} generators"
    if args.no_fix:
        _emit_only(args, rrep, text)
        return EXIT_OK
    locus = fixed_riemann(rrep, precision=args.precision, seed=args.seed, starts=args.starts)
    if args.riemann_output:
        serialize.write_json(args.riemann_output, locus)
    _emit_only(args, locus, text + "\n" + _locus_text(locus))
    return EXIT_OK


def _emit_only(args, obj, text):
    if args.json:
        print(serialize.dump(obj))
    else:
        print(text)


def _locus_text(locus) -> str:
    lines = [f"fixed locus: {locus.kind} (type {locus.D}" + (f", scale {locus.scale})" if locus.scale > 1 else ")")]
    for p in locus.points:
        tag = "exact" if p.exact else "numeric"
        lines.append(f"  Z ({tag}) = {_fmt_matrix(p.Z)}")
    if locus.family:
        lines.append(f"  estimated dimension {locus.dimension}")
        lines.extend(f"  {c}" for c in locus.constraints)
    return "\n".join(lines)


def cmd_fixed_riemann(args) -> int:
    rrep = _read(args.restricted, RestrictedRep, args)
    locus = fixed_riemann(rrep, precision=args.precision, seed=args.seed, starts=args.starts)
    _emit(args, locus, text=_locus_text(locus))
    return EXIT_OK


def cmd_subvariety_period(args) -> int:
    A = _read(args.pav, PolarizedAV, args)
    f = _read(args.endo, None, args)
    emb: SubvarietyEmbedding = subvariety_period(A, f)
    text = f"type {emb.D}\nW = {_fmt_matrix(emb.W)}\nP = {_fmt_matrix(emb.P)}"
    _emit(args, emb.av, text=text)
    return EXIT_OK


def tree_report(tree: dc.DecompositionTree, indent: str = "") -> str:
    lines = []
    A = tree.node
    head = f"{indent}g={A.g} type {A.ptype}"
    if tree.normalization.content > 1:
        head += f" (content {tree.normalization.content} removed)"
    if tree.normalization.rebase is not None:
        head += " (rebased)"
    if tree.is_leaf:
        lf = tree.leaf
        if lf.kind == "elliptic":
            e = lf.elliptic
            cm = f"CM discriminant {e.discriminant}" if e.cm else "no CM detected"
            head += f": elliptic, tau = {_fmt(e.tau_raw)}, reduced {_fmt(e.tau)}, {cm}"
        else:
            head += f": {lf.kind}"
            if lf.height is not None:
                head += f" at height {lf.height}"
            if lf.note:
                head += f" ({lf.note})"
        return head
    head += f": split of degree {tree.degree}"
    if tree.form is not None:
        head += f" by form {tree.form}"
    if tree.scale != 1:
        head += f" (rescaled by {tree.scale})"
    lines.append(head)
    for _, sub in tree.children:
        lines.append(tree_report(sub, indent + "  "))
    return "\n".join(lines)


def cmd_decompose(args) -> int:
    A = _read(args.pav, PolarizedAV, args)
    candidates = []
    for text in args.candidate or []:
        try:
            candidates.append(tuple(Fraction(x) for x in text.split(",")))
        except ValueError as exc:
            raise ParseError(f"bad candidate {text!r}: {exc}") from exc
    tree = dc.poincare_decompose(A, height=args.height, candidates=candidates, precision=args.precision)
    _emit(args, tree, text=tree_report(tree))
    return EXIT_OK


def cmd_verify(args) -> int:
    tree = _read(args.tree, dc.DecompositionTree, args)
    A = _read(args.pav, PolarizedAV, args) if args.pav else None
    checks = dc.verify_tree(tree, A, precision=args.precision)
    ok = all(c.ok for c in checks)
    if args.json:
        print(json.dumps({"ok": ok, "checks": [c.__dict__ for c in checks]}, indent=1))
    else:
        for c in checks:
            mark = "ok  " if c.ok else "FAIL"
            print(f"{mark} {c.path:<12} {c.name}" + (f"  {c.detail}" if c.detail else ""))
        print("verification " + ("passed" if ok else "failed"))
    return EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="working precision in bits (>= 64)")
    common.add_argument("--height", type=int, default=dc.DEFAULT_HEIGHT, help="maximum candidate height")
    common.add_argument("--json", action="store_true", help="print only JSON on stdout")
    common.add_argument("--seed", type=int, default=SEED, help="seed for Newton starting points")
    common.add_argument("--starts", type=int, default=N_STARTS, help="number of Newton starting points")
    common.add_argument("--primitive", action="store_true", help="rescale types (c,...,c) to principal")
    common.add_argument("-o", "--output", help="output file (written atomically)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="abeldecomp", description="Period matrices of abelian subvarieties.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("induced-polarization", parents=[common], help="type and symplectic basis of an image")
    p.add_argument("pav")
    p.add_argument("endo")
    p.set_defaults(func=cmd_induced_polarization)

    p = sub.add_parser("restrict-action", parents=[common], help="restrict a group action and find fixed Riemann matrices")
    p.add_argument("rep")
    p.add_argument("sub", help="embedding/1, endo/1 or subgroup/1 document")
    p.add_argument("--riemann-output", help="file for the fixed-locus document")
    p.add_argument("--no-fix", action="store_true", help="stop after restricting the action")
    p.set_defaults(func=cmd_restrict_action)

    p = sub.add_parser("fixed-riemann", parents=[common], help="Riemann matrices fixed by a restricted action")
    p.add_argument("restricted")
    p.set_defaults(func=cmd_fixed_riemann)

    p = sub.add_parser("subvariety-period", parents=[common], help="period matrix of the image of an endomorphism")
    p.add_argument("pav")
    p.add_argument("endo")
    p.set_defaults(func=cmd_subvariety_period)

    p = sub.add_parser("decompose", parents=[common], help="Poincaré decomposition tree")
    p.add_argument("pav")
    p.add_argument("--candidate", action="append", help="comma-separated 2-form coefficients to try first")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", parents=[common], help="re-check a decomposition tree")
    p.add_argument("tree")
    p.add_argument("pav", nargs="?")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.precision < 64:
        parser.error("--precision must be at least 64")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AbelDecompError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
