"""JSON encodings of varieties, endomorphisms, actions and decomposition trees.

Each document carries a ``"schema"`` tag such as ``"pav/1"``. Matrices are
row-major arrays of number encodings; integers and ``"p/q"`` strings are also
accepted on input.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import latalg
from .decompose import (
    AffineFamily,
    DecompositionTree,
    EllipticReport,
    Leaf,
    Normalization,
    NSForm,
    SubEllipticSearch,
)
from .errors import ParseError
from .gaction import FixedLocus, FixedPoint, RestrictedRep, SymplecticRep
from .numerics import DEFAULT_PRECISION, decode_number, encode_number
from .pav import PolarizationType, PolarizedAV, build_period
from .subvariety import SubvarietyEmbedding

__all__ = [
    "dump",
    "load",
    "read_json",
    "write_json",
    "to_json",
    "from_json",
    "encode_matrix",
    "decode_matrix",
]


def encode_matrix(M, precision: int = DEFAULT_PRECISION) -> list:
    M = np.asarray(M, dtype=object)
    return [[encode_number(x, precision) for x in row] for row in M]


def decode_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError("matrix must be a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParseError("matrix rows have different lengths")
    out = np.empty((len(rows), width), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            out[i, j] = decode_number(x)
    return out


def _int_matrix(rows) -> np.ndarray:
    M = decode_matrix(rows)
    try:
        return latalg.int_matrix(M)
    except Exception as exc:
        raise ParseError(f"expected an integer matrix: {exc}") from exc


def _rat_matrix(rows) -> np.ndarray:
    M = decode_matrix(rows)
    try:
        return latalg.rat_matrix(M)
    except Exception as exc:
        raise ParseError(f"expected a rational matrix: {exc}") from exc


def _type_list(d) -> PolarizationType:
    try:
        return PolarizationType(tuple(int(x) for x in d))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad polarization type {d!r}") from exc


# ------------------------------------------------------------------ objects


def _pav(A: PolarizedAV) -> dict:
    return {
        "schema": "pav/1",
        "E": list(A.ptype.d),
        "Z": encode_matrix(A.Z, A.precision),
        "label": A.label,
        "precision": A.precision,
    }


def _parse_pav(obj: dict, precision: int | None = None) -> PolarizedAV:
    prec = int(precision or obj.get("precision", DEFAULT_PRECISION))
    if "Pi" in obj:
        from .pav import from_period_matrix

        return from_period_matrix(decode_matrix(obj["Pi"]), label=obj.get("label", ""), precision=prec)
    return build_period(_type_list(obj["E"]), decode_matrix(obj["Z"]), label=obj.get("label", ""), precision=prec)


def _embedding(e: SubvarietyEmbedding, host: bool = True) -> dict:
    out = {
        "schema": "embedding/1",
        "P": encode_matrix(e.P),
        "D": list(e.D.d),
        "W": encode_matrix(e.W, e.av.precision),
        "rho_a": encode_matrix(e.rho_a, e.av.precision),
        "label": e.av.label,
    }
    if host:
        out["host"] = _pav(e.host)
    return out


def _parse_embedding(obj: dict, host: PolarizedAV | None = None, precision: int | None = None) -> SubvarietyEmbedding:
    if host is None:
        host = _parse_pav(obj["host"], precision)
    D = _type_list(obj["D"])
    av = build_period(D, decode_matrix(obj["W"]), label=obj.get("label", ""), precision=host.precision)
    return SubvarietyEmbedding(host=host, P=_int_matrix(obj["P"]), D=D, W=av.Z,
                               rho_a=decode_matrix(obj["rho_a"]), av=av)


def _rep(rep: SymplecticRep) -> dict:
    d = [int(rep.J[i, rep.g + i]) for i in range(rep.g)]
    out = {"schema": "rep/1", "g": rep.g, "E": d, "generators": [encode_matrix(N) for N in rep.generators]}
    if rep.elements is not None:
        out["elements"] = [encode_matrix(N) for N in rep.elements]
    return out


def _parse_rep(obj: dict) -> SymplecticRep:
    g = int(obj["g"])
    E = obj.get("E", [1] * g)
    if len(E) != g:
        raise ParseError(f"E has {len(E)} entries, expected {g}")
    J = latalg.alternating_form(tuple(int(x) for x in E))
    gens = [_int_matrix(N) for N in obj["generators"]]
    elems = [_int_matrix(N) for N in obj["elements"]] if obj.get("elements") is not None else None
    return SymplecticRep(J=J, generators=gens, elements=elems)


def _restricted(rep: RestrictedRep) -> dict:
    return {
        "schema": "restricted/1",
        "D": list(rep.D.d),
        "P": encode_matrix(rep.P),
        "generators": [encode_matrix(X) for X in rep.generators],
        "scale": rep.scale,
    }


def _parse_restricted(obj: dict) -> RestrictedRep:
    D = _type_list(obj["D"])
    gens = [_int_matrix(X) for X in obj["generators"]]
    P = _int_matrix(obj["P"]) if obj.get("P") is not None else latalg.identity(2 * D.g)
    scale = int(obj.get("scale", 1))
    return RestrictedRep(D=D, P=P, generators=gens, scale=scale)


def _riemann(locus: FixedLocus, precision: int = DEFAULT_PRECISION) -> dict:
    return {
        "schema": "riemann/1",
        "kind": locus.kind,
        "D": list(locus.D.d),
        "scale": locus.scale,
        "dimension": locus.dimension,
        "constraints": list(locus.constraints),
        "points": [
            {
                "Z": encode_matrix(p.Z, precision),
                "exact": p.exact,
                "recognized": p.recognized,
                "residuals": [encode_number(r, precision) for r in p.residuals],
            }
            for p in locus.points
        ],
    }


def _parse_riemann(obj: dict) -> FixedLocus:
    points = [
        FixedPoint(Z=decode_matrix(p["Z"]), exact=bool(p["exact"]),
                   residuals=[decode_number(r) for r in p.get("residuals", [])],
                   recognized=bool(p.get("recognized", p["exact"])))
        for p in obj["points"]
    ]
    return FixedLocus(kind=obj["kind"], points=points, D=_type_list(obj["D"]), scale=int(obj.get("scale", 1)),
                      dimension=int(obj.get("dimension", 0)), constraints=list(obj.get("constraints", [])))


def _endo(M) -> dict:
    return {"schema": "endo/1", "matrix": encode_matrix(M)}


def _parse_endo(obj: dict) -> np.ndarray:
    return _rat_matrix(obj["matrix"])


# ------------------------------------------------------------------- trees


def _elliptic(rep: EllipticReport, precision: int) -> dict:
    return {
        "tau_raw": encode_number(rep.tau_raw, precision),
        "tau": encode_number(rep.tau, precision),
        "exact": rep.exact,
        "cm": rep.cm,
        "discriminant": rep.discriminant,
        "minpoly": list(rep.minpoly) if rep.minpoly else None,
        "cm_field": rep.cm_field,
    }


def _parse_elliptic(obj: dict) -> EllipticReport:
    return EllipticReport(
        tau_raw=decode_number(obj["tau_raw"]),
        tau=decode_number(obj["tau"]),
        exact=bool(obj["exact"]),
        cm=bool(obj["cm"]),
        discriminant=obj.get("discriminant"),
        minpoly=tuple(obj["minpoly"]) if obj.get("minpoly") else None,
        cm_field=obj.get("cm_field"),
    )


def _search(s: SubEllipticSearch) -> dict:
    fam = None
    if s.family is not None:
        fam = {"a0": [str(x) for x in s.family.a0], "N": encode_matrix(s.family.N) if s.family.dimension else []}
    return {
        "status": s.status,
        "forms": [[str(x) for x in f.coeffs] for f in s.forms],
        "family": fam,
        "d": s.d,
        "height": s.height,
        "mode": s.mode,
    }


def _parse_search(obj: dict) -> SubEllipticSearch:
    fam = None
    if obj.get("family") is not None:
        a0 = tuple(Fraction(x) for x in obj["family"]["a0"])
        N = _rat_matrix(obj["family"]["N"]) if obj["family"]["N"] else latalg.zeros(6, 0, Fraction(0))
        fam = AffineFamily(a0, N)
    forms = [NSForm(2, tuple(Fraction(x) for x in f)) for f in obj.get("forms", [])]
    return SubEllipticSearch(obj["status"], forms, fam, int(obj["d"]), int(obj["height"]), obj["mode"])


def _tree(t: DecompositionTree) -> dict:
    prec = t.node.precision
    out = {
        "node": _pav(t.node),
        "content": t.normalization.content,
        "rebase": encode_matrix(t.normalization.rebase) if t.normalization.rebase is not None else None,
    }
    if t.search is not None:
        out["search"] = _search(t.search)
    if t.is_leaf:
        leaf = {"kind": t.leaf.kind, "height": t.leaf.height, "note": t.leaf.note}
        if t.leaf.elliptic is not None:
            leaf["elliptic"] = _elliptic(t.leaf.elliptic, prec)
        out["leaf"] = leaf
    else:
        out["split"] = {
            "P": encode_matrix(t.P),
            "degree": t.degree,
            "form": {"g": t.form.g, "coeffs": [str(x) for x in t.form.coeffs]} if t.form is not None else None,
            "scale": str(t.scale),
            "children": [{"embedding": _embedding(e, host=False), "tree": _tree(sub)} for e, sub in t.children],
        }
    return out


def _parse_tree(obj: dict, precision: int | None = None) -> DecompositionTree:
    node = _parse_pav(obj["node"], precision)
    rebase = _int_matrix(obj["rebase"]) if obj.get("rebase") is not None else None
    norm = Normalization(content=int(obj.get("content", 1)), rebase=rebase)
    t = DecompositionTree(node=node, normalization=norm)
    if obj.get("search") is not None:
        t.search = _parse_search(obj["search"])
    if "leaf" in obj:
        lf = obj["leaf"]
        ell = _parse_elliptic(lf["elliptic"]) if lf.get("elliptic") is not None else None
        t.leaf = Leaf(lf["kind"], elliptic=ell, height=lf.get("height"), note=lf.get("note", ""))
        return t
    sp = obj["split"]
    t.P = _int_matrix(sp["P"])
    t.degree = int(sp["degree"])
    if sp.get("form") is not None:
        t.form = NSForm(int(sp["form"]["g"]), tuple(Fraction(x) for x in sp["form"]["coeffs"]))
    t.scale = Fraction(sp.get("scale", "1"))
    for ch in sp["children"]:
        e = _parse_embedding(ch["embedding"], host=node)
        t.children.append((e, _parse_tree(ch["tree"], precision)))
    return t


def _tree_doc(t: DecompositionTree) -> dict:
    return {"schema": "tree/1", "tree": _tree(t)}


# ---------------------------------------------------------------- dispatch


def to_json(obj, kind: str | None = None) -> dict:
    """Document for ``obj``; ``kind="endo"`` marks a bare matrix as an endomorphism."""
    if isinstance(obj, PolarizedAV):
        return _pav(obj)
    if isinstance(obj, SubvarietyEmbedding):
        return _embedding(obj)
    if isinstance(obj, SymplecticRep):
        return _rep(obj)
    if isinstance(obj, RestrictedRep):
        return _restricted(obj)
    if isinstance(obj, FixedLocus):
        return _riemann(obj)
    if isinstance(obj, DecompositionTree):
        return _tree_doc(obj)
    if kind == "endo" or isinstance(obj, np.ndarray):
        return _endo(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_json(doc: dict, precision: int | None = None):
    """Parse a document by its schema tag."""
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    schema = doc.get("schema")
    try:
        if schema == "pav/1":
            return _parse_pav(doc, precision)
        if schema == "endo/1":
            return _parse_endo(doc)
        if schema == "embedding/1":
            return _parse_embedding(doc, precision=precision)
        if schema == "rep/1":
            return _parse_rep(doc)
        if schema == "restricted/1":
            return _parse_restricted(doc)
        if schema == "riemann/1":
            return _parse_riemann(doc)
        if schema == "tree/1":
            return _parse_tree(doc["tree"], precision)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed {schema} document: {exc!r}") from exc
    raise ParseError(f"unknown schema {schema!r}")


def dump(obj, kind: str | None = None) -> str:
    return json.dumps(to_json(obj, kind), indent=1)


def load(text: str, precision: int | None = None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return from_json(doc, precision)


def read_json(path, precision: int | None = None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return load(text, precision)


def write_json(path, obj, kind: str | None = None) -> None:
    """Write atomically: temporary file in the target directory, then rename."""
    path = Path(path)
    text = dump(obj, kind)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
