from __future__ import annotations

import json

import mpmath
import pytest

from abeldecomp import data, latalg, serialize
from abeldecomp.decompose import poincare_decompose, verify_tree
from abeldecomp.errors import ParseError
from abeldecomp.gaction import RestrictedRep, SymplecticRep, fixed_riemann, restrict_action
from abeldecomp.pav import PolarizationType, PolarizedAV, build_period
from abeldecomp.subvariety import subvariety_period


def roundtrip(obj, kind=None):
    return serialize.load(serialize.dump(obj, kind))


def same(A, B):
    return A.shape == B.shape and all(x == y for x, y in zip(A.flat, B.flat))


def test_pav_roundtrip():
    for A in (data.surface(), data.genus11_surface()):
        B = roundtrip(A)
        assert isinstance(B, PolarizedAV)
        assert B.ptype == A.ptype and same(B.Z, A.Z) and B.label == A.label


def test_float_pav_roundtrip():
    with mpmath.workprec(256):
        z = mpmath.mpc(mpmath.pi / 10, mpmath.e)
    A = build_period((1,), [[z]], precision=256)
    B = roundtrip(A)
    assert B.mode == "float"
    with mpmath.workprec(256):
        assert abs(B.Z[0, 0] - z) < mpmath.mpf(2) ** -200


def test_pi_document():
    doc = {"schema": "pav/1", "Pi": serialize.encode_matrix(data.genus11_surface_period())}
    A = serialize.from_json(doc)
    assert A.ptype.d == (4, 12)


def test_endo_roundtrip():
    f = data.surface_idempotent()
    assert same(roundtrip(f, "endo"), f)


def test_embedding_roundtrip():
    emb = subvariety_period(data.surface(), data.surface_idempotent())
    back = roundtrip(emb)
    assert back.D == emb.D and same(back.P, emb.P) and same(back.W, emb.W) and same(back.rho_a, emb.rho_a)


def test_rep_and_restricted_roundtrip():
    rep = SymplecticRep(latalg.alternating_form((1, 1)), data.surface_generators())
    back = roundtrip(rep)
    assert all(same(a, b) for a, b in zip(back.generators, rep.generators))
    rrep = restrict_action(rep, latalg.identity(4), (1, 1))
    rback = roundtrip(rrep)
    assert isinstance(rback, RestrictedRep) and rback.D == PolarizationType((1, 1))
    assert all(same(a, b) for a, b in zip(rback.generators, rrep.generators))


def test_riemann_roundtrip():
    rep = restrict_action(SymplecticRep(latalg.alternating_form((1, 1)), data.surface_generators()),
                          latalg.identity(4), (1, 1))
    locus = fixed_riemann(rep)
    back = roundtrip(locus)
    assert back.kind == locus.kind
    assert same(back.points[0].Z, locus.points[0].Z)


def test_tree_roundtrip_verifies():
    tree = poincare_decompose(data.surface())
    back = roundtrip(tree)
    assert back.degree == 4
    assert [lf.leaf.elliptic.tau for lf in back.leaves()] == [lf.leaf.elliptic.tau for lf in tree.leaves()]
    assert all(c.ok for c in verify_tree(back, data.surface()))
    assert serialize.dump(back) == serialize.dump(tree)


def test_write_json_atomic(tmp_path):
    out = tmp_path / "s.json"
    serialize.write_json(out, data.surface())
    assert isinstance(serialize.read_json(out), PolarizedAV)
    assert [p.name for p in tmp_path.iterdir()] == ["s.json"]


@pytest.mark.parametrize("text", ["{", "[]", '{"schema": "nope/1"}', '{"schema": "pav/1", "E": [1, 1]}'])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        serialize.load(text)


def test_documents_are_plain_json():
    doc = json.loads(serialize.dump(poincare_decompose(data.genus11_surface())))
    assert doc["schema"] == "tree/1"
