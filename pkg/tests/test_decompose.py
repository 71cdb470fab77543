from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from abeldecomp import data, latalg
from abeldecomp.decompose import (
    NSForm,
    elliptic_normalize,
    idempotent_from_ns,
    ns_basis,
    ns_linear_map,
    ns_membership,
    pairs,
    poincare_decompose,
    reduce_tau,
    sub_elliptic_search_g2,
    verify_tree,
)
from abeldecomp.errors import DegenerateRank, NotIdempotent
from abeldecomp.numerics import quadratic_field
from abeldecomp.pav import build_period, from_period_matrix


def perm_sign(seq) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def wedge_oracle(Pi, coeffs) -> dict:
    """Brute-force Leibniz expansion of ω ∧ dz_1 ∧ … ∧ dz_g on every (g+2)-subset."""
    g, n = Pi.shape
    a = dict(zip(pairs(g), coeffs))
    out = {}
    for S in itertools.combinations(range(n), g + 2):
        total = Fraction(0)
        for perm in itertools.permutations(S):
            p, q, rest = perm[0], perm[1], perm[2:]
            if p > q or not a[(p, q)]:
                continue
            term = a[(p, q)] * perm_sign(perm)
            for k, r in enumerate(rest):
                term = term * Pi[k, r]
            total = total + term
        out[S] = total
    return out


def diag_product(*entries):
    K = quadratic_field(-1)
    i = K.gen
    g = len(entries)
    Z = np.empty((g, g), dtype=object)
    for r in range(g):
        for c in range(g):
            Z[r, c] = entries[r] if r == c else 0 * i
    return build_period((1,) * g, Z)


def random_quadratic_surface(rng, D=-2, d=1):
    r = quadratic_field(D).gen
    while True:
        x = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(6)]
        Z = np.array([[x[0] + (1 + abs(x[1])) * 3 * r, x[2] + x[3] * r / 4],
                      [x[2] + x[3] * r / 4, x[4] + (1 + abs(x[5])) * 3 * r]], dtype=object)
        try:
            return build_period((1, d), Z)
        except Exception:
            continue


def test_membership_examples():
    i = quadratic_field(-1).gen
    A = diag_product(i, 2 * i)
    ok, defects = ns_membership(A, (0, -1, 0, 0, 0, 0))
    assert ok and not defects
    assert ns_membership(data.surface(), data.surface_split_form())[0]
    ok, defects = ns_membership(data.surface(), (1, 2, 3, 4, 5, 6))
    assert not ok and defects


@pytest.mark.parametrize("g", [2, 3])
def test_wedge_expansion_matches_oracle(g):
    rng = random.Random(g)
    i = quadratic_field(-1).gen
    if g == 2:
        A = data.surface()
    else:
        A = diag_product(i, 2 * i, 3 * i)
    subsets, prs, C = ns_linear_map(A)
    for _ in range(10):
        coeffs = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in prs]
        oracle = wedge_oracle(A.Pi, coeffs)
        for r, S in enumerate(subsets):
            value = sum((C[r, k] * a for k, a in enumerate(coeffs)), Fraction(0))
            assert value == oracle[S]
        ok, defects = ns_membership(A, coeffs)
        assert ok == all(v == 0 for v in oracle.values())
        assert set(defects) == {S for S, v in oracle.items() if v != 0}


def explicit_g2(Z, d, a):
    """Homogeneous part of the linear condition for a surface of type (1, d)."""
    a12, a13, a14, a23, a24, a34 = a
    z11, z12, z22 = Z[0, 0], Z[0, 1], Z[1, 1]
    return ((z11 * z22 - z12 * z12) * a12 - d * a14 * z11 + d * a13 * z12 - a24 * z12 + a23 * z22 + d * a34)


@pytest.mark.parametrize("d", [1, 3])
def test_g2_explicit_equation_cross_validation(d):
    rng = random.Random(100 + d)
    A = random_quadratic_surface(rng, -2, d)
    basis = ns_basis(A)
    ratios = set()
    agree = 0
    for k in range(100):
        if k % 2:
            vec = [Fraction(rng.randint(-6, 6), rng.randint(1, 5)) for _ in range(6)]
        else:
            combo = latalg.rat_matrix([[rng.randint(-3, 3)] for _ in range(basis.shape[1])])
            vec = list(basis.dot(combo)[:, 0])
        (S, value), = wedge_oracle(A.Pi, vec).items()
        lhs = explicit_g2(A.Z, d, vec)
        assert (value == 0) == (lhs == 0)
        agree += 1
        if value != 0:
            ratios.add(str(value / lhs))
    assert agree == 100
    assert len(ratios) == 1


def test_surface_search_family():
    s = sub_elliptic_search_g2(data.surface())
    assert s.status == "found"
    assert s.contains(data.surface_split_form())
    assert all(ns_membership(data.surface(), f)[0] for f in s.forms)


def test_genus11_search_family():
    A = data.genus11_surface()
    s = sub_elliptic_search_g2(A)
    assert s.status == "found" and s.d == 3
    assert s.normalization.content == 4
    assert s.contains(data.genus11_split_form())


def test_diag_search_family():
    i = quadratic_field(-1).gen
    s = sub_elliptic_search_g2(diag_product(i, 2 * i))
    assert s.contains((0, -1, 0, 0, 0, 0))
    assert not s.contains((0, -1, 0, 0, 0, 1))


def test_idempotent_examples():
    S = data.surface()
    pair = idempotent_from_ns(S, data.surface_split_form())
    assert (pair.f == data.surface_idempotent()).all()
    assert (pair.f.dot(pair.f) == pair.f).all()
    assert (pair.f.dot(pair.complement) == 0).all()
    with pytest.raises(DegenerateRank):
        idempotent_from_ns(S, NSForm.from_matrix(S.J))
    i = quadratic_field(-1).gen
    pair = idempotent_from_ns(diag_product(i, 2 * i), (0, -1, 0, 0, 0, 0))
    assert (pair.f == latalg.rat_matrix(np.diag([1, 0, 1, 0]))).all()


def test_idempotent_rescaling_and_rejection():
    i = quadratic_field(-1).gen
    A = diag_product(i, 2 * i)
    pair = idempotent_from_ns(A, (0, -3, 0, 0, 0, 0))
    assert pair.scale == 3
    assert (pair.f == latalg.rat_matrix(np.diag([1, 0, 1, 0]))).all()
    with pytest.raises(NotIdempotent):
        idempotent_from_ns(A, (0, -1, 0, 0, -2, 0))


def test_surface_tree():
    t0 = time.perf_counter()
    tree = poincare_decompose(data.surface())
    assert time.perf_counter() - t0 < 10
    assert tree.degree == 4
    leaves = tree.leaves()
    assert [lf.leaf.kind for lf in leaves] == ["elliptic", "elliptic"]
    r = data.sqrt_m2()
    assert {lf.leaf.elliptic.tau for lf in leaves} == {reduce_tau(1 + r)}
    assert all(lf.leaf.elliptic.discriminant == -8 for lf in leaves)
    assert all(c.ok for c in verify_tree(tree, data.surface()))


def test_genus11_tree_with_candidate():
    tree = poincare_decompose(data.genus11_surface(), candidates=[data.genus11_split_form()])
    first, second = (lf.leaf.elliptic for lf in tree.leaves())
    s = data.sqrt_m6()
    assert first.tau_raw == s / 6 and first.tau == s
    assert first.cm_field == -6 and second.cm_field == -6
    assert all(c.ok for c in verify_tree(tree, data.genus11_surface()))


def test_elliptic_input_is_single_leaf():
    i = quadratic_field(-1).gen
    tree = poincare_decompose(build_period((1,), [[1 + 2 * i]]))
    assert tree.is_leaf and tree.leaf.elliptic.tau == 2 * i


def test_split_product_trees_verify():
    rng = random.Random(5)
    for _ in range(5):
        D = rng.choice([-1, -2, -3, -5, -7])
        r = quadratic_field(D).gen
        z1 = Fraction(rng.randint(-3, 3), 2) + rng.randint(1, 3) * r
        z2 = Fraction(rng.randint(-3, 3), 3) + rng.randint(1, 3) * r
        A = build_period((1, 1), np.array([[z1, 0 * r], [0 * r, z2]], dtype=object))
        tree = poincare_decompose(A)
        assert not tree.is_leaf
        got = sorted(str(lf.leaf.elliptic.tau) for lf in tree.leaves())
        assert got == sorted([str(reduce_tau(z1)), str(reduce_tau(z2))])
        assert all(c.ok for c in verify_tree(tree, A))


def test_threefold_heuristic():
    i = quadratic_field(-1).gen
    A = diag_product(i, 2 * i, 3 * i)
    tree = poincare_decompose(A)
    leaves = tree.leaves()
    assert [lf.g for lf in leaves] == [1, 1, 1]
    assert all(c.ok for c in verify_tree(tree, A))
    assert abs(int(latalg.det(tree.full_isogeny()))) >= 1


def test_tree_invariants():
    tree = poincare_decompose(data.surface())
    assert sum(sub.g for _, sub in tree.children) == tree.g
    assert abs(int(latalg.det(tree.P))) == tree.degree > 0


def test_tampered_degree_is_located():
    tree = poincare_decompose(data.surface())
    tree.degree = 5
    bad = [c for c in verify_tree(tree) if not c.ok]
    assert bad and bad[0].path == "root" and bad[0].name in ("degree", "degree product")


def test_content_scaling_invariance():
    S = data.surface()
    scaled = from_period_matrix(2 * S.Pi)
    assert scaled.ptype.d == (2, 2)
    t1, t2 = poincare_decompose(S), poincare_decompose(scaled)
    assert t2.normalization.content == 2
    assert t1.degree == t2.degree
    assert [lf.leaf.elliptic.tau for lf in t1.leaves()] == [lf.leaf.elliptic.tau for lf in t2.leaves()]


def test_elliptic_table():
    i = quadratic_field(-1).gen
    r3 = quadratic_field(-3).gen
    r2 = data.sqrt_m2()
    reports = [elliptic_normalize(d, w) for d, w in data.genus11_elliptic_periods()]
    assert [rep.tau for rep in reports] == [i, (1 + r3) / 2, i, r2]
    assert reports[3].tau_raw == r2 / 2
    assert [rep.discriminant for rep in reports] == [-4, -3, -4, -8]
    assert all(rep.cm for rep in reports)
    for rep in reports:
        c, b, a = rep.minpoly
        assert a * rep.tau * rep.tau + b * rep.tau + c == 0
    assert reports[0].tau == reports[2].tau


def test_elliptic_float_mode():
    with mpmath.workprec(400):
        w = mpmath.mpc(mpmath.mpf(1) / 2, mpmath.sqrt(3) / 2) + 7
    rep = elliptic_normalize(1, w)
    assert rep.cm and rep.discriminant == -3
    generic = elliptic_normalize(1, mpmath.mpc("0.1234567", "1.7654321"))
    assert not generic.cm and generic.discriminant is None
