from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from math import gcd

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from abeldecomp import latalg
from abeldecomp.errors import DegenerateForm, InconsistentSystem, RankMismatch
from conftest import random_unimodular

int_matrices = st.integers(1, 5).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def minor_gcd_divisors(M) -> list[int]:
    """Elementary divisors from gcds of k×k minors (independent oracle)."""
    m, n = len(M), len(M[0])
    S = sympy.Matrix(M)
    out, prev = [], 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in combinations(range(m), k):
            for cols in combinations(range(n), k):
                g = gcd(g, int(S.extract(list(rows), list(cols)).det()))
        if g == 0:
            out.extend([0] * (min(m, n) - k + 1))
            break
        out.append(g // prev)
        prev = g
    return out


def test_hermite_identity():
    H, U = latalg.hermite_form(latalg.identity(4))
    assert (H == latalg.identity(4)).all() and (U == latalg.identity(4)).all()


def test_hermite_small():
    M = latalg.int_matrix([[2, 4], [0, 2]])
    H, U = latalg.hermite_form(M)
    assert (U.dot(M) == H).all()
    assert abs(latalg.det(U)) == 1
    assert H[1, 0] == 0 and H[0, 0] > 0 and H[1, 1] > 0
    assert 0 <= H[0, 1] < H[1, 1]


def test_hermite_zero():
    H, U = latalg.hermite_form(latalg.zeros(3, 3))
    assert (H == 0).all() and (U == latalg.identity(3)).all()


@settings(max_examples=200, deadline=None)
@given(int_matrices)
def test_hermite_property(rows):
    M = latalg.int_matrix(rows)
    H, U = latalg.hermite_form(M)
    assert (U.dot(M) == H).all()
    assert abs(latalg.det(U)) == 1


def test_elementary_divisors_examples():
    assert latalg.elementary_divisors(latalg.int_matrix([[4, 0], [0, 2]])) == [2, 4]
    assert latalg.elementary_divisors(latalg.identity(3)) == [1, 1, 1]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(-5, 5), min_size=4, max_size=4), min_size=4, max_size=4))
def test_elementary_divisors_minor_oracle(rows):
    assert latalg.elementary_divisors(latalg.int_matrix(rows)) == minor_gcd_divisors(rows)


@settings(max_examples=200, deadline=None)
@given(int_matrices, st.integers(0, 10**6))
def test_elementary_divisors_invariance(rows, seed):
    rng = random.Random(seed)
    M = latalg.int_matrix(rows)
    A = random_unimodular(M.shape[0], rng) if M.shape[0] > 1 else latalg.identity(1)
    B = random_unimodular(M.shape[1], rng) if M.shape[1] > 1 else latalg.identity(1)
    assert latalg.elementary_divisors(A.dot(M).dot(B)) == latalg.elementary_divisors(M)


def test_saturate_idempotent_image():
    f = latalg.rat_matrix([[1, 0, 0, 1], [-1, 1, -1, 0], [0, -1, 1, -1], [1, 0, 0, 1]]) / 2
    L = latalg.saturate(f, rank=2)
    expected = latalg.int_matrix([[1, 0], [-1, -1], [0, 1], [1, 0]])
    assert latalg.same_lattice(L, expected)


def test_saturate_identity_and_primitive_vector():
    assert latalg.same_lattice(latalg.saturate(latalg.identity(4)), latalg.identity(4))
    L = latalg.saturate(latalg.int_matrix([[2], [4], [6], [0]]))
    assert [abs(int(x)) for x in L[:, 0]] == [1, 2, 3, 0]


def test_saturate_rank_mismatch():
    with pytest.raises(RankMismatch):
        latalg.saturate(latalg.int_matrix([[2], [4]]), rank=2)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=1, max_size=n)))
def test_saturate_properties(rows):
    C = latalg.int_matrix(rows).T.copy()
    S = latalg.saturate(C)
    assert S.shape[1] == latalg.rank(C)
    # idempotent with identical Hermite form
    S2 = latalg.saturate(S)
    assert S2.shape == S.shape and (S2 == S).all()
    # contains the input: each column of C is an integer combination of S
    if S.shape[1]:
        X = latalg.solve_exact(S, C)
        assert latalg.is_integral(X)
    # purity: the quotient is torsion free, so the divisors of S are all 1
    assert all(d == 1 for d in latalg.elementary_divisors(S)[: S.shape[1]])


def test_frobenius_standard_basis():
    J = latalg.alternating_form((1, 1))
    S, D = latalg.frobenius_symplectic_basis(latalg.identity(4), J)
    assert D == [1, 1]
    assert (S.T.dot(J).dot(S) == J).all()


def test_frobenius_elliptic_factor():
    J = latalg.alternating_form((1, 1))
    u = latalg.int_matrix([[1, 0], [-1, -1], [0, 1], [1, 0]])
    S, D = latalg.frobenius_symplectic_basis(u, J)
    assert D == [2]
    assert int(u[:, 0].dot(J).dot(u[:, 1])) == 2


def test_frobenius_random_type_12(rng):
    J = latalg.alternating_form((1, 2))
    for _ in range(20):
        U = random_unimodular(4, rng)
        S, D = latalg.frobenius_symplectic_basis(U, J)
        assert D == [1, 2]
        assert (S.T.dot(J).dot(S) == latalg.alternating_form(D)).all()


def test_frobenius_degenerate():
    J = latalg.alternating_form((1, 1))
    with pytest.raises(DegenerateForm):
        latalg.frobenius_symplectic_basis(latalg.int_matrix([[1, 0], [0, 1], [0, 0], [0, 0]]), J)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_frobenius_property(seed):
    rng = random.Random(seed)
    g = rng.randint(1, 3)
    d = []
    cur = 1
    for _ in range(g):
        cur *= rng.choice([1, 1, 2, 3])
        d.append(cur)
    J = latalg.alternating_form(tuple(d))
    n = 2 * g
    # a random full-rank sublattice: random integer matrix of full rank
    while True:
        B = latalg.int_matrix([[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
        if latalg.det(B) != 0:
            break
    S, D = latalg.frobenius_symplectic_basis(B, J)
    assert (S.T.dot(J).dot(S) == latalg.alternating_form(D)).all()
    assert all(b % a == 0 for a, b in zip(D, D[1:]))
    # the change of basis from B to S is unimodular
    T = latalg.solve_exact(latalg.rat_matrix(B), latalg.rat_matrix(S))
    assert latalg.is_integral(T) and abs(latalg.det(T)) == 1


def test_solve_exact_examples(rng):
    B = latalg.rat_matrix([[1, 2], [3, 4], [5, 6]])
    assert (latalg.solve_exact(latalg.identity(3, Fraction(1)), B) == B).all()
    for _ in range(10):
        while True:
            A = latalg.rat_matrix([[Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(4)] for _ in range(6)])
            if latalg.rank(A) == 4:
                break
        X0 = latalg.rat_matrix([[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(2)] for _ in range(4)])
        assert (latalg.solve_exact(A, A.dot(X0)) == X0).all()


def test_solve_exact_inconsistent():
    with pytest.raises(InconsistentSystem) as exc:
        latalg.solve_exact(latalg.rat_matrix([[1, 1], [2, 2]]), latalg.rat_matrix([[1], [3]]))
    cert = exc.value.certificate
    assert cert is not None


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_det_matches_sympy(rows):
    assert latalg.det(latalg.int_matrix(rows)) == sympy.Matrix(rows).det()


def test_inverse_roundtrip(rng):
    for _ in range(10):
        M = latalg.rat_matrix([[Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(4)] for _ in range(4)])
        if latalg.det(M) == 0:
            continue
        assert (M.dot(latalg.inverse(M)) == latalg.identity(4, Fraction(1))).all()


def test_integer_kernel():
    A = latalg.int_matrix([[1, 2, 3], [2, 4, 6]])
    K = latalg.integer_kernel(A)
    assert K.shape[1] == 2
    assert (A.dot(K) == 0).all()
    assert all(d == 1 for d in latalg.elementary_divisors(K))


def test_lll_reduces_known_basis():
    rows = [[1, 0, 0, 1000], [0, 1, 0, 2000], [0, 0, 1, 3001]]
    red = latalg.lll_reduce(rows)
    assert abs(latalg.det(latalg.int_matrix(red).dot(latalg.int_matrix(red).T))) == abs(
        latalg.det(latalg.int_matrix(rows).dot(latalg.int_matrix(rows).T))
    )
    assert min(sum(x * x for x in r) for r in red) <= 6
    with pytest.raises(ValueError):
        latalg.lll_reduce([[1, 2], [2, 4]])
