from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abeldecomp import data, latalg
from abeldecomp.errors import NoSolution, NotPositiveDefinite, NotSymmetric
from abeldecomp.numerics import quadratic_field
from abeldecomp.pav import (
    PolarizationType,
    analytic_from_rational,
    build_period,
    check_polarization_pullback,
    from_period_matrix,
    hurwitz_residual,
    isogeny_degree,
)


def test_surface_is_valid():
    S = data.surface()
    assert S.g == 2 and S.ptype.is_principal and S.is_exact


def test_genus11_surface_content():
    S = data.genus11_surface()
    assert S.ptype.d == (4, 12)
    assert S.content == 4
    s6 = quadratic_field(-6).gen
    assert S.Z[0, 0] == 6 * s6 and S.Z[0, 1] == 8 * s6 and S.Z[1, 1] == 12 * s6
    P = S.primitive()
    assert P.ptype.d == (1, 3)
    assert P.Z[0, 0] == Fraction(3, 2) * s6


def test_rejects_non_symmetric_and_not_positive():
    i = quadratic_field(-1).gen
    with pytest.raises(NotSymmetric):
        build_period((1, 1), [[i, 2 + 0 * i], [0 * i, i]])
    with pytest.raises(NotPositiveDefinite):
        build_period((1, 1), [[i, 0 * i], [0 * i, -i]])
    with pytest.raises(NotPositiveDefinite):
        build_period((1,), [[Fraction(1)]])


def test_float_mode_validation():
    A = build_period((1,), [[mpmath.mpc(0.1, 1.3)]])
    assert A.mode == "float"
    with pytest.raises(NotPositiveDefinite):
        build_period((1,), [[mpmath.mpc(0.1, 0)]])


def test_polarization_type():
    t = PolarizationType((2, 4))
    assert t.is_canonical and not t.is_principal and t.content == 2
    assert t.scaled(2).d == (1, 2)
    assert not PolarizationType((2, 3)).is_canonical
    with pytest.raises(ValueError):
        PolarizationType((0, 1))


def test_from_period_matrix_checks_left_block():
    i = quadratic_field(-1).gen
    with pytest.raises(ValueError):
        from_period_matrix([[1 + 0 * i, 1 + 0 * i, i, 0 * i], [0 * i, 1 + 0 * i, 0 * i, i]])


def test_analytic_identity_and_double():
    S = data.surface()
    C = analytic_from_rational(S, S, latalg.identity(4))
    assert all(C[i, j] == (1 if i == j else 0) for i in range(2) for j in range(2))
    C2 = analytic_from_rational(S, S, 2 * latalg.identity(4))
    assert all(C2[i, j] == (2 if i == j else 0) for i in range(2) for j in range(2))


def product_of_factors():
    r = quadratic_field(-2).gen
    return build_period((1, 1), [[1 + r, 0 * r], [0 * r, (1 + r) / 3]])


def test_sum_isogeny_analytic_representation():
    src = product_of_factors()
    S = data.surface()
    P = data.surface_sum_isogeny()
    C = analytic_from_rational(src, S, P)
    expected = data.surface_analytic_sum()
    assert all(C[i, j] == expected[i, j] for i in range(2) for j in range(2))
    assert hurwitz_residual(C, src.Pi, S.Pi, P) == 0


def test_hurwitz_residual_perturbation():
    src = product_of_factors()
    S = data.surface()
    P = data.surface_sum_isogeny()
    C = data.surface_analytic_sum()
    Q = P.copy()
    Q[0, 0] += 1
    assert hurwitz_residual(C, src.Pi, S.Pi, Q) > mpmath.mpf("1e-10")
    with pytest.raises(NoSolution):
        analytic_from_rational(src, S, Q)
    zero = np.zeros((2, 2), dtype=object)
    zero[:] = Fraction(0)
    assert hurwitz_residual(zero, src.Pi, S.Pi, latalg.zeros(4, 4)) == 0


def test_isogeny_degree():
    assert isogeny_degree(data.surface_sum_isogeny()) == 4
    assert isogeny_degree(latalg.identity(6)) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_isogeny_degree_multiplicative(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    M = latalg.int_matrix([[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)])
    N = latalg.int_matrix([[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)])
    assert isogeny_degree(M.dot(N)) == isogeny_degree(M) * isogeny_degree(N)


def test_polarization_pullback():
    J = latalg.alternating_form((1, 1))
    u = latalg.int_matrix([[1, 0], [-1, -1], [0, 1], [1, 0]])
    assert check_polarization_pullback(u, J, latalg.int_matrix([[0, 2], [-2, 0]]))
    assert check_polarization_pullback(latalg.identity(4), J, J)
    assert not check_polarization_pullback(u, J, latalg.int_matrix([[0, 1], [-1, 0]]))


def test_sum_isogeny_pullback_is_direct_sum():
    J = latalg.alternating_form((1, 1))
    P = data.surface_sum_isogeny()
    assert check_polarization_pullback(P, J, latalg.alternating_form((2, 2)))
