from __future__ import annotations

import itertools
import random

import numpy as np
import pytest

from abeldecomp import data, latalg
from abeldecomp.errors import NotClosed, NotFixed, NotStable, NotSymplectic
from abeldecomp.gaction import (
    RestrictedRep,
    SymplecticRep,
    fixed_residuals,
    fixed_riemann,
    restrict_action,
    restricted_analytic,
    subgroup_idempotent,
)
from abeldecomp.numerics import quadratic_field
from abeldecomp.pav import PolarizationType, hurwitz_residual

from conftest import random_symplectic


def surface_rep() -> SymplecticRep:
    return SymplecticRep(latalg.alternating_form((1, 1)), data.surface_generators())


def swap() -> np.ndarray:
    return latalg.int_matrix([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def test_surface_generators_fix_surface_riemann():
    rep = restrict_action(surface_rep(), latalg.identity(4), (1, 1))
    assert all(r == 0 for r in fixed_residuals(rep, data.surface_riemann()))


def test_fixed_riemann_surface():
    rep = restrict_action(surface_rep(), latalg.identity(4), (1, 1))
    locus = fixed_riemann(rep, precision=256)
    assert locus.kind == "point"
    (pt,) = locus.points
    assert pt.exact
    expected = data.surface_riemann()
    assert all(pt.Z[i, j] == expected[i, j] for i in range(2) for j in range(2))
    for C, X in zip(restricted_analytic(rep, pt.Z), rep.generators):
        Pi = np.concatenate([latalg.identity(2), pt.Z], axis=1)
        assert hurwitz_residual(C, Pi, Pi, X) == 0


def test_order_four_elliptic():
    rep = RestrictedRep(PolarizationType((1,)), latalg.identity(2), [latalg.int_matrix([[0, -1], [1, 0]])])
    locus = fixed_riemann(rep)
    i = quadratic_field(-1).gen
    assert locus.kind == "point" and locus.points[0].Z[0, 0] == i
    (C,) = restricted_analytic(rep, locus.points[0].Z)
    assert C[0, 0] == i
    with pytest.raises(NotFixed):
        restricted_analytic(rep, np.array([[2 * i]], dtype=object))


def test_trivial_group_is_family():
    rep = RestrictedRep(PolarizationType((1,)), latalg.identity(2), [latalg.identity(2)])
    locus = fixed_riemann(rep, starts=6)
    assert locus.family and locus.dimension == 1
    assert restricted_analytic(rep, locus.points[0].Z)[0][0, 0] == 1


def test_subgroup_idempotent_examples():
    assert (subgroup_idempotent([latalg.identity(4)]) == latalg.identity(4)).all()
    p = subgroup_idempotent([latalg.identity(4), swap()])
    assert (p == (latalg.rat_matrix(latalg.identity(4)) + swap()) / 2).all()
    assert (p.dot(p) == p).all()
    assert latalg.rank(p) == 2
    assert latalg.same_lattice(latalg.saturate(p), latalg.int_matrix([[1, 0], [1, 0], [0, 1], [0, 1]]))
    with pytest.raises(NotClosed):
        subgroup_idempotent([latalg.identity(2), latalg.int_matrix([[1, 1], [0, 1]])])


def test_restriction_to_diagonal():
    rep = SymplecticRep(latalg.alternating_form((1, 1)), [swap()])
    L = latalg.saturate(subgroup_idempotent([latalg.identity(4), swap()]))
    P, D = latalg.frobenius_symplectic_basis(L, rep.J)
    rrep = restrict_action(rep, P, D)
    assert rrep.D.d == (2,) and rrep.scale == 2
    assert (rrep.generators[0] == latalg.identity(2)).all()
    assert (swap().dot(P) == P.dot(rrep.generators[0])).all()


def test_identity_restriction_and_not_stable():
    rep = surface_rep()
    rrep = restrict_action(rep, latalg.identity(4), (1, 1))
    assert all((X == N).all() for X, N in zip(rrep.generators, rep.generators))
    swap_rep = SymplecticRep(latalg.alternating_form((1, 1)), [swap()])
    first = latalg.int_matrix([[1, 0], [0, 0], [0, 1], [0, 0]])
    with pytest.raises(NotStable):
        restrict_action(swap_rep, first, (1,))


def test_rejects_non_symplectic_generator():
    with pytest.raises(NotSymplectic):
        SymplecticRep(latalg.alternating_form((1,)), [latalg.int_matrix([[1, 1], [1, 2]]) * 2])


def test_restriction_is_homomorphism():
    rng = random.Random(7)
    rep = surface_rep()
    gens = rep.generators
    for _ in range(10):
        U = random_symplectic((1, 1), rng)
        rrep = restrict_action(rep, U, (1, 1))
        X = dict(zip(range(len(gens)), rrep.generators))
        for length in (1, 2, 3):
            for word in itertools.product(range(len(gens)), repeat=length):
                N = latalg.identity(4)
                R = latalg.identity(4)
                for k in word:
                    N = N.dot(gens[k])
                    R = R.dot(X[k])
                word_rep = restrict_action(SymplecticRep(rep.J, [N]), U, (1, 1))
                assert (word_rep.generators[0] == R).all()
                assert (R.T.dot(rep.J).dot(R) == rep.J).all()


def test_restricted_generators_intertwine():
    rep = surface_rep()
    S = data.surface()
    P, D = latalg.frobenius_symplectic_basis(latalg.saturate(data.surface_idempotent()), S.J)
    # the idempotent image is not stable under the whole group
    with pytest.raises(NotStable):
        restrict_action(rep, P, D)
    f = latalg.rat_matrix(data.surface_idempotent())
    assert not all((N.dot(f) == f.dot(N)).all() for N in rep.generators)
