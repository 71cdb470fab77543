"""Images of rational endomorphisms as polarized subvarieties.

Given a rational endomorphism ``f`` of ``A`` (a 2g×2g rational matrix that is
complex-linear for ``Π``), the image ``A_f`` has lattice ``L_f``: the
saturation of the column span of ``f``. A symplectic basis of ``L_f`` for the
restricted form gives the induced type ``D`` and the embedding matrix ``P``;
the period matrix ``(D W)`` of ``A_f`` follows from one linear solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath
import numpy as np
from mpmath import mp

from . import latalg
from .errors import (
    InconsistentSystem,
    NotInSiegel,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficiency,
    ZeroImage,
)
from .matrices import is_zero_matrix, max_abs, mp_solve, to_mpc_matrix
from .pav import (
    PolarizationType,
    PolarizedAV,
    RationalEndomorphism,
    analytic_from_rational,
    build_period,
    float_tolerance,
)

log = logging.getLogger(__name__)

__all__ = [
    "SubvarietyEmbedding",
    "InducedPolarization",
    "image_lattice",
    "induced_polarization",
    "subvariety_period",
]


class InducedPolarization(NamedTuple):
    P: np.ndarray
    D: PolarizationType
    scale: int = 1


@dataclass(eq=False)
class SubvarietyEmbedding:
    """A subvariety with its symplectic embedding into ``host``.

    ``P`` holds the symplectic basis of the sublattice (columns, first ``h``
    paired with last ``h``), ``rho_a`` is the analytic representation of the
    inclusion and ``av`` the subvariety with period matrix ``(D W)``.
    """

    host: PolarizedAV
    P: np.ndarray
    D: PolarizationType
    W: np.ndarray
    rho_a: np.ndarray
    av: PolarizedAV

    @property
    def h(self) -> int:
        return self.D.g


def _matrix_of(f) -> np.ndarray:
    if isinstance(f, RationalEndomorphism):
        return latalg.rat_matrix(f.M)
    return latalg.rat_matrix(f)


def image_lattice(A: PolarizedAV, f, check: bool = True) -> np.ndarray:
    """Saturated ℤ-basis (columns) of the lattice of the image of ``f``."""
    M = _matrix_of(f)
    if M.shape != (2 * A.g, 2 * A.g):
        raise ValueError(f"endomorphism has shape {M.shape}, expected {(2 * A.g, 2 * A.g)}")
    if is_zero_matrix(M):
        raise ZeroImage("the endomorphism is zero")
    if check:
        analytic_from_rational(A, A, M)
    return latalg.saturate(M)


def induced_polarization(A: PolarizedAV, basis, primitive: bool = False) -> InducedPolarization:
    """Symplectic basis and type of the restriction of ``J_E`` to a sublattice.

    With ``primitive=True`` a type of the form ``(c, ..., c)`` is divided by
    ``c`` and ``c`` is returned as ``scale``.
    """
    S, D = latalg.frobenius_symplectic_basis(basis, A.J)
    ptype = PolarizationType(tuple(D))
    if primitive and len(set(D)) == 1 and D[0] > 1:
        c = D[0]
        log.info("induced type %s rescaled by %d to a principal type", ptype, c)
        return InducedPolarization(S, ptype.scaled(c), c)
    return InducedPolarization(S, ptype, 1)


def subvariety_period(A: PolarizedAV, f, check: bool = True) -> SubvarietyEmbedding:
    """Period matrix ``(D W)`` of the image of ``f`` together with its embedding."""
    L = image_lattice(A, f, check=check)
    P, D, _ = induced_polarization(A, L)
    return embedding_from_basis(A, P, D)


def embedding_from_basis(A: PolarizedAV, P, D: PolarizationType) -> SubvarietyEmbedding:
    """Subvariety whose lattice has the symplectic basis ``P`` of type ``D``."""
    h = D.g
    P = latalg.int_matrix(P)
    beta1, beta2 = P[:, :h], P[:, h:]
    Pi = A.Pi
    if A.is_exact:
        Dinv = latalg.zeros(h, h, Fraction(0))
        for i, x in enumerate(D.d):
            Dinv[i, i] = Fraction(1, x)
        rho_a = Pi.dot(beta1).dot(Dinv)
        rhs = Pi.dot(beta2)
        if latalg.rank(rho_a) < h:
            raise RankDeficiency("analytic representation of the inclusion has rank below h")
        try:
            W = latalg.solve_exact(rho_a, rhs)
        except InconsistentSystem as exc:
            raise RankDeficiency("no W solves the inclusion system; the endomorphism is not complex-linear") from exc
    else:
        prec = A.precision
        with mp.workprec(2 * prec):
            Pi2 = to_mpc_matrix(Pi, 2 * prec)
            b1 = to_mpc_matrix(beta1, 2 * prec)
            b2 = to_mpc_matrix(beta2, 2 * prec)
            rho_a = Pi2.dot(b1)
            for j, x in enumerate(D.d):
                rho_a[:, j] = rho_a[:, j] / x
            rhs = Pi2.dot(b2)
            svals = mpmath.svd_c(mpmath.matrix(rho_a.tolist()), compute_uv=False)
            if min(svals) <= mpmath.ldexp(1, -(prec // 2)):
                raise RankDeficiency("analytic representation of the inclusion is numerically rank deficient")
            W = mp_solve(rho_a, rhs, 2 * prec)
            resid = max_abs(rho_a.dot(W) - rhs, 2 * prec)
        if resid > float_tolerance(prec, max_abs(rhs, prec)):
            raise RankDeficiency("inclusion system has no solution at working precision")
        with mp.workprec(prec):
            W = to_mpc_matrix(W, prec)
            rho_a = to_mpc_matrix(rho_a, prec)
            for idx, x in np.ndenumerate(W):
                W[idx] = +x
    try:
        sub = build_period(D, W, label=f"{A.label}/sub" if A.label else "", precision=A.precision)
    except (NotSymmetric, NotPositiveDefinite) as exc:
        raise NotInSiegel(f"period matrix of the image is not a Riemann matrix: {exc}") from exc
    return SubvarietyEmbedding(host=A, P=P, D=D, W=sub.Z, rho_a=rho_a, av=sub)
