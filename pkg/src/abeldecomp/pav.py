"""Polarized abelian varieties given by period matrices.

A :class:`PolarizedAV` stores the polarization type ``E = diag(d_1, ..., d_g)``
and a Riemann matrix ``Z`` so that the period matrix is ``Π = (E Z)``. The
lattice is spanned by the columns of ``Π`` and the polarization is the
alternating form ``J_E = [[0, E], [-E, 0]]`` in that basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import mpmath
import numpy as np
from mpmath import iv, mp

from . import latalg
from .errors import NoSolution, NotPositiveDefinite, NotSymmetric
from .matrices import (
    as_matrix,
    common_mode,
    is_zero_matrix,
    mat_eq,
    max_abs,
    real_imag_rational,
    to_mpc_matrix,
)
from .numerics import DEFAULT_PRECISION, NumberFieldElement, to_mpc

log = logging.getLogger(__name__)

__all__ = [
    "PolarizationType",
    "PolarizedAV",
    "RationalEndomorphism",
    "build_period",
    "from_period_matrix",
    "analytic_from_rational",
    "hurwitz_residual",
    "isogeny_degree",
    "check_polarization_pullback",
    "float_tolerance",
]


def float_tolerance(precision: int, scale=1) -> mpmath.mpf:
    """Residual bound used for float-mode identities: half the working bits."""
    with mp.workprec(precision):
        return mpmath.ldexp(1, -(precision // 2)) * (1 + mpmath.mpf(scale))


@dataclass(frozen=True)
class PolarizationType:
    d: tuple[int, ...]

    def __post_init__(self):
        d = tuple(int(x) for x in self.d)
        if not d or any(x < 1 for x in d):
            raise ValueError(f"polarization type entries must be positive: {self.d}")
        object.__setattr__(self, "d", d)

    @property
    def g(self) -> int:
        return len(self.d)

    @property
    def is_canonical(self) -> bool:
        """True when d_i divides d_(i+1) for every i."""
        return all(b % a == 0 for a, b in zip(self.d, self.d[1:]))

    @property
    def is_principal(self) -> bool:
        return all(x == 1 for x in self.d)

    @property
    def content(self) -> int:
        c = 0
        for x in self.d:
            c = gcd(c, x)
        return c

    def diag(self) -> np.ndarray:
        E = latalg.zeros(self.g, self.g, Fraction(0))
        for i, x in enumerate(self.d):
            E[i, i] = Fraction(x)
        return E

    def alternating(self) -> np.ndarray:
        return latalg.alternating_form(self.d)

    def scaled(self, c: int) -> "PolarizationType":
        if any(x % c for x in self.d):
            raise ValueError(f"{c} does not divide every entry of {self.d}")
        return PolarizationType(tuple(x // c for x in self.d))

    def __str__(self):
        return "(" + ",".join(str(x) for x in self.d) + ")"


@dataclass(eq=False)
class PolarizedAV:
    """Validated period data ``Π = (E Z)``; build instances with :func:`build_period`."""

    ptype: PolarizationType
    Z: np.ndarray
    label: str = ""
    precision: int = DEFAULT_PRECISION
    mode: str = "exact"
    content: int = 1
    meta: dict = field(default_factory=dict)

    @property
    def g(self) -> int:
        return self.ptype.g

    @property
    def E(self) -> np.ndarray:
        E = self.ptype.diag()
        if self.mode == "float":
            return to_mpc_matrix(E, self.precision)
        return E

    @property
    def Pi(self) -> np.ndarray:
        return np.concatenate([self.E, self.Z], axis=1)

    @property
    def J(self) -> np.ndarray:
        return self.ptype.alternating()

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    def primitive(self) -> "PolarizedAV":
        """Divide the content out of ``Π``; returns ``self`` when it is already 1."""
        c = self.content
        if c == 1:
            return self
        Z = np.empty(self.Z.shape, dtype=object)
        for idx, x in np.ndenumerate(self.Z):
            Z[idx] = x / c if self.is_exact else x / mpmath.mpf(c)
        return build_period(self.ptype.scaled(c), Z, label=self.label, precision=self.precision)

    def __repr__(self):
        return f"PolarizedAV(g={self.g}, type={self.ptype}, mode={self.mode}, label={self.label!r})"


@dataclass(eq=False)
class RationalEndomorphism:
    host: PolarizedAV
    M: np.ndarray

    def analytic(self) -> np.ndarray:
        return analytic_from_rational(self.host, self.host, self.M)


# ----------------------------------------------------------------- validation


def _check_symmetric(Z: np.ndarray, mode: str, precision: int) -> None:
    n = Z.shape[0]
    if mode == "exact":
        for i in range(n):
            for j in range(i + 1, n):
                if not Z[i, j] == Z[j, i]:
                    raise NotSymmetric(f"Z[{i},{j}] != Z[{j},{i}]")
        return
    with mp.workprec(precision):
        tol = mpmath.ldexp(1, -precision + 16) * max(1, max_abs(Z, precision))
        for i in range(n):
            for j in range(i + 1, n):
                if abs(Z[i, j] - Z[j, i]) > tol:
                    raise NotSymmetric(f"Z[{i},{j}] and Z[{j},{i}] differ beyond tolerance")


def _rational_pd(B: np.ndarray) -> bool:
    n = B.shape[0]
    return all(latalg.det(B[:k, :k]) > 0 for k in range(1, n + 1))


def _iv_det(rows) -> "iv.mpf":
    a = [list(r) for r in rows]
    n = len(a)
    result = iv.mpf(1)
    for c in range(n):
        piv = a[c][c]
        if piv.a <= 0 <= piv.b:
            return iv.mpf([-1, 1]) * mpmath.inf
        result = result * piv
        for i in range(c + 1, n):
            f = a[i][c] / piv
            for j in range(c, n):
                a[i][j] = a[i][j] - f * a[c][j]
    return result


def _interval_pd(Z: np.ndarray, precision: int) -> bool:
    """Certify Im Z ≻ 0 by interval enclosures of the leading minors."""
    n = Z.shape[0]
    work = precision + 64
    with mp.workprec(work):
        im = [[to_mpc(Z[i, j]).imag for j in range(n)] for i in range(n)]
    iv.prec = work
    radius = mpmath.ldexp(1, -precision)
    box = [[iv.mpf([x - radius * (1 + abs(x)), x + radius * (1 + abs(x))]) for x in row] for row in im]
    for k in range(1, n + 1):
        m = _iv_det([row[:k] for row in box[:k]])
        if not m.a > 0:
            return False
    return True


def _check_positive_definite(Z: np.ndarray, mode: str, precision: int) -> None:
    n = Z.shape[0]
    if mode == "exact":
        parts = [real_imag_rational(x) for x in Z.flat]
        if all(p is not None for p in parts):
            B = latalg.zeros(n, n, Fraction(0))
            for k, p in enumerate(parts):
                B[k // n, k % n] = p[1]
            # Im Z = √|D|·B with one D for the whole matrix
            if not _rational_pd(B):
                raise NotPositiveDefinite("Im Z is not positive definite (exact minors)")
            return
        if not _interval_pd(Z, precision):
            raise NotPositiveDefinite("could not certify Im Z positive definite by interval minors")
        return
    with mp.workprec(precision):
        im = latalg.zeros(n, n)
        for idx, x in np.ndenumerate(Z):
            im[idx] = mpmath.mpc(x).imag
        bound = 10 * mpmath.ldexp(1, -(precision // 2))
        from .matrices import leading_minors_float

        minors = leading_minors_float(im, precision)
        if not all(m > bound for m in minors):
            raise NotPositiveDefinite("Im Z has a leading minor below the certification bound")


def build_period(E, Z, label: str = "", precision: int = DEFAULT_PRECISION) -> PolarizedAV:
    """Validate ``(E, Z)`` and return a :class:`PolarizedAV`.

    ``E`` is a :class:`PolarizationType` or a sequence of positive integers.
    ``Z`` must be square, symmetric and have positive definite imaginary part.
    The gcd of the type entries is recorded as ``content``; use
    :meth:`PolarizedAV.primitive` for the divided-out form.
    """
    ptype = E if isinstance(E, PolarizationType) else PolarizationType(tuple(E))
    Z = as_matrix(Z)
    if Z.shape != (ptype.g, ptype.g):
        raise ValueError(f"Z has shape {Z.shape}, expected {(ptype.g, ptype.g)}")
    mode, (Z,) = common_mode(Z, precision=precision)
    _check_symmetric(Z, mode, precision)
    _check_positive_definite(Z, mode, precision)
    content = ptype.content
    if content > 1:
        log.info(
            "period matrix of %s has content %d; primitive form has type %s",
            label or "variety", content, ptype.scaled(content),
        )
    return PolarizedAV(ptype=ptype, Z=Z, label=label, precision=precision, mode=mode, content=content)


def _integer_entry(x) -> int | None:
    if isinstance(x, NumberFieldElement):
        if not x.is_rational():
            return None
        x = x.rational()
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else None
    z = mpmath.mpc(x)
    n = int(mpmath.nint(z.real))
    if abs(z - n) > mpmath.mpf("1e-20"):
        return None
    return n


def from_period_matrix(Pi, label: str = "", precision: int = DEFAULT_PRECISION) -> PolarizedAV:
    """Split ``Π = (E Z)`` with ``E`` a positive integer diagonal matrix."""
    Pi = as_matrix(Pi)
    g = Pi.shape[0]
    if Pi.shape[1] != 2 * g:
        raise ValueError(f"period matrix must be g×2g, got {Pi.shape}")
    d = []
    for i in range(g):
        for j in range(g):
            q = _integer_entry(Pi[i, j])
            if q is None or (i != j and q != 0):
                raise ValueError("left block of the period matrix is not an integer diagonal matrix")
            if i == j:
                if q <= 0:
                    raise ValueError(f"diagonal entry {q} is not a positive integer")
                d.append(q)
    return build_period(PolarizationType(tuple(d)), Pi[:, g:], label=label, precision=precision)


# ------------------------------------------------------------ Hurwitz relation


def analytic_from_rational(src: PolarizedAV, dst: PolarizedAV, M) -> np.ndarray:
    """The complex matrix C with ``C·Π_src = Π_dst·M``.

    ``M`` is ``2g_dst × 2g_src`` rational. C is read off the first ``g_src``
    columns, where ``Π_src`` has the invertible block ``E``, then the remaining
    columns are checked.
    """
    M = latalg.rat_matrix(M)
    g, gd = src.g, dst.g
    if M.shape != (2 * gd, 2 * g):
        raise ValueError(f"M has shape {M.shape}, expected {(2 * gd, 2 * g)}")
    precision = min(src.precision, dst.precision)
    mode, (Psrc, Pdst) = common_mode(src.Pi, dst.Pi, precision=precision)
    if mode == "float":
        Mf = to_mpc_matrix(M, precision)
        with mp.workprec(precision):
            R = Pdst.dot(Mf)
            C = np.empty((gd, g), dtype=object)
            for i in range(gd):
                for j in range(g):
                    C[i, j] = R[i, j] / src.ptype.d[j]
            resid = max_abs(C.dot(Psrc) - R, precision)
            tol = float_tolerance(precision, max_abs(Pdst, precision) * max_abs(Mf, precision))
        if resid > tol:
            raise NoSolution(f"M is not complex-linear (residual {mpmath.nstr(resid, 5)})")
        return C
    R = Pdst.dot(M)
    C = np.empty((gd, g), dtype=object)
    for i in range(gd):
        for j in range(g):
            C[i, j] = R[i, j] / src.ptype.d[j]
    if not mat_eq(C.dot(Psrc), R):
        raise NoSolution("M is not complex-linear for these period matrices")
    return C


def hurwitz_residual(C, Pi_src, Pi_dst, M, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Max-norm of ``C·Π_src − Π_dst·M``; exactly 0 when an exact relation holds."""
    mode, (C, Ps, Pd, M) = common_mode(C, Pi_src, Pi_dst, M, precision=precision)
    if mode == "exact":
        diff = C.dot(Ps) - Pd.dot(M)
        if is_zero_matrix(diff):
            return mpmath.mpf(0)
        return max_abs(diff, precision)
    with mp.workprec(precision):
        return max_abs(C.dot(Ps) - Pd.dot(M), precision)


def isogeny_degree(M) -> int:
    """|det M| for an integral square matrix."""
    M = latalg.int_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("isogeny degree needs a square matrix")
    return abs(int(latalg.det(M)))


def check_polarization_pullback(M, J_src, J_expected) -> bool:
    """True iff ``Mᵗ·J_src·M == J_expected`` exactly."""
    M = latalg.rat_matrix(M)
    J_src = latalg.rat_matrix(J_src)
    J_expected = latalg.rat_matrix(J_expected)
    lhs = M.T.dot(J_src).dot(M)
    return mat_eq(lhs, J_expected)
