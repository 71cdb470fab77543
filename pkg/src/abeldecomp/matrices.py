"""Helpers for matrices of exact or big-float scalars.

A matrix is kept homogeneous: either every entry is exact (``Fraction`` or a
number-field element of one field) or every entry is an ``mpmath.mpc``. Mixing
happens only through :func:`common_mode`, which converts all inputs at once.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp

from .numerics import DEFAULT_PRECISION, NumberFieldElement, is_exact, to_mpc, unify


def as_matrix(rows) -> np.ndarray:
    """Object array from nested lists; strings and ints become ``Fraction``."""
    arr = np.asarray(rows, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        if isinstance(x, (bool, np.bool_)):
            raise TypeError("boolean matrix entry")
        if isinstance(x, (int, np.integer)):
            x = Fraction(int(x))
        elif isinstance(x, str):
            x = Fraction(x)
        elif isinstance(x, (float, complex)):
            x = mpmath.mpc(x)
        out[idx] = x
    return out


def common_mode(*mats, precision: int = DEFAULT_PRECISION):
    """Convert matrices to one scalar kind.

    Returns ``(mode, converted)`` where ``mode`` is ``"exact"`` or ``"float"``.
    """
    mats = [as_matrix(m) for m in mats]
    flat = [x for m in mats for x in m.flat]
    field, vals = unify(flat, precision)
    out = []
    pos = 0
    for m in mats:
        n = m.size
        c = np.empty(m.shape, dtype=object)
        for k, idx in enumerate(np.ndindex(m.shape)):
            c[idx] = vals[pos + k]
        pos += n
        out.append(c)
    return ("float" if field == "float" else "exact"), out


def is_exact_matrix(M) -> bool:
    return all(is_exact(x) for x in np.asarray(M, dtype=object).flat)


def to_mpc_matrix(M, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    M = np.asarray(M, dtype=object)
    out = np.empty(M.shape, dtype=object)
    with mp.workprec(precision):
        for idx, x in np.ndenumerate(M):
            out[idx] = to_mpc(x) if is_exact(x) else mpmath.mpc(x)
    return out


def max_abs(M, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    M = np.asarray(M, dtype=object)
    with mp.workprec(precision):
        return max((abs(to_mpc(x) if is_exact(x) else mpmath.mpc(x)) for x in M.flat), default=mpmath.mpf(0))


def is_zero_matrix(M) -> bool:
    return all(x == 0 for x in np.asarray(M, dtype=object).flat)


def mat_eq(A, B) -> bool:
    A, B = np.asarray(A, dtype=object), np.asarray(B, dtype=object)
    return A.shape == B.shape and all(a == b for a, b in zip(A.flat, B.flat))


def real_imag_rational(x):
    """Exact (Re, Im/√|D|, D) of an element of ℚ or an imaginary quadratic field.

    Returns ``None`` when the entry is not of that shape.
    """
    if isinstance(x, Fraction):
        return x, Fraction(0), None
    if isinstance(x, NumberFieldElement):
        if x.is_rational():
            return x.rational(), Fraction(0), None
        if x.field.is_imaginary_quadratic:
            return x.coeffs[0], x.coeffs[1], x.field.quadratic_d
    return None


def mp_solve(A, B, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    """Solve A X = B numerically for full-column-rank A (normal equations)."""
    A = to_mpc_matrix(A, precision)
    B = to_mpc_matrix(B, precision)
    with mp.workprec(precision):
        mA = mpmath.matrix(A.tolist())
        mB = mpmath.matrix(B.tolist())
        AH = mA.H
        N = AH * mA
        rhs = AH * mB
        out = np.empty((A.shape[1], B.shape[1]), dtype=object)
        for j in range(B.shape[1]):
            col = mpmath.lu_solve(N, rhs[:, j])
            for i in range(A.shape[1]):
                out[i, j] = mpmath.mpc(col[i])
        return out


def leading_minors_float(M, precision: int) -> list[mpmath.mpf]:
    """Leading principal minors of a real matrix of mpf values."""
    with mp.workprec(precision):
        n = M.shape[0]
        return [mpmath.det(mpmath.matrix([[M[i, j] for j in range(k)] for i in range(k)])) for k in range(1, n + 1)]
