"""Exact integer and rational matrix algorithms.

Matrices are numpy object arrays holding Python ``int``, ``fractions.Fraction``
or number-field elements, so every operation below is exact. Nothing here
touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

from .errors import DegenerateForm, InconsistentSystem, NonIntegral, RankMismatch

__all__ = [
    "matrix",
    "int_matrix",
    "rat_matrix",
    "identity",
    "zeros",
    "alternating_form",
    "is_integral",
    "det",
    "rank",
    "rref",
    "nullspace",
    "inverse",
    "solve_exact",
    "hermite_form",
    "elementary_divisors",
    "integer_kernel",
    "saturate",
    "same_lattice",
    "frobenius_symplectic_basis",
    "lll_reduce",
]


# ---------------------------------------------------------------- construction


def matrix(rows) -> np.ndarray:
    """Copy ``rows`` into a 2-d object array without changing the entry types."""
    a = np.empty((len(rows), len(rows[0]) if len(rows) else 0), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            a[i, j] = x
    return a


def _to_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    raise TypeError(f"not a rational entry: {x!r}")


def rat_matrix(rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=object)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    out = np.empty(rows.shape, dtype=object)
    for idx, x in np.ndenumerate(rows):
        out[idx] = _to_rational(x)
    return out


def int_matrix(rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=object)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    out = np.empty(rows.shape, dtype=object)
    for idx, x in np.ndenumerate(rows):
        q = _to_rational(x)
        if q.denominator != 1:
            raise NonIntegral(f"entry {idx} = {q} is not an integer")
        out[idx] = q.numerator
    return out


def identity(n: int, one=1) -> np.ndarray:
    a = zeros(n, n)
    for i in range(n):
        a[i, i] = one
    return a


def zeros(m: int, n: int, zero=0) -> np.ndarray:
    a = np.empty((m, n), dtype=object)
    a.fill(zero)
    return a


def alternating_form(d: Sequence[int]) -> np.ndarray:
    """The block matrix [[0, D], [-D, 0]] with D = diag(d)."""
    h = len(d)
    J = zeros(2 * h, 2 * h)
    for i, di in enumerate(d):
        J[i, h + i] = int(di)
        J[h + i, i] = -int(di)
    return J


def is_integral(M) -> bool:
    for x in np.asarray(M, dtype=object).flat:
        if isinstance(x, Fraction):
            if x.denominator != 1:
                return False
        elif not isinstance(x, (int, np.integer)):
            return False
    return True


def _is_zero(x) -> bool:
    return x == 0


# ------------------------------------------------------------ field elimination


def rref(M, aug=None):
    """Reduced row echelon form over the field generated by the entries.

    Returns ``(R, pivots, A)`` where ``A`` is ``aug`` transformed by the same row
    operations (``None`` when no augmentation is given).
    """
    R = np.array(M, dtype=object, copy=True)
    for idx, x in np.ndenumerate(R):
        if isinstance(x, (int, np.integer)):
            R[idx] = Fraction(int(x))
    A = None if aug is None else np.array(aug, dtype=object, copy=True)
    if A is not None:
        for idx, x in np.ndenumerate(A):
            if isinstance(x, (int, np.integer)):
                A[idx] = Fraction(int(x))
    m, n = R.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if not _is_zero(R[i, c])), None)
        if p is None:
            continue
        if p != r:
            R[[r, p]] = R[[p, r]]
            if A is not None:
                A[[r, p]] = A[[p, r]]
        inv = 1 / R[r, c]
        R[r] = R[r] * inv
        if A is not None:
            A[r] = A[r] * inv
        for i in range(m):
            if i != r and not _is_zero(R[i, c]):
                t = R[i, c]
                R[i] = R[i] - t * R[r]
                if A is not None:
                    A[i] = A[i] - t * A[r]
        pivots.append(c)
        r += 1
    return R, pivots, A


def rank(M) -> int:
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return 0
    return len(rref(M)[1])


def nullspace(M) -> np.ndarray:
    """Basis of {x : M x = 0} as the columns of an n×k matrix."""
    M = np.asarray(M, dtype=object)
    n = M.shape[1]
    R, pivots, _ = rref(M)
    free = [c for c in range(n) if c not in pivots]
    basis = zeros(n, len(free), Fraction(0))
    for k, fc in enumerate(free):
        basis[fc, k] = Fraction(1)
        for r, pc in enumerate(pivots):
            basis[pc, k] = -R[r, fc]
    return basis


def solve_exact(A, B) -> np.ndarray:
    """Solve ``A X = B`` exactly; free variables are set to zero.

    Raises InconsistentSystem with a left-kernel certificate when no solution
    exists.
    """
    A = np.asarray(A, dtype=object)
    B = np.asarray(B, dtype=object)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    m, n = A.shape
    k = B.shape[1]
    aug = np.concatenate([B, identity(m)], axis=1)
    R, pivots, T = rref(A, aug)
    rk = len(pivots)
    for i in range(rk, m):
        if any(not _is_zero(x) for x in T[i, :k]):
            raise InconsistentSystem(
                "linear system is inconsistent", certificate=list(T[i, k:])
            )
    X = zeros(n, k, Fraction(0))
    for r, c in enumerate(pivots):
        X[c] = T[r, :k]
    return X


def inverse(M) -> np.ndarray:
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    R, pivots, A = rref(M, identity(n))
    if len(pivots) != n:
        raise ZeroDivisionError("matrix is singular")
    return A


def det(M):
    """Determinant by fraction-free Bareiss elimination.

    Integer input gives an exact ``int``; rational input is scaled row-wise to
    integers first. Other entry types fall back to field elimination.
    """
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    if n == 0:
        return 1
    if all(isinstance(x, (int, np.integer, Fraction)) for x in M.flat):
        scale = Fraction(1)
        rows = []
        for i in range(n):
            row = [_to_rational(x) for x in M[i]]
            den = 1
            for x in row:
                den = den * x.denominator // gcd(den, x.denominator)
            scale /= den
            rows.append([int(x * den) for x in row])
        d = _bareiss(rows)
        return d if scale == 1 else d * scale
    R = np.array(M, dtype=object, copy=True)
    sign = 1
    result = None
    for c in range(n):
        p = next((i for i in range(c, n) if not _is_zero(R[i, c])), None)
        if p is None:
            return R[0, 0] * 0
        if p != c:
            R[[c, p]] = R[[p, c]]
            sign = -sign
        piv = R[c, c]
        result = piv if result is None else result * piv
        for i in range(c + 1, n):
            if not _is_zero(R[i, c]):
                R[i] = R[i] - (R[i, c] / piv) * R[c]
    return result if sign == 1 else -result


def _bareiss(a: list[list[int]]) -> int:
    n = len(a)
    a = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ------------------------------------------------------------ integer lattices


def hermite_form(M) -> tuple[np.ndarray, np.ndarray]:
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``H = U·M``, ``U`` unimodular, ``H`` in echelon form
    with positive pivots and the entries above each pivot reduced into
    ``[0, pivot)``. Zero rows sit at the bottom.
    """
    M = int_matrix(M)
    m, n = M.shape
    A = [[int(x) for x in row] for row in M]
    U = [[int(i == j) for j in range(m)] for i in range(m)]

    def sub(i, j, q):  # row_i -= q * row_j
        if q:
            A[i] = [x - q * y for x, y in zip(A[i], A[j])]
            U[i] = [x - q * y for x, y in zip(U[i], U[j])]

    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: (abs(A[i][c]), i))
            if p != r:
                A[r], A[p] = A[p], A[r]
                U[r], U[p] = U[p], U[r]
            done = True
            for i in range(r + 1, m):
                if A[i][c]:
                    sub(i, r, A[i][c] // A[r][c])
                    if A[i][c]:
                        done = False
            if done:
                break
        if all(A[i][c] == 0 for i in range(r, m)):
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            sub(i, r, A[i][c] // A[r][c])
        r += 1
    return int_matrix(A) if m else zeros(0, n), int_matrix(U) if m else zeros(0, 0)


def elementary_divisors(M) -> list[int]:
    """Invariant factors of an integer matrix, d₁ | d₂ | …, zeros trailing."""
    M = int_matrix(M)
    m, n = M.shape
    A = [[int(x) for x in row] for row in M]
    diag = []
    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        A[t], A[pi] = A[pi], A[t]
        for row in A:
            row[t], row[pj] = row[pj], row[t]
        while True:
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                    if A[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    for row in A:
                        row[j] -= q * row[t]
                    if A[t][j]:
                        clean = False
            if clean:
                break
            nz = [(abs(A[i][t]), i, t) for i in range(t, m) if A[i][t]]
            nz += [(abs(A[t][j]), t, j) for j in range(t, n) if A[t][j]]
            _, pi, pj = min(nz)
            A[t], A[pi] = A[pi], A[t]
            for row in A:
                row[t], row[pj] = row[pj], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    # diag(a, b) ~ diag(gcd, lcm) restores the divisibility chain
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            g = gcd(diag[i], diag[j])
            if g:
                diag[i], diag[j] = g, diag[i] * diag[j] // g
    return diag + [0] * (min(m, n) - len(diag))


def integer_kernel(A) -> np.ndarray:
    """ℤ-basis of {x ∈ ℤⁿ : A x = 0}, as columns."""
    A = int_matrix(A)
    m, n = A.shape
    if m == 0:
        return identity(n)
    H, U = hermite_form(A.T)
    rows = [i for i in range(n) if all(x == 0 for x in H[i])]
    if not rows:
        return zeros(n, 0)
    return U[rows].T.copy()


def _clear_denominators(cols: np.ndarray) -> np.ndarray:
    out = zeros(*cols.shape)
    for j in range(cols.shape[1]):
        col = [_to_rational(x) for x in cols[:, j]]
        den = 1
        for x in col:
            den = den * x.denominator // gcd(den, x.denominator)
        for i, x in enumerate(col):
            out[i, j] = int(x * den)
    return out


def _hnf_columns(S: np.ndarray) -> np.ndarray:
    if S.shape[1] == 0:
        return S
    H, _ = hermite_form(S.T)
    keep = [i for i in range(H.shape[0]) if any(x != 0 for x in H[i])]
    return H[keep].T.copy()


def saturate(cols, rank: int | None = None) -> np.ndarray:
    """ℤ-basis of span_ℚ(cols) ∩ ℤⁿ (the pure sublattice), as columns.

    Computed as the integer kernel of the integer kernel of the transpose, then
    put in Hermite form so the output is canonical.
    """
    C = rat_matrix(cols)
    n = C.shape[0]
    C = _clear_denominators(C)
    K = integer_kernel(C.T)
    S = identity(n) if K.shape[1] == 0 else integer_kernel(K.T)
    S = _hnf_columns(S)
    if rank is not None and S.shape[1] != rank:
        raise RankMismatch(f"declared rank {rank}, computed {S.shape[1]}")
    return S


def same_lattice(A, B) -> bool:
    """Whether the columns of A and B span the same ℤ-lattice."""
    A, B = int_matrix(A), int_matrix(B)
    if A.shape[0] != B.shape[0]:
        return False
    HA, HB = _hnf_columns(A), _hnf_columns(B)
    return HA.shape == HB.shape and bool((HA == HB).all())


def frobenius_symplectic_basis(basis, J) -> tuple[np.ndarray, list[int]]:
    """Symplectic basis of the lattice spanned by ``basis`` for the form ``J``.

    Returns ``(S, D)`` with ``Sᵗ·J·S = [[0, diag(D)], [-diag(D), 0]]``,
    D₁ | D₂ | …, and S spanning the same lattice as ``basis``.

    Pivots on the pair with the smallest nonzero |form value|, lowest column
    indices first, so the output is deterministic.
    """
    basis = int_matrix(basis)
    J = int_matrix(J)
    B = basis.T.dot(J).dot(basis)
    k = B.shape[0]
    if k % 2:
        raise DegenerateForm("odd number of basis vectors")
    Bl = [[int(x) for x in row] for row in B]

    def form(x, y):
        return sum(xi * sum(Bl[i][j] * yj for j, yj in enumerate(y) if yj) for i, xi in enumerate(x) if xi)

    def comb(x, a, y, b=1):
        return [b * xi + a * yi for xi, yi in zip(x, y)]

    vecs = [[int(i == j) for j in range(k)] for i in range(k)]
    firsts, seconds, D = [], [], []
    while vecs:
        while True:
            best = None
            for i in range(len(vecs)):
                for j in range(i + 1, len(vecs)):
                    v = form(vecs[i], vecs[j])
                    if v and (best is None or abs(v) < abs(best[2])):
                        best = (i, j, v)
            if best is None:
                raise DegenerateForm("restricted alternating form is singular")
            i, j, d = best
            if d < 0:
                i, j, d = j, i, -d
            e, f = vecs[i], vecs[j]
            others = [t for t in range(len(vecs)) if t not in (i, j)]
            restart = False
            for t in others:
                a, b = form(e, vecs[t]), form(f, vecs[t])
                if a % d:
                    vecs[t] = comb(vecs[t], -(a // d), f)
                    restart = True
                    break
                if b % d:
                    vecs[t] = comb(vecs[t], b // d, e)
                    restart = True
                    break
            if restart:
                continue
            for t in others:
                a, b = form(e, vecs[t]), form(f, vecs[t])
                vecs[t] = [w + (b // d) * x - (a // d) * y for w, x, y in zip(vecs[t], e, f)]
            bad = next(
                ((s, t) for s in others for t in others if s < t and form(vecs[s], vecs[t]) % d),
                None,
            )
            if bad is not None:
                s, t = bad
                vecs[i] = comb(e, 1, vecs[s])
                r = form(vecs[i], vecs[t])
                # leaves a value in (0, d): the minimum strictly drops
                vecs[t] = comb(vecs[t], -(r // d), f)
                continue
            break
        firsts.append(e)
        seconds.append(f)
        D.append(d)
        vecs = [vecs[t] for t in others]
    T = int_matrix(np.array(firsts + seconds, dtype=object).T)
    return basis.dot(T), D


# ------------------------------------------------------------------------ LLL


def lll_reduce(rows, delta: Fraction = Fraction(3, 4)) -> list[list[int]]:
    """LLL-reduce linearly independent integer row vectors (exact arithmetic)."""
    b = [[int(x) for x in row] for row in rows]
    n = len(b)
    if n <= 1:
        return b

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    mu = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n
    bstar = []
    for i in range(n):
        v = [Fraction(x) for x in b[i]]
        for j in range(i):
            mu[i][j] = Fraction(dot(b[i], bstar[j])) / B[j] if B[j] else Fraction(0)
            v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
        bstar.append(v)
        B[i] = dot(v, v)
        if B[i] == 0:
            raise ValueError("LLL input rows are linearly dependent")

    def red(k, l):
        if abs(mu[k][l]) > Fraction(1, 2):
            q = round(mu[k][l])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            mu[k][l] -= q
            for i in range(l):
                mu[k][i] -= q * mu[l][i]

    k = 1
    while k < n:
        red(k, k - 1)
        if B[k] < (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            m = mu[k][k - 1]
            Bn = B[k] + m * m * B[k - 1]
            b[k], b[k - 1] = b[k - 1], b[k]
            for j in range(k - 1):
                mu[k][j], mu[k - 1][j] = mu[k - 1][j], mu[k][j]
            mu[k][k - 1] = m * B[k - 1] / Bn
            B[k] = B[k - 1] * B[k] / Bn
            B[k - 1] = Bn
            for i in range(k + 1, n):
                t = mu[i][k]
                mu[i][k] = mu[i][k - 1] - m * t
                mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b
