"""Finite group actions on polarized abelian varieties.

A group acts through integral symplectic matrices on the lattice. This module
averages over subgroups to get idempotents, restricts the action to a stable
sublattice, and finds the Riemann matrices fixed by the restricted action.

For a restricted generator with blocks ``[[α, μ], [γ, δ]]`` (each h×h) and type
``D``, a Riemann matrix ``Z`` is fixed when

    Z·γ·D⁻¹·Z + D·α·D⁻¹·Z − Z·δ − D·μ = 0,

and the analytic representation is then ``(D·α + Z·γ)·D⁻¹``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mp

from . import latalg
from .errors import NoSolutionFound, NotClosed, NotFixed, NotStable, NotSymplectic, InconsistentSystem
from .matrices import as_matrix, common_mode, is_zero_matrix, max_abs, to_mpc_matrix
from .numerics import DEFAULT_PRECISION, recognize_algebraic, unify
from .pav import PolarizationType, float_tolerance

log = logging.getLogger(__name__)

SEED = 0x5EED
N_STARTS = 32
MAX_H = 6

__all__ = [
    "SymplecticRep",
    "RestrictedRep",
    "FixedPoint",
    "FixedLocus",
    "subgroup_idempotent",
    "restrict_action",
    "fixed_riemann",
    "fixed_residuals",
    "restricted_analytic",
]


def _key(M) -> tuple:
    return tuple(int(x) for x in np.asarray(M, dtype=object).flat)


@dataclass(eq=False)
class SymplecticRep:
    """Integral matrices preserving ``J``; ``elements`` optionally lists the whole group."""

    J: np.ndarray
    generators: list
    elements: list | None = None

    def __post_init__(self):
        self.J = latalg.int_matrix(self.J)
        self.generators = [latalg.int_matrix(N) for N in self.generators]
        if self.elements is not None:
            self.elements = [latalg.int_matrix(N) for N in self.elements]
        for k, N in enumerate(self.generators):
            if N.shape != self.J.shape:
                raise ValueError(f"generator {k} has shape {N.shape}, form has {self.J.shape}")
            if not _preserves(N, self.J):
                raise NotSymplectic(f"generator {k} does not preserve the alternating form")

    @property
    def g(self) -> int:
        return self.J.shape[0] // 2


@dataclass(eq=False)
class RestrictedRep:
    """Action on a stable sublattice with symplectic basis ``P`` and type ``D``.

    ``scale`` is c > 1 when ``D = (c, ..., c)``; fixed points are then computed
    for the principal type, see :attr:`working_type`.
    """

    D: PolarizationType
    P: np.ndarray
    generators: list
    scale: int = 1

    @property
    def h(self) -> int:
        return self.D.g

    @property
    def working_type(self) -> PolarizationType:
        return self.D.scaled(self.scale) if self.scale > 1 else self.D


def _preserves(N, J) -> bool:
    return bool((N.T.dot(J).dot(N) == J).all())


def subgroup_idempotent(elements: Sequence) -> np.ndarray:
    """Average of a finite matrix group: ``(1/n)·Σ N``.

    The list must be closed under products; duplicates are ignored.
    """
    mats = {}
    for N in elements:
        N = latalg.int_matrix(N)
        mats.setdefault(_key(N), N)
    if not mats:
        raise ValueError("empty element list")
    group = list(mats.values())
    for A in group:
        for B in group:
            if _key(A.dot(B)) not in mats:
                raise NotClosed("element list is not closed under multiplication")
    n = len(group)
    total = group[0].copy()
    for N in group[1:]:
        total = total + N
    p = latalg.rat_matrix(total) / n
    if not (p.dot(p) == p).all():
        raise NotClosed("average is not idempotent; the list is not a group")
    return p


def restrict_action(rep: SymplecticRep, P, D, primitive: bool = True) -> RestrictedRep:
    """Solve ``N·P = P·X`` for every generator ``N``.

    ``P`` must be a saturated symplectic basis (columns) of type ``D`` for
    ``rep.J``; each ``X`` must come out integral and symplectic for ``J_D``.
    """
    P = latalg.int_matrix(P)
    D = D if isinstance(D, PolarizationType) else PolarizationType(tuple(D))
    if P.shape != (rep.J.shape[0], 2 * D.g):
        raise ValueError(f"P has shape {P.shape}, expected {(rep.J.shape[0], 2 * D.g)}")
    JD = D.alternating()
    if not (P.T.dot(rep.J).dot(P) == JD).all():
        raise ValueError("columns of P are not a symplectic basis of the stated type")
    if not latalg.same_lattice(latalg.saturate(P), P):
        raise ValueError("columns of P do not span a saturated lattice")
    gens = []
    for k, N in enumerate(rep.generators):
        try:
            X = latalg.solve_exact(P, N.dot(P))
        except InconsistentSystem as exc:
            raise NotStable(f"generator {k} does not preserve the sublattice") from exc
        if not latalg.is_integral(X):
            raise NotStable(f"generator {k} restricts to a non-integral matrix")
        X = latalg.int_matrix(X)
        if not _preserves(X, JD):
            raise NotSymplectic(f"restriction of generator {k} is not symplectic")
        gens.append(X)
    scale = 1
    if primitive and len(set(D.d)) == 1 and D.d[0] > 1:
        scale = D.d[0]
        log.info("restricted type %s: fixed points computed for the principal type, scale %d", D, scale)
    return RestrictedRep(D=D, P=P, generators=gens, scale=scale)


# --------------------------------------------------------------- fixed points


@dataclass
class FixedPoint:
    Z: np.ndarray
    exact: bool
    residuals: list
    recognized: bool = True


@dataclass
class FixedLocus:
    """Outcome of :func:`fixed_riemann`.

    ``kind`` is ``"point"``, ``"finite"`` or ``"family"``. For a family,
    ``points`` are sample points and ``dimension`` estimates the dimension of
    the fixed locus near them.
    """

    kind: str
    points: list
    D: PolarizationType
    scale: int = 1
    dimension: int = 0
    constraints: list = field(default_factory=list)

    @property
    def family(self) -> bool:
        return self.kind == "family"


def _blocks(X, h):
    return X[:h, :h], X[:h, h:], X[h:, :h], X[h:, h:]


def _coefficients(rep: RestrictedRep):
    """Per generator: (α', γ', δ, Dμ) with α' = DαD⁻¹ and γ' = γD⁻¹ as rationals."""
    D = rep.working_type
    h = D.g
    Dm = D.diag()
    Dinv = latalg.inverse(Dm)
    out = []
    for X in rep.generators:
        a, m, c, d = _blocks(latalg.rat_matrix(X), h)
        out.append((Dm.dot(a).dot(Dinv), c.dot(Dinv), d, Dm.dot(m)))
    return out


def _equation(Z, coeffs):
    ap, gp, d, Dm = coeffs
    return Z.dot(gp).dot(Z) + ap.dot(Z) - Z.dot(d) - Dm


def fixed_residuals(rep: RestrictedRep, Z, precision: int = DEFAULT_PRECISION) -> list:
    """Max-norm residual of the fixed-point equation for each generator."""
    coeffs = _coefficients(rep)
    res = []
    for co in coeffs:
        mode, mats = common_mode(Z, *co, precision=precision)
        if mode == "exact":
            E = _equation(mats[0], mats[1:])
            res.append(mpmath.mpf(0) if is_zero_matrix(E) else max_abs(E, precision))
        else:
            with mp.workprec(precision):
                res.append(max_abs(_equation(mats[0], mats[1:]), precision))
    return res


def _sym_index(h):
    return [(i, j) for i in range(h) for j in range(i, h)]


def _np_system(coeffs_f, Z):
    """Residual vector and Jacobian (holomorphic, complex) at ``Z`` in double precision."""
    h = Z.shape[0]
    idx = _sym_index(h)
    F = []
    for ap, gp, d, Dm in coeffs_f:
        F.append((Z @ gp @ Z + ap @ Z - Z @ d - Dm).ravel())
    F = np.concatenate(F) if F else np.zeros(0, dtype=complex)
    Jac = np.zeros((F.size, len(idx)), dtype=complex)
    for k, (i, j) in enumerate(idx):
        Ekl = np.zeros((h, h), dtype=complex)
        Ekl[i, j] = Ekl[j, i] = 1
        col = [(Ekl @ gp @ Z + Z @ gp @ Ekl + ap @ Ekl - Ekl @ d).ravel() for ap, gp, d, _ in coeffs_f]
        Jac[:, k] = np.concatenate(col) if col else np.zeros(0)
    return F, Jac


def _mp_system(coeffs_m, Z, h):
    idx = _sym_index(h)
    F = []
    for ap, gp, d, Dm in coeffs_m:
        F.extend((Z * gp * Z + ap * Z - Z * d - Dm)[i, j] for i in range(h) for j in range(h))
    Jac = mpmath.matrix(len(F), len(idx))
    for k, (i, j) in enumerate(idx):
        Ekl = mpmath.zeros(h, h)
        Ekl[i, j] = 1
        Ekl[j, i] = 1
        r = 0
        for ap, gp, d, _ in coeffs_m:
            block = Ekl * gp * Z + Z * gp * Ekl + ap * Ekl - Ekl * d
            for a in range(h):
                for b in range(h):
                    Jac[r, k] = block[a, b]
                    r += 1
    return mpmath.matrix(F), Jac


def _in_siegel_np(Z) -> bool:
    Y = (Z.imag + Z.imag.T) / 2
    return bool(np.all(np.linalg.eigvalsh(Y) > 1e-8))


def _newton_double(coeffs_f, Z0, steps: int = 80):
    h = Z0.shape[0]
    idx = _sym_index(h)
    Z = Z0.copy()
    for _ in range(steps):
        F, Jac = _np_system(coeffs_f, Z)
        if F.size == 0 or np.linalg.norm(F) < 1e-13:
            return Z, Jac
        step, *_ = np.linalg.lstsq(Jac, -F, rcond=None)
        if not np.all(np.isfinite(step)):
            return None, None
        for k, (i, j) in enumerate(idx):
            Z[i, j] += step[k]
            if i != j:
                Z[j, i] = Z[i, j]
        if np.abs(Z).max() > 1e8:
            return None, None
    F, Jac = _np_system(coeffs_f, Z)
    if F.size and np.linalg.norm(F) > 1e-9:
        return None, None
    return Z, Jac


def _starts(h: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        X = rng.uniform(-0.5, 0.5, (h, h))
        X = (X + X.T) / 2
        Y = np.diag(rng.uniform(0.3, 3.0, h))
        off = rng.uniform(-0.1, 0.1, (h, h))
        Y = Y + (off + off.T) / 2 - np.diag(np.diag(off))
        yield X + 1j * Y


def _refine(coeffs_m, Z0, h, precision: int, damping: bool):
    """Newton (or Levenberg–Marquardt for families) in mpmath at ``precision`` bits."""
    idx = _sym_index(h)
    with mp.workprec(precision + 32):
        Z = mpmath.matrix([[mpmath.mpc(complex(Z0[i, j])) for j in range(h)] for i in range(h)])
        tol = mpmath.ldexp(1, -precision)
        lam = mpmath.ldexp(1, -(precision // 2)) if damping else 0
        for _ in range(60 + precision // 8 if coeffs_m else 0):
            F, Jac = _mp_system(coeffs_m, Z, h)
            if mpmath.mnorm(F, 1) < tol:
                break
            JH = Jac.H
            N = JH * Jac
            for k in range(N.rows):
                N[k, k] += lam
            try:
                step = mpmath.lu_solve(N, -(JH * F))
            except ZeroDivisionError:
                return None
            for k, (i, j) in enumerate(idx):
                Z[i, j] += step[k]
                if i != j:
                    Z[j, i] = Z[i, j]
        out = np.empty((h, h), dtype=object)
        for i in range(h):
            for j in range(h):
                out[i, j] = mpmath.mpc(Z[i, j])
        return out


def _recognize_matrix(Z, precision: int, max_degree: int):
    h = Z.shape[0]
    vals = {}
    for i in range(h):
        for j in range(i, h):
            x = recognize_algebraic(Z[i, j], max_degree=max_degree, precision=precision)
            if x is None:
                return None
            vals[(i, j)] = x
    field, conv = unify(list(vals.values()), precision)
    if field == "float":
        return None
    out = np.empty((h, h), dtype=object)
    for (i, j), x in zip(vals.keys(), conv):
        out[i, j] = out[j, i] = x
    return out


def _sort_key(Z):
    with mp.workprec(64):
        return tuple(float(v) for x in to_mpc_matrix(Z, 64).flat for v in (mpmath.mpc(x).real, mpmath.mpc(x).imag))


def _constraint_text(rep: RestrictedRep) -> list:
    out = []
    for k, (ap, gp, d, Dm) in enumerate(_coefficients(rep)):
        out.append(
            f"generator {k}: Z·{_fmt(gp)}·Z + {_fmt(ap)}·Z − Z·{_fmt(d)} − {_fmt(Dm)} = 0"
        )
    return out


def _fmt(M) -> str:
    return "[" + "; ".join(" ".join(str(x) for x in row) for row in M) + "]"


def fixed_riemann(
    rep: RestrictedRep,
    precision: int = DEFAULT_PRECISION,
    seed: int = SEED,
    starts: int = N_STARTS,
    max_degree: int = 4,
) -> FixedLocus:
    """Riemann matrices fixed by every generator of a restricted action.

    Multi-start Newton in double precision finds candidate points, which are
    filtered to the Siegel upper half space, refined at ``precision`` bits and
    recognized entry by entry as algebraic numbers. Recognized points are
    verified exactly. When the Jacobian has a kernel at the solutions the
    locus is reported as a family with sample points.
    """
    h = rep.working_type.g
    if h > MAX_H:
        raise ValueError(f"fixed points are only computed for h <= {MAX_H}")
    coeffs = _coefficients(rep)
    coeffs_f = [tuple(np.array([[complex(float(x)) for x in row] for row in M]) for M in co) for co in coeffs]
    nvars = h * (h + 1) // 2
    candidates = []
    family_dim = 0
    for Z0 in _starts(h, starts, seed):
        Z, Jac = _newton_double(coeffs_f, Z0)
        if Z is None or not _in_siegel_np(Z):
            continue
        rank = 0 if Jac.size == 0 else int(np.linalg.matrix_rank(Jac, tol=1e-8 * max(1.0, np.abs(Jac).max())))
        family_dim = max(family_dim, nvars - rank)
        if all(np.abs(Z - W).max() > 1e-6 for W in candidates):
            candidates.append(Z)
    if not candidates:
        raise NoSolutionFound(f"no fixed Riemann matrix found from {starts} starts")
    family = family_dim > 0
    with mp.workprec(precision + 32):
        coeffs_m = [tuple(mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in M]) for M in co)
                    for co in coeffs]
    tol = float_tolerance(precision)
    points = []
    for Zc in candidates:
        Z = _refine(coeffs_m, Zc, h, precision, damping=family)
        if Z is None:
            continue
        res = fixed_residuals(rep, Z, precision)
        if any(r > tol for r in res):
            continue
        if any(max_abs(Z - W.Z if not W.exact else Z - to_mpc_matrix(W.Z, precision), precision) <= mpmath.mpf("1e-20")
               for W in points):
            continue
        point = None
        if not family:
            exact = _recognize_matrix(Z, precision, max_degree)
            if exact is not None:
                res_exact = fixed_residuals(rep, exact, precision)
                if all(r == 0 for r in res_exact):
                    point = FixedPoint(Z=exact, exact=True, residuals=res_exact, recognized=True)
            if point is None:
                log.warning("fixed point could not be recognized exactly; returning the numeric point")
                point = FixedPoint(Z=Z, exact=False, residuals=res, recognized=False)
        else:
            point = FixedPoint(Z=Z, exact=False, residuals=res, recognized=False)
        points.append(point)
    if not points:
        raise NoSolutionFound("no candidate survived refinement at working precision")
    points.sort(key=lambda p: _sort_key(p.Z))
    if family:
        return FixedLocus("family", points, rep.working_type, rep.scale, family_dim, _constraint_text(rep))
    kind = "point" if len(points) == 1 else "finite"
    return FixedLocus(kind, points, rep.working_type, rep.scale, 0)


def restricted_analytic(rep: RestrictedRep, Z, precision: int = DEFAULT_PRECISION) -> list:
    """``(D·α + Z·γ)·D⁻¹`` for each generator, after checking ``Z`` is fixed."""
    Z = as_matrix(Z)
    res = fixed_residuals(rep, Z, precision)
    mode, (Zc,) = common_mode(Z, precision=precision)
    tol = float_tolerance(precision)
    for k, r in enumerate(res):
        if (mode == "exact" and r != 0) or r > tol:
            raise NotFixed(f"Z is not fixed by generator {k} (residual {mpmath.nstr(r, 5)})")
    D = rep.working_type
    h = D.g
    Dm = D.diag()
    Dinv = latalg.inverse(Dm)
    out = []
    for X in rep.generators:
        a, _, c, _ = _blocks(latalg.rat_matrix(X), h)
        if mode == "exact":
            _, (Zm, A1, C1, Di) = common_mode(Zc, Dm.dot(a), c, Dinv, precision=precision)
            out.append((A1 + Zm.dot(C1)).dot(Di))
        else:
            with mp.workprec(precision):
                A1 = to_mpc_matrix(Dm.dot(a), precision)
                C1 = to_mpc_matrix(c, precision)
                Di = to_mpc_matrix(Dinv, precision)
                out.append((A1 + Zc.dot(C1)).dot(Di))
    return out
