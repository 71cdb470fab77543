"""Number types for period-matrix entries.

Three kinds of scalar appear in matrices:

* ``fractions.Fraction`` for rationals,
* :class:`NumberFieldElement` for algebraic numbers with a fixed complex
  embedding,
* ``mpmath.mpc`` for high-precision floating values.

A matrix is either *exact* (rationals and elements of one number field) or
*float* (all ``mpc``). :func:`unify` decides which and converts the entries.
"""

from __future__ import annotations

import logging
import re
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Sequence, Union

import mpmath
from mpmath import mp

from .errors import EmbeddingAmbiguous, FieldMismatch, ParseError
from .latalg import lll_reduce

from sympy import factorint

log = logging.getLogger(__name__)

DEFAULT_PRECISION = 256
QUADRATIC_WHITELIST_BOUND = 50
_FACTOR_BITS = 160

__all__ = [
    "DEFAULT_PRECISION",
    "NumberField",
    "NumberFieldElement",
    "ExactComplex",
    "quadratic_field",
    "sqrt_rational",
    "eval_numeric",
    "to_mpc",
    "recognize_algebraic",
    "unify",
    "is_exact",
    "encode_number",
    "decode_number",
]


# ------------------------------------------------------- polynomials over ℚ
# coefficient lists, lowest degree first


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _padd(p, q):
    n = max(len(p), len(q))
    return _trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def _pscale(p, c):
    return _trim([c * x for x in p])


def _pmul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _pdivmod(p, q):
    p = [Fraction(x) for x in _trim(p)]
    q = _trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    lead = Fraction(q[-1])
    while len(p) >= len(q) and p:
        c = p[-1] / lead
        k = len(p) - len(q)
        quo[k] = c
        for i, b in enumerate(q):
            p[k + i] -= c * b
        p = _trim(p)
    return _trim(quo), p


def _pxgcd(a, b):
    """Return (g, u, v) with u·a + v·b = g, g monic."""
    r0, r1 = _trim(a), _trim(b)
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while r1:
        q, r = _pdivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _padd(s0, _pscale(_pmul(q, s1), -1))
        t0, t1 = t1, _padd(t0, _pscale(_pmul(q, t1), -1))
    if not r0:
        return [], s0, t0
    lead = Fraction(r0[-1])
    return _pscale(r0, 1 / lead), _pscale(s0, 1 / lead), _pscale(t0, 1 / lead)


def _squarefree_part(n: int) -> tuple[int, int]:
    """Write n = f²·D with D squarefree; return (f, D)."""
    if n == 0:
        raise ValueError("zero has no squarefree part")
    if abs(n).bit_length() > _FACTOR_BITS:
        raise ValueError(f"integer of {abs(n).bit_length()} bits is too large to factor")
    f, D = 1, -1 if n < 0 else 1
    for p, e in factorint(abs(n)).items():
        f *= p ** (e // 2)
        if e % 2:
            D *= p
    return f, D


# ------------------------------------------------------------- number fields


class NumberField:
    """ℚ(θ) for θ a chosen complex root of a monic squarefree integer polynomial."""

    def __init__(self, poly: Sequence[int], root, name: str | None = None):
        poly = [int(c) for c in poly]
        if len(poly) < 2 or poly[-1] != 1:
            raise ValueError("defining polynomial must be monic of degree >= 1")
        deriv = [i * c for i, c in enumerate(poly)][1:]
        g, _, _ = _pxgcd([Fraction(c) for c in poly], [Fraction(c) for c in deriv])
        if len(g) > 1:
            raise ValueError(f"defining polynomial {poly} is not squarefree")
        self.poly = tuple(poly)
        self.degree = len(poly) - 1
        self.name = name
        self._roots_cache: dict[int, mpmath.mpc] = {}
        with mp.workprec(128):
            approx = _parse_complex(root) if isinstance(root, str) else mpmath.mpc(root)
            roots = self._all_roots(128)
            dists = [abs(r - approx) for r in roots]
            sep = min((abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]), default=mpmath.mpf(1))
            radius = max(mpmath.mpf("1e-10"), sep / 4)
            hits = [i for i, d in enumerate(dists) if d <= radius]
            if len(hits) != 1:
                raise EmbeddingAmbiguous(
                    f"root approximation {root} matches {len(hits)} roots of {self.poly}"
                )
            self.root_approx = roots[hits[0]]
            self._sep = sep
        self._quadratic_d = None
        if self.degree == 2 and self.poly[1] == 0 and self.poly[0] != 0:
            D = -self.poly[0]
            principal = mpmath.sqrt(mpmath.mpc(D))
            if _squarefree_part(D)[0] == 1 and abs(self.root_approx - principal) < self._sep / 4:
                self._quadratic_d = D
        # ℚ(√a, √b) composita register the images of √a and √b here
        self.subfields: dict[int, "NumberFieldElement"] = {}

    def _all_roots(self, prec: int):
        with mp.workprec(prec + 32):
            if self.degree == 1:
                return [mpmath.mpc(-self.poly[0])]
            if self.degree == 2:
                b, c = self.poly[1], self.poly[0]
                s = mpmath.sqrt(mpmath.mpc(b * b - 4 * c))
                return [(-b + s) / 2, (-b - s) / 2]
            coeffs = list(reversed(self.poly))
            rts = mpmath.polyroots(coeffs, maxsteps=400, extraprec=prec + 64)
            return [mpmath.mpc(r) for r in rts]

    def root(self, prec: int = DEFAULT_PRECISION) -> mpmath.mpc:
        """The embedded root θ at ``prec`` bits."""
        if prec not in self._roots_cache:
            with mp.workprec(prec + 32):
                roots = self._all_roots(prec)
                best = min(roots, key=lambda r: abs(r - self.root_approx))
                if sum(1 for r in roots if abs(r - best) <= self._sep / 4) != 1:
                    raise EmbeddingAmbiguous(f"embedding of {self.poly} is not isolated")
                self._roots_cache[prec] = best
        return self._roots_cache[prec]

    @property
    def gen(self) -> "NumberFieldElement":
        coeffs = [Fraction(0)] * self.degree
        if self.degree > 1:
            coeffs[1] = Fraction(1)
        else:
            coeffs[0] = Fraction(-self.poly[0])
        return NumberFieldElement(self, coeffs)

    @property
    def quadratic_d(self) -> int | None:
        """D when this is the canonical field ℚ(√D) with defining polynomial x² − D."""
        return self._quadratic_d

    @property
    def is_imaginary_quadratic(self) -> bool:
        d = self.quadratic_d
        return d is not None and d < 0

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, NumberField) or other.poly != self.poly:
            return False
        return abs(other.root_approx - self.root_approx) <= self._sep / 4

    def __hash__(self):
        return hash(self.poly)

    def __repr__(self):
        if self.name:
            return f"NumberField({self.name})"
        return f"NumberField({list(self.poly)}, root≈{mpmath.nstr(self.root_approx, 12)})"


@lru_cache(maxsize=None)
def quadratic_field(D: int) -> NumberField:
    """The canonical field ℚ(√D), D squarefree, embedded with √D > 0 or √D = i√|D|."""
    f, Dsf = _squarefree_part(D)
    if f != 1 or D in (0, 1):
        raise ValueError(f"{D} is not a squarefree integer different from 0 and 1")
    with mp.workprec(128):
        root = mpmath.sqrt(mpmath.mpc(D))
    name = f"sqrt({D})"
    return NumberField((-D, 0, 1), root, name=name)


def sqrt_rational(q) -> Union[Fraction, "NumberFieldElement"]:
    """Exact √q for rational q (the principal branch)."""
    q = Fraction(q)
    if q == 0:
        return Fraction(0)
    num = q.numerator * q.denominator
    f, D = _squarefree_part(num)
    coef = Fraction(f, q.denominator)
    if D == 1:
        return coef
    return coef * quadratic_field(D).gen


def _compositum(K1: NumberField, K2: NumberField) -> NumberField | None:
    a, b = K1.quadratic_d, K2.quadratic_d
    if a is None or b is None:
        return None
    if max(abs(a), abs(b)) > QUADRATIC_WHITELIST_BOUND:
        return None
    return _quadratic_compositum(min(a, b), max(a, b))


@lru_cache(maxsize=None)
def _quadratic_compositum(a: int, b: int) -> NumberField:
    # θ = √a + √b has minimal polynomial x⁴ − 2(a+b)x² + (a−b)²
    poly = ((a - b) ** 2, 0, -2 * (a + b), 0, 1)
    Ka, Kb = quadratic_field(a), quadratic_field(b)
    with mp.workprec(128):
        root = Ka.root(128) + Kb.root(128)
    K = NumberField(poly, root, name=f"Q(sqrt({a}),sqrt({b}))")
    theta = K.gen
    s = (theta ** 3 - (3 * a + b) * theta) / Fraction(2 * (b - a))
    K.subfields[a] = s
    K.subfields[b] = theta - s
    return K


def _embed(x: "NumberFieldElement", K: NumberField) -> "NumberFieldElement | None":
    if x.field == K:
        return x
    d = x.field.quadratic_d
    if d is not None and d in K.subfields:
        return x.coeffs[0] + x.coeffs[1] * K.subfields[d]
    return None


def _common_field(K1: NumberField, K2: NumberField) -> NumberField | None:
    if K1 == K2:
        return K1
    if K2.quadratic_d is not None and K2.quadratic_d in K1.subfields:
        return K1
    if K1.quadratic_d is not None and K1.quadratic_d in K2.subfields:
        return K2
    return _compositum(K1, K2)


class NumberFieldElement:
    """c₀ + c₁θ + … + c_{n−1}θ^{n−1} in a :class:`NumberField`."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: Iterable):
        c = [Fraction(x) for x in coeffs]
        n = field.degree
        if len(c) > n:
            _, c = _pdivmod(c, [Fraction(x) for x in field.poly])
        c = list(c) + [Fraction(0)] * (n - len(c))
        self.field = field
        self.coeffs = tuple(c)

    # -- coercion
    def _lift(self, other):
        if isinstance(other, NumberFieldElement):
            if other.field == self.field:
                return self, other
            K = _common_field(self.field, other.field)
            if K is None:
                return None
            return _embed(self, K), _embed(other, K)
        if isinstance(other, (int, Fraction)):
            return self, NumberFieldElement(self.field, [other])
        return None

    def _degrade(self, other):
        log.debug("degrading %r and %r to big-float", self.field, getattr(other, "field", other))
        return to_mpc(self), to_mpc(other)

    def __add__(self, other):
        pair = self._lift(other)
        if pair is None:
            if isinstance(other, (NumberFieldElement, mpmath.mpc, mpmath.mpf, complex, float)):
                a, b = self._degrade(other)
                return a + b
            return NotImplemented
        a, b = pair
        return NumberFieldElement(a.field, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return NumberFieldElement(self.field, [-x for x in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._lift(other)
        if pair is None:
            if isinstance(other, (NumberFieldElement, mpmath.mpc, mpmath.mpf, complex, float)):
                a, b = self._degrade(other)
                return a * b
            return NotImplemented
        a, b = pair
        if isinstance(other, (int, Fraction)):
            return NumberFieldElement(a.field, [x * other for x in a.coeffs])
        prod = _pmul(list(a.coeffs), list(b.coeffs))
        return NumberFieldElement(a.field, prod)

    __rmul__ = __mul__

    def inverse(self) -> "NumberFieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a number field")
        g, u, _ = _pxgcd(list(self.coeffs), [Fraction(x) for x in self.field.poly])
        return NumberFieldElement(self.field, u)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return NumberFieldElement(self.field, [x / other for x in self.coeffs])
        if isinstance(other, NumberFieldElement):
            pair = self._lift(other)
            if pair is None:
                a, b = self._degrade(other)
                return a / b
            return pair[0] * pair[1].inverse()
        if isinstance(other, (mpmath.mpc, mpmath.mpf, complex, float)):
            return to_mpc(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        if isinstance(other, (mpmath.mpc, mpmath.mpf, complex, float)):
            return other / to_mpc(self)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = NumberFieldElement(self.field, [1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and all(x == 0 for x in self.coeffs[1:])
        if isinstance(other, NumberFieldElement):
            pair = self._lift(other)
            if pair is None:
                raise FieldMismatch(f"cannot compare elements of {self.field} and {other.field} exactly")
            return pair[0].coeffs == pair[1].coeffs
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.field.poly, self.coeffs))

    # -- queries
    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coeffs)

    def is_rational(self) -> bool:
        return all(x == 0 for x in self.coeffs[1:])

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def conjugate(self) -> "NumberFieldElement":
        """Complex conjugate; only defined in imaginary quadratic fields."""
        if not self.field.is_imaginary_quadratic:
            raise FieldMismatch("exact conjugation needs an imaginary quadratic field")
        return NumberFieldElement(self.field, [self.coeffs[0], -self.coeffs[1]])

    def minimal_polynomial(self) -> list[Fraction]:
        """Monic minimal polynomial over ℚ (lowest degree first)."""
        from .latalg import nullspace, rat_matrix

        n = self.field.degree
        powers = [NumberFieldElement(self.field, [1])]
        for k in range(1, n + 1):
            powers.append(powers[-1] * self)
            M = rat_matrix([[p.coeffs[i] for p in powers] for i in range(n)])
            ns = nullspace(M)
            if ns.shape[1]:
                v = [ns[i, 0] for i in range(k + 1)]
                return [x / v[-1] for x in v]
        raise AssertionError("unreachable: degree bound exceeded")

    def value(self, prec: int = DEFAULT_PRECISION) -> mpmath.mpc:
        with mp.workprec(prec + 32):
            theta = self.field.root(prec + 32)
            acc = mpmath.mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * theta + mpmath.mpf(c.numerator) / c.denominator
        return acc

    def _mpmath_(self, prec, rounding):
        return self.value(prec)

    def __complex__(self):
        return complex(self.value(64))

    def __repr__(self):
        return f"NumberFieldElement({self})"

    def __str__(self):
        d = self.field.quadratic_d
        gen = f"sqrt({d})" if d is not None else "t"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"{c}*{gen}" if c != 1 else gen)
            else:
                terms.append(f"{c}*{gen}^{k}" if c != 1 else f"{gen}^{k}")
        return " + ".join(terms) if terms else "0"


ExactComplex = Union[Fraction, NumberFieldElement, mpmath.mpc]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, NumberFieldElement))


def to_mpc(x) -> mpmath.mpc:
    """Numeric value at the current mpmath working precision."""
    if isinstance(x, Fraction):
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    if isinstance(x, NumberFieldElement):
        return +x.value(mp.prec)
    return mpmath.mpc(x)


def eval_numeric(x, precision: int = DEFAULT_PRECISION) -> tuple[mpmath.mpf, mpmath.mpf]:
    """(Re, Im) of an exact or float value at ``precision`` bits."""
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    if isinstance(x, (mpmath.mpc, mpmath.mpf, complex, float)):
        z = mpmath.mpc(x)
        return z.real, z.imag
    with mp.workprec(precision + 32):
        z = to_mpc(x)
    with mp.workprec(precision):
        return +z.real, +z.imag


def unify(values: Iterable, precision: int = DEFAULT_PRECISION):
    """Bring scalars to a common representation.

    Returns ``(field, converted)``: ``field`` is ``None`` for all-rational input,
    a :class:`NumberField` when every entry lives in it exactly, or the string
    ``"float"`` when some entry is floating or the fields cannot be merged (the
    entries are then ``mpc`` at ``precision`` bits).
    """
    values = list(values)
    field = None
    floating = False
    for v in values:
        if isinstance(v, NumberFieldElement):
            if v.is_rational():
                continue
            if field is None:
                field = v.field
            else:
                common = _common_field(field, v.field)
                if common is None:
                    floating = True
                    break
                field = common
        elif isinstance(v, (int, Fraction)):
            continue
        else:
            floating = True
    if floating:
        with mp.workprec(precision):
            return "float", [to_mpc(v) if isinstance(v, (Fraction, NumberFieldElement, int)) and not isinstance(v, bool)
                             else mpmath.mpc(v) for v in values]
    if field is None:
        out = [v.rational() if isinstance(v, NumberFieldElement) else Fraction(v) for v in values]
        return None, out
    out = []
    for v in values:
        if isinstance(v, NumberFieldElement):
            e = _embed(v, field) if not v.is_rational() else NumberFieldElement(field, [v.rational()])
            out.append(e)
        else:
            out.append(NumberFieldElement(field, [v]))
    return field, out


# ------------------------------------------------------- algebraic recognition


def _integer_relation(powers, n: int, precision: int, real_only: bool):
    absz = max(mpmath.mpf(1), abs(powers[1])) if n >= 1 else mpmath.mpf(1)
    scale = mpmath.ldexp(1, precision - 8) / absz ** n
    rows = []
    for k in range(n + 1):
        row = [int(k == j) for j in range(n + 1)]
        row.append(int(mpmath.nint(scale * powers[k].real)))
        if not real_only:
            row.append(int(mpmath.nint(scale * powers[k].imag)))
        rows.append(row)
    try:
        reduced = lll_reduce(rows)
    except ValueError:
        return None
    c = reduced[0][: n + 1]
    if c[n] == 0:
        return None
    if c[n] < 0:
        c = [-x for x in c]
    g = 0
    for x in c:
        g = gcd(g, x)
    c = [x // g for x in c]
    height = max(abs(x) for x in c)
    constraints = 1 if real_only else 2
    log2_bound = (precision - 16) * constraints / (n + 1) - n / 2 - 4
    if height > 2 ** log2_bound:
        return None
    resid = abs(sum(ck * pk for ck, pk in zip(c, powers)))
    if resid > height * mpmath.ldexp(1, -(precision - 16)) * absz ** n:
        return None
    return c


def _element_from_relation(c: list[int], z):
    n = len(c) - 1
    if n == 1:
        return Fraction(-c[0], c[1])
    if n == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = b * b - 4 * a * cc
        if disc >= 0 and isqrt(disc) ** 2 == disc:
            return None
        try:
            f, D = _squarefree_part(disc)
        except ValueError:
            return None
        K = quadratic_field(D)
        cands = [NumberFieldElement(K, [Fraction(-b, 2 * a), Fraction(s * f, 2 * a)]) for s in (1, -1)]
        return min(cands, key=lambda e: abs(to_mpc(e) - z))
    lead = c[n]
    poly = [c[k] * lead ** (n - 1 - k) for k in range(n)] + [1]
    try:
        K = NumberField(poly, lead * z)
    except (ValueError, EmbeddingAmbiguous):
        return None
    return NumberFieldElement(K, [0, Fraction(1, lead)])


def recognize_algebraic(z, max_degree: int = 8, precision: int = DEFAULT_PRECISION):
    """Find an exact algebraic number equal to ``z`` to within 2^(−precision/2).

    Integer relations among 1, z, …, zⁿ are found by LLL on the scaled power
    lattice, trying n = 1, 2, … in turn. Returns a ``Fraction`` for rationals, a
    :class:`NumberFieldElement` otherwise (quadratic numbers land in the
    canonical field ℚ(√D)), or ``None`` when no relation is found.
    """
    if max_degree > 8:
        raise ValueError("max_degree must be at most 8")
    with mp.workprec(precision + 32):
        z = to_mpc(z) if is_exact(z) else mpmath.mpc(z)
        if not (mpmath.isfinite(z.real) and mpmath.isfinite(z.imag)):
            return None
        real_only = abs(z.imag) <= mpmath.ldexp(1, -(precision - 8)) * max(1, abs(z))
        if real_only:
            z = mpmath.mpc(z.real)
        powers = [mpmath.mpc(1)]
        for _ in range(max_degree):
            powers.append(powers[-1] * z)
        tol = mpmath.ldexp(1, -(precision // 2)) * max(1, abs(z))
        for n in range(1, max_degree + 1):
            c = _integer_relation(powers[: n + 1], n, precision, real_only)
            if c is None:
                continue
            elem = _element_from_relation(c, z)
            if elem is None:
                continue
            if isinstance(elem, NumberFieldElement):
                # exact check that the relation polynomial annihilates the element
                acc = NumberFieldElement(elem.field, [0])
                for ck in reversed(c):
                    acc = acc * elem + ck
                if not acc.is_zero():
                    continue
            if abs(to_mpc(elem) - z) <= tol:
                return elem
    return None


# ---------------------------------------------------------------- JSON codec

_COMPLEX_RE = re.compile(
    r"^\s*(?P<re>[-+]?[0-9.]+(?:[eE][-+]?\d+)?)?\s*(?:(?P<sign>[-+])\s*(?P<im>[0-9.]*(?:[eE][-+]?\d+)?)\s*[ij])?\s*$"
)


def _parse_complex(s: str) -> mpmath.mpc:
    m = _COMPLEX_RE.match(s)
    if not m or (m.group("re") is None and m.group("sign") is None):
        # forms such as "1.414j" or "2e-3-1i"
        try:
            return mpmath.mpc(mpmath.mpmathify(s.strip().replace("i", "j").replace(" ", "")))
        except (ValueError, TypeError) as exc:
            raise ParseError(f"cannot parse complex approximation {s!r}") from exc
    re_part = mpmath.mpf(m.group("re")) if m.group("re") else mpmath.mpf(0)
    im_part = mpmath.mpf(0)
    if m.group("sign"):
        im_part = mpmath.mpf(m.group("im") or "1")
        if m.group("sign") == "-":
            im_part = -im_part
    return mpmath.mpc(re_part, im_part)


def _format_complex(z: mpmath.mpc, digits: int = 40) -> str:
    with mp.workprec(int(digits * 3.33) + 16):
        re_s = mpmath.nstr(z.real, digits, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
        sign = "-" if z.imag < 0 else "+"
        im_s = mpmath.nstr(abs(z.imag), digits, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
    return f"{re_s}{sign}{im_s}i"


def _canonical_element(poly: Sequence[int], coeffs, root) -> Union[Fraction, NumberFieldElement]:
    coeffs = [Fraction(c) for c in coeffs]
    if len(poly) == 2:
        return coeffs[0] if coeffs else Fraction(0)
    K = NumberField(poly, root)
    if K.degree == 2:
        # rewrite in ℚ(√D): θ = (−p + s·f·√D)/2 for θ² + pθ + q = 0
        q, p = poly[0], poly[1]
        f, D = _squarefree_part(p * p - 4 * q)
        if D == 1:
            raise ValueError(f"quadratic polynomial {poly} is reducible")
        base = quadratic_field(D)
        sq = base.gen
        cands = [Fraction(-p, 2) + Fraction(s * f, 2) * sq for s in (1, -1)]
        with mp.workprec(128):
            theta = min(cands, key=lambda e: abs(to_mpc(e) - K.root_approx))
        return coeffs[0] + coeffs[1] * theta
    return NumberFieldElement(K, coeffs)


def encode_number(x, precision: int = DEFAULT_PRECISION) -> dict:
    """JSON encoding: {"rat": ...}, {"alg": {...}} or {"dec": {...}}."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, Fraction)):
        return {"rat": str(Fraction(x))}
    if isinstance(x, NumberFieldElement):
        if x.is_rational():
            return {"rat": str(x.rational())}
        return {
            "alg": {
                "poly": list(x.field.poly),
                "coeffs": [str(c) for c in x.coeffs],
                "root": _format_complex(x.field.root_approx),
            }
        }
    prec = precision
    digits = int(prec * 0.30103) + 6
    with mp.workprec(prec):
        z = mpmath.mpc(x)
        return {
            "dec": {
                "re": mpmath.nstr(z.real, digits, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf),
                "im": mpmath.nstr(z.imag, digits, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf),
                "prec": prec,
            }
        }


def decode_number(obj) -> ExactComplex:
    try:
        if isinstance(obj, (int, str)) and not isinstance(obj, bool):
            return Fraction(obj)
        if "rat" in obj:
            return Fraction(obj["rat"])
        if "alg" in obj:
            a = obj["alg"]
            return _canonical_element([int(c) for c in a["poly"]], a["coeffs"], a["root"])
        if "dec" in obj:
            d = obj["dec"]
            prec = int(d.get("prec", DEFAULT_PRECISION))
            with mp.workprec(prec):
                return mpmath.mpc(mpmath.mpf(d["re"]), mpmath.mpf(d["im"]))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad number encoding {obj!r}: {exc}") from exc
    raise ParseError(f"unknown number encoding {obj!r}")
