"""Worked example inputs: an abelian surface with an order-800 group action and a
genus-11 Jacobian factor, together with the elliptic periods used in tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import latalg
from .numerics import NumberFieldElement, quadratic_field
from .pav import PolarizedAV, build_period

__all__ = [
    "sqrt_m2",
    "sqrt_m6",
    "surface_generators",
    "surface_riemann",
    "surface_split_form",
    "surface_idempotent",
    "surface_sum_isogeny",
    "surface_analytic_sum",
    "surface",
    "genus11_surface_period",
    "genus11_surface",
    "genus11_split_form",
    "genus11_elliptic_periods",
    "genus11_isotypical_types",
    "GENUS11_DEGREE",
]


def sqrt_m2() -> NumberFieldElement:
    """i√2 in ℚ(√−2)."""
    return quadratic_field(-2).gen


def sqrt_m6() -> NumberFieldElement:
    """i√6 in ℚ(√−6)."""
    return quadratic_field(-6).gen


def surface_generators() -> list[np.ndarray]:
    """Restricted symplectic action of the two group generators on the surface (columns act)."""
    a = [[0, 0, 1, 1], [1, -1, -1, 1], [-1, 0, 1, 0], [1, -1, -1, 0]]
    b = [[-1, 1, 1, -1], [0, 0, 1, 1], [-1, 1, 0, -1], [0, -1, 0, 1]]
    return [latalg.int_matrix(a).T.copy(), latalg.int_matrix(b).T.copy()]


def surface_riemann() -> np.ndarray:
    """Riemann matrix fixed by :func:`surface_generators` for the principal type."""
    r = sqrt_m2()
    half = Fraction(1, 2)
    z = (1 + r) * half
    return np.array([[z, -half + 0 * r], [-half + 0 * r, z]], dtype=object)


def surface() -> PolarizedAV:
    return build_period((1, 1), surface_riemann(), label="S")


def surface_split_form() -> tuple:
    """A Néron–Severi form of the surface giving an elliptic subvariety."""
    h = Fraction(1, 2)
    return (h, -h, h, Fraction(0), -h, h)


def surface_idempotent() -> np.ndarray:
    rows = [[1, 0, 0, 1], [-1, 1, -1, 0], [0, -1, 1, -1], [1, 0, 0, 1]]
    return latalg.rat_matrix(rows) / 2


def surface_sum_isogeny() -> np.ndarray:
    """Columns (u1, v1, u2, v2) of the sum map from the two elliptic factors."""
    return latalg.int_matrix([[1, 1, 0, 0], [-1, 1, -1, 1], [0, 0, 1, 1], [1, -1, 0, 0]])


def surface_analytic_sum() -> np.ndarray:
    r = sqrt_m2()
    h = Fraction(1, 2)
    return np.array([[h + 0 * r, 3 * h + 0 * r], [(-1 + r) * h, (1 - r) * h]], dtype=object)


def genus11_surface_period() -> np.ndarray:
    """Period matrix 4·[[1, 0, 3i√6/2, 2i√6], [0, 3, 2i√6, 3i√6]] (content 4, type (4, 12))."""
    s = sqrt_m6()
    zero = 0 * s
    rows = [
        [4 + zero, zero, 6 * s, 8 * s],
        [zero, 12 + zero, 8 * s, 12 * s],
    ]
    return np.array(rows, dtype=object)


def genus11_surface() -> PolarizedAV:
    from .pav import from_period_matrix

    return from_period_matrix(genus11_surface_period(), label="S11")


def genus11_split_form() -> tuple:
    """Néron–Severi form of the normalized (1, 3) surface giving an elliptic curve."""
    return (Fraction(0), Fraction(-1), Fraction(-4, 3), Fraction(0), Fraction(0), Fraction(0))


def genus11_elliptic_periods() -> list[tuple]:
    """Periods (d, w) of the four elliptic factors of the genus-11 Jacobian."""
    i = quadratic_field(-1).gen
    r3 = quadratic_field(-3).gen
    r2 = sqrt_m2()
    return [
        (6, 6 * i),
        (8, 4 + 4 * r3),
        (8, 8 * i),
        (3, 3 * r2 / 2),
    ]


# types of the isotypical factors, concatenated as in the sum map of the genus-11 Jacobian
genus11_isotypical_types = (6, 4, 4, 4, 12, 3, 6, 2, 2, 6, 6)
GENUS11_DEGREE = 11943936
