"""Period matrices of abelian subvarieties and Poincaré decompositions."""

from __future__ import annotations

from .decompose import (
    DecompositionTree,
    NSForm,
    elliptic_normalize,
    idempotent_from_ns,
    ns_membership,
    poincare_decompose,
    sub_elliptic_search_g2,
    verify_tree,
)
from .gaction import SymplecticRep, fixed_riemann, restrict_action, subgroup_idempotent
from .pav import PolarizationType, PolarizedAV, build_period, from_period_matrix, isogeny_degree
from .subvariety import image_lattice, induced_polarization, subvariety_period

__version__ = "0.1.0"

__all__ = [
    "DecompositionTree",
    "NSForm",
    "PolarizationType",
    "PolarizedAV",
    "SymplecticRep",
    "build_period",
    "elliptic_normalize",
    "fixed_riemann",
    "from_period_matrix",
    "idempotent_from_ns",
    "image_lattice",
    "induced_polarization",
    "isogeny_degree",
    "ns_membership",
    "poincare_decompose",
    "restrict_action",
    "sub_elliptic_search_g2",
    "subgroup_idempotent",
    "subvariety_period",
    "verify_tree",
]
