"""Exception types raised across the package.

Each class maps to one failure mode of an operation; the CLI turns a subset of
them into stable exit codes.
"""

from __future__ import annotations


class AbelDecompError(Exception):
    """Base class for every error raised by this package."""


# numerics
class EmbeddingAmbiguous(AbelDecompError):
    """A stored root approximation matches zero or several roots of the defining polynomial."""


class FieldMismatch(AbelDecompError):
    """Two number-field elements cannot be combined exactly."""


# latalg
class InconsistentSystem(AbelDecompError):
    """A linear system A X = B has no solution.

    ``certificate`` is a vector y with yᵗA = 0 and yᵗB != 0.
    """

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class RankMismatch(AbelDecompError):
    pass


class DegenerateForm(AbelDecompError):
    """The alternating form restricted to a lattice is singular."""


# pav
class NotSymmetric(AbelDecompError):
    pass


class NotPositiveDefinite(AbelDecompError):
    pass


class NoSolution(AbelDecompError):
    """A rational matrix is not complex-linear for the given period matrices."""


class NonIntegral(AbelDecompError):
    pass


# subvariety
class ZeroImage(DegenerateForm):
    pass


class RankDeficiency(AbelDecompError):
    pass


class NotInSiegel(AbelDecompError):
    pass


# gaction
class NotClosed(AbelDecompError):
    pass


class NotStable(AbelDecompError):
    pass


class NotSymplectic(AbelDecompError):
    pass


class NoSolutionFound(AbelDecompError):
    pass


class NotFixed(AbelDecompError):
    """A candidate Riemann matrix is not fixed by a restricted generator."""


# decompose
class NotIdempotent(AbelDecompError):
    pass


class DegenerateRank(AbelDecompError):
    pass


class ParseError(AbelDecompError):
    pass
