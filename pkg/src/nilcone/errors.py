"""Exception hierarchy shared by every module."""
from __future__ import annotations


class NilconeError(Exception):
    """Base class; the CLI maps these to exit status 2 or 1."""


# exact_core
class NotUnipotent(NilconeError):
    pass


class NotNilpotent(NilconeError):
    pass


class NotQuasiUnipotent(NilconeError):
    pass


class DimensionMismatch(NilconeError):
    pass


class Singular(NilconeError):
    pass


class RationalSpectrum(NilconeError):
    pass


class NotTwoByTwo(NilconeError):
    pass


class MixedRadicand(NilconeError):
    pass


# hodge
class WrongCenter(NilconeError):
    pass


class NotProportional(NilconeError):
    pass


class AsymmetricTensor(NilconeError):
    pass


# cones / birational
class NotComposable(NilconeError):
    pass


class UnknownGenerator(NilconeError):
    pass


class NotInQuotientLattice(NilconeError):
    pass


class DepthMismatch(NilconeError):
    pass


class InconsistentDataset(NilconeError):
    pass


# series
class IdentityFails(NilconeError):
    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


class NotAQuadraticShiftInA(NilconeError):
    pass


class TruncationTooSmall(NilconeError):
    pass


# transport
class WrongHolonomicRank(NilconeError):
    pass


class SingularityTooClose(NilconeError):
    pass


class PrecisionExhausted(NilconeError):
    pass


# cli / io
class ParseError(NilconeError):
    pass


class SchemaError(NilconeError):
    pass


class DimensionError(NilconeError):
    pass


class UnknownCase(NilconeError):
    pass


class UnknownSuite(NilconeError):
    pass


class IoError(NilconeError):
    pass
