"""Exception hierarchy shared by all modules."""


class VortexError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(VortexError, ValueError):
    """Input rejected before any numerical work was attempted."""


class NumericalError(VortexError, RuntimeError):
    """A numerical procedure failed to reach its contract."""


# domain
class InvalidGeometry(ValidationError):
    pass


class MeshTooCoarse(ValidationError):
    pass


class NotOnBoundary(ValidationError):
    pass


class UnsupportedKind(ValidationError):
    pass


# radial profile
class UnsupportedExponent(ValidationError):
    pass


class NonPositiveKappa(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass


# poisson
class SolverDiverged(NumericalError):
    pass


class DimensionMismatch(ValidationError):
    pass


# green
class CoincidentPoints(ValidationError):
    pass


class OutsideDomain(ValidationError):
    pass


class SingularOmegaMatrix(NumericalError):
    pass


# routh
class FluxImbalance(ValidationError):
    pass


class SingularCirculationSystem(NumericalError):
    pass


class NoInteriorMaximum(NumericalError):
    pass


class VortexCollision(NumericalError):
    pass


class BoundaryEscape(NumericalError):
    pass


# semilinear
class InvalidSpec(ValidationError):
    pass


class GridTooCoarseForCore(ValidationError):
    pass


class NoPositivePart(NumericalError):
    pass


class NotNonnegative(ValidationError):
    pass


class TrivialCollapse(NumericalError):
    pass


class NoSignChange(NumericalError):
    pass


class EmptyVorticity(NumericalError):
    pass


class InsufficientPoints(ValidationError):
    pass


# capacity
class GapUnderResolved(ValidationError):
    pass


class NonPositiveS(ValidationError):
    pass


class ModulusOutOfRange(ValidationError):
    pass


# cli
class ConfigInvalid(ValidationError):
    pass
