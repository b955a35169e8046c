"""Exception taxonomy shared across the toolkit."""


class RealstabError(Exception):
    """Base class for all errors raised by this package."""


class ZeroDenominator(RealstabError):
    """A rational function was given an identically zero denominator."""


class DimensionMismatch(RealstabError):
    """Operands have non-conforming shapes or block partitions."""


class SingularMatrix(RealstabError):
    """Exact inversion failed because the determinant is identically zero."""


class NoStabilityMatrix(RealstabError):
    """I - R is singular, so the realization has no stability matrix."""


class SingularPerturbedLoop(RealstabError):
    """The perturbed feedback loop is singular as a rational matrix."""


class ImproperBlock(RealstabError):
    """An off-diagonal realization block contains an improper entry."""


class NotStrictlyProper(RealstabError):
    """A response map required to be strictly proper fails the degree test."""


class NotStable(RealstabError):
    """An operand required to be stable has poles on or outside the unit circle."""


class NotStabilizing(RealstabError):
    """A gain does not place all closed-loop eigenvalues inside the unit circle."""


class SingularFactor(RealstabError):
    """The factor to be inverted in a parameterization formula is singular."""


class IdentityCheckFailed(RealstabError):
    """An internal exactness cross-check failed; indicates a bug, not bad input."""


class EmptyMask(RealstabError):
    """An uncertainty specification allows no blocks to be perturbed."""


class InfiniteMargin(RealstabError):
    """The small-gain margin is infinite, so no worst-case perturbation exists."""


class MaskViolation(RealstabError):
    """A structured perturbation has nonzero entries outside its block mask."""


class SoundnessViolation(RealstabError):
    """A sample below the analytic margin came back non-stable; bug guard."""


class PoleOnGrid(RealstabError):
    """A frequency sample coincides with a pole."""

    def __init__(self, omega):
        super().__init__(f"pole within 1e-12 of the evaluation point at omega={omega!r}")
        self.omega = omega


class SchemaError(RealstabError):
    """A system or report file does not conform to the realstab/1 schema."""


class MissingBlocks(SchemaError):
    """The system file lacks the parameterization blocks this command needs."""
