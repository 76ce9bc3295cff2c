"""Exception types raised across the package."""


class LatticeError(Exception):
    """Base class for all package errors."""


class SingularBasis(LatticeError):
    """The supplied columns are linearly dependent."""


class EnumerationBudgetExceeded(LatticeError):
    """An enumeration box or rank went past the configured limits."""


class ZeroVector(LatticeError):
    """An operation that needs a nonzero vector received zero."""


class RankOne(LatticeError):
    """An operation that needs rank at least two received a rank-one lattice."""


class PromiseViolated(LatticeError):
    """A strict oracle detected that its input is outside the promise."""


class NoPrimeInRange(LatticeError):
    """No prime exists in the requested interval."""


class NoSolution(LatticeError):
    """A congruence or Diophantine equation has no solution."""


class AllTrialsFailed(LatticeError):
    """A driver exhausted its trial budget without a usable answer."""


class NoLayerOneSample(LatticeError):
    """No sample from the embedded lattice landed on layer one."""


class InfinityNorm(LatticeError):
    """The supergaussian weight is undefined for the infinity norm."""


class DegenerateAfterRetries(LatticeError):
    """A random generator kept producing rank-deficient matrices."""
