"""Exception hierarchy.

Everything raised on purpose by this package derives from :class:`DomainError`
so callers (and the CLI) can separate bad inputs from programming errors.
"""


class DomainError(ValueError):
    """Base class for mathematically invalid inputs or unsupported regimes."""


class InvalidModel(DomainError):
    pass


class NegativeArgument(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class SingularResolvent(DomainError):
    """``zI - T`` is numerically singular at the requested argument."""


class UnsupportedOrder(DomainError):
    pass


class CriticalDrift(DomainError):
    """The mean drift ``psi'(0+)`` vanishes (to tolerance)."""


class MultipleRootDetected(DomainError):
    pass


class ResidualTooLarge(DomainError):
    pass


class NearCriticalRoot(DomainError):
    pass


class BetaTooSmall(DomainError):
    pass


class BetaNonpositive(DomainError):
    pass


class IndexOutOfRange(DomainError):
    pass


class NotExponentialClaims(DomainError):
    pass


class InitialCapitalExcluded(DomainError):
    """Zero initial capital under Brownian perturbation (ruin is immediate)."""


class InvalidStart(DomainError):
    pass


class NoRuinObserved(DomainError):
    pass
