"""Exception types raised across the toolkit."""


class InvalidParameters(ValueError):
    """Parameters do not define a valid law or configuration."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class MomentUnavailable(ValueError):
    """Requested absolute moment is infinite (order exceeds the law's alpha)."""


class WindowUnbounded(RuntimeError):
    """No finite truncation window certifies the requested neglected mass."""


class RegimeError(ValueError):
    """Offspring regime and spatial dimension are not a supported combination."""


class NoConvergence(RuntimeError):
    """An iteration failed to stabilise within its step budget."""


class UnsupportedLaw(ValueError):
    """The exact oracle cannot handle this offspring or step law."""


class TooLarge(ValueError):
    """Exhaustive enumeration requested beyond its size limits."""


class CappedExcess(RuntimeError):
    """More than the allowed fraction of runs hit the population cap."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""
