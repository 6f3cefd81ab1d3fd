"""Exception types shared across the package."""


class OscillabError(Exception):
    pass


class DomainError(OscillabError, ValueError):
    """Argument outside the domain where a formula is defined."""


class QuadratureResolutionError(OscillabError):
    """The sampling grid is too coarse for the oscillation of the integrand."""


class SeparationError(OscillabError, ValueError):
    pass


class DegenerateConfigurationError(OscillabError):
    pass


class IllConditionedError(OscillabError):
    """Gradient matrix lost rank at a sample point."""


class ConfigError(OscillabError, ValueError):
    pass
