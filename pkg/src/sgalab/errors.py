"""Exception hierarchy shared across the package."""


class SgaError(Exception):
    """Base class for all errors raised by this package."""


class LandscapeError(SgaError):
    """A fitness landscape is invalid (nonpositive values, bad table)."""


class ConfigError(SgaError):
    """A configuration value is malformed, out of range, or inconsistent."""


class ParseError(ConfigError):
    """A structured text document could not be parsed."""


class DomainError(SgaError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(SgaError):
    """A protocol was invoked outside its stated parameter regime."""


class CapabilityError(SgaError):
    """The request exceeds what exact computation supports (e.g. m too large)."""


class NumericalError(SgaError):
    """An iterative numerical routine failed to converge."""
