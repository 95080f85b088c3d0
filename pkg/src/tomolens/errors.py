"""Exception types shared across the package."""


class TomolensError(Exception):
    """Base class for all package errors."""


class TruncationOverflow(TomolensError):
    """Significant amplitude would leave the truncated Fock basis."""


class GridTooNarrow(TomolensError):
    """A quadrature grid fails to capture the distribution it integrates."""


class DegenerateParameter(TomolensError):
    """A state family is undefined at the requested parameter value."""


class OrderTooHigh(TomolensError):
    """A moment order beyond the supported maximum was requested."""


class MissingOrder(TomolensError):
    """A moment table lacks the entries needed for the requested quantity."""


class ConfigError(TomolensError):
    """A scenario configuration file is missing or malformed."""
