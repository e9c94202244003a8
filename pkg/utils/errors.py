"""
Exception types shared across the toolkit.
The CLI maps them onto exit codes (config errors -> 2, numerical failures -> 3).
"""


class FloquetError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(FloquetError, ValueError):
    """Invalid user configuration: unknown model, bad sweep, unwritable output."""


class NumericalError(FloquetError, ArithmeticError):
    """A computation could not produce a trustworthy result."""


class BracketError(NumericalError):
    """A threshold search bracket does not straddle the transition."""
