"""Exception types shared across the package."""


class GSLError(Exception):
    """Base class for all package errors."""


class BoundsError(GSLError, ValueError):
    """A position lies outside the world rectangle."""


class GeometryError(GSLError, ValueError):
    """A query hit blocked space or an unreachable cell."""


class ParameterError(GSLError, ValueError):
    """A numeric parameter is outside its valid range."""


class ConfigError(GSLError):
    """An experiment config or world file could not be loaded."""


class UsageError(GSLError):
    """An operation was called in a state where it is not defined."""
