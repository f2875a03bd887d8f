"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`WindStochError`; the CLI maps the subclasses onto exit codes.
"""


class WindStochError(Exception):
    """Base class for all package errors."""


class ConfigError(WindStochError, ValueError):
    """Invalid argument or configuration value."""


class DataError(WindStochError, ValueError):
    """Malformed or inconsistent input data."""


class InsufficientDataError(WindStochError, ValueError):
    """Not enough usable (non-NA) values for the requested statistic."""


class DegenerateSeriesError(InsufficientDataError):
    """Series has zero variance where a non-zero one is required."""


class CapacityExceededError(WindStochError, RuntimeError):
    """Requested size exceeds the configured limit of an O(n^2) routine."""
