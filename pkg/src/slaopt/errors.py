"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the hierarchy flat
and the meanings narrow.
"""


class ConfigError(Exception):
    """A config file, flag combination, or runtime parameter is invalid."""


class SLASpecError(ValueError):
    """An SLA specification is malformed (bad mode, non-positive target, ...)."""


class LogParseError(ValueError):
    """A historical run log could not be parsed; the message names the row."""


class JobComplete(RuntimeError):
    """Raised when stepping a simulated job that has already finished."""
