"""Exception hierarchy shared by the library and the command line."""


class NpsError(Exception):
    """Base class for all errors raised by npsbayes."""


class ConfigError(NpsError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class DataError(NpsError):
    """Bad input data: survey files, counts or state files (CLI exit code 3)."""


class ScoreError(DataError, ValueError):
    """A survey score is missing, non-integer or outside 0..10."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class StateFormatError(DataError):
    """A posterior state file cannot be parsed."""


class StateInvariantError(DataError):
    """A posterior state file parses but its parameters disagree with its history."""


class SampleTooSmallError(ConfigError):
    """The Monte Carlo sample is too small for the requested credible level."""


class NonConvergenceError(NpsError):
    """The sample-size search passed its cap without meeting the criterion (exit code 4)."""

    def __init__(self, message, evaluations=None):
        super().__init__(message)
        self.evaluations = list(evaluations or [])
