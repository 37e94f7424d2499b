"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures to a
category without inspecting messages.
"""


class SBFError(Exception):
    exit_code = 1


class ConfigError(SBFError, ValueError):
    """Schema or consistency violation in an experiment config."""

    exit_code = 2

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class DimensionError(SBFError, ValueError):
    exit_code = 3


class InvalidSystemError(SBFError, ValueError):
    exit_code = 3


class IllPosedLoopError(SBFError, ValueError):
    exit_code = 3


class ParameterError(SBFError, ValueError):
    exit_code = 3


class SolverError(SBFError, RuntimeError):
    exit_code = 3


class RankDeficiencyError(SolverError):
    """Raised when a least-squares/normal-equation system has dependent columns."""

    def __init__(self, message, columns=()):
        self.columns = tuple(int(c) for c in columns)
        super().__init__(f"{message} (dependent columns: {list(self.columns)})")


class CollinearityError(RankDeficiencyError):
    """The LARS equiangular direction is undefined for the current active set."""


class UnsupportedWeightsError(SBFError, ValueError):
    exit_code = 3


class TrialError(SolverError):
    """Wraps a solver failure with the trial index at which it happened."""

    def __init__(self, trial, cause):
        self.trial = trial
        self.cause = cause
        super().__init__(f"trial {trial}: {cause}")
        self.exit_code = getattr(cause, "exit_code", 3)


class OutputError(SBFError, OSError):
    exit_code = 4

    def __init__(self, path, cause):
        self.file = str(path)
        super().__init__(f"cannot write {path}: {cause}")
