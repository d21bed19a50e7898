"""Exception hierarchy shared by every gazemask subpackage.

Concrete errors live next to the code that raises them and subclass one of
the categories below. The category decides the CLI exit code.
"""


class GazemaskError(RuntimeError):
    """Base class for all errors raised by gazemask."""

    exit_code: int = 1


class ConfigError(GazemaskError):
    """Invalid experiment configuration or command-line override."""

    exit_code = 2


class DataError(GazemaskError):
    """Malformed, missing or unusable input data."""

    exit_code = 3


class TrainingError(GazemaskError):
    """A training procedure could not produce a usable model."""

    exit_code = 4


class TrainingDiverged(TrainingError):
    """Raised when a loss or gradient becomes non-finite."""

    def __init__(self, message: str, epoch: int | None = None) -> None:
        super().__init__(message)
        self.epoch = epoch


class IntegrityError(GazemaskError):
    """Raised when a parameter or artifact hash does not match its record."""

    exit_code = 3


class StageFailed(GazemaskError):
    """A pipeline stage failed; carries the stage name and the original cause."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", GazemaskError.exit_code)
