"""Exception types shared across the package.

The command line maps these onto exit codes: validation problems exit
with 2, numeric failures with 3.  Everything else is a plain bug and is
allowed to traceback.
"""


class SeaSurrogateError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(SeaSurrogateError, ValueError):
    """Bad input data or configuration (file contents, shapes, ranges)."""


class NumericError(SeaSurrogateError, ArithmeticError):
    """A computation produced non-finite or otherwise unusable values."""


class SimulationError(NumericError):
    """Time integration diverged.

    Parameters
    ----------
    message : str
        Human-readable description.
    step : int, optional
        Index of the integration step at which divergence was detected.
    """

    def __init__(self, message: str, step: int | None = None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class TrainingDiverged(NumericError):
    """Optimization hit non-finite loss or gradients.

    Carries the last finite parameter state so a caller can checkpoint it.
    """

    def __init__(self, message: str, epoch: int, batch: int, last_good_params=None):
        super().__init__(f"{message} (epoch {epoch}, batch {batch})")
        self.epoch = epoch
        self.batch = batch
        self.last_good_params = last_good_params
