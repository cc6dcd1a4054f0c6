"""Custom exceptions for the levyfock package."""


class LevyFockError(Exception):
    """
    Base exception for all levyfock errors.

    All exceptions raised by levyfock inherit from this class,
    allowing users to catch all levyfock-related errors with a single handler.
    """


class MeasureError(LevyFockError):
    """
    Raised when a Lévy measure cannot be represented.

    This may occur due to:
    - An atom at zero jump size
    - A non-positive weight
    - An empty atom list or zero total mass
    """


class SupportExhaustedError(MeasureError):
    """
    Raised when a squared recurrence coefficient loses positivity before
    the support of the jump measure is exhausted.

    Parameters
    ----------
    level : int
        Index n of the coefficient bₙ whose square fell below tolerance.
    value : float
        The offending squared value.
    """

    def __init__(self, level: int, value: float) -> None:
        self.level = level
        self.value = value
        super().__init__(f"b_{level}^2 = {value:.3e} lost positivity at level {level}")


class TruncationError(LevyFockError):
    """
    Raised when a computation needs a quantity beyond the configured truncation.

    Parameters
    ----------
    name : str
        Name of the missing quantity, e.g. ``"b"`` or ``"level"``.
    index : int
        Index that was required.
    """

    def __init__(self, name: str, index: int) -> None:
        self.name = name
        self.index = index
        super().__init__(f"Truncation too small: {name}_{index} is required")


class GridMismatchError(LevyFockError):
    """Raised when functions or vectors living on different grids are combined."""


class QuadratureError(LevyFockError):
    """Raised when the eigen-decomposition of a Jacobi matrix fails."""


class OracleError(LevyFockError):
    """
    Raised when a moment sequence does not admit the requested oracle value.

    Parameters
    ----------
    order : int
        Order of the Hankel matrix that is not positive definite.
    """

    def __init__(self, order: int) -> None:
        self.order = order
        super().__init__(f"Hankel matrix of order {order} is not positive definite")


class ConfigError(LevyFockError):
    """
    Raised when an experiment config is missing, malformed or inconsistent.

    Parameters
    ----------
    field : str
        Path of the offending field, e.g. ``"experiment/truncation@levels"``.
    message : str
        What is wrong with it.
    """

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"{field}: {message}")
