"""Exception types shared across the package.

The CLI maps these onto exit codes, so raising the right class matters:
argument problems -> 2, data problems -> 3, numerical divergence -> 4,
inference failure -> 5.
"""


class PlsinetError(Exception):
    """Base class for all package errors."""


class ShapeError(PlsinetError, ValueError):
    """Array dimensions inconsistent with the operation's contract."""


class DomainError(PlsinetError, ValueError):
    """Argument value outside the mathematically valid domain."""


class DataError(PlsinetError, ValueError):
    """Input data violates the outcome family's requirements."""


class FactorizationError(PlsinetError, ValueError):
    """Cholesky factorization hit a non-positive pivot."""


class NumericOverflowError(PlsinetError, FloatingPointError):
    """Non-finite value produced inside a numeric kernel."""


class DivergenceError(PlsinetError, RuntimeError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int, learning_rate: float):
        self.epoch = epoch
        self.learning_rate = learning_rate
        super().__init__(
            f"training diverged at epoch {epoch} (loss is not finite); "
            f"try a smaller learning rate than {learning_rate:g}"
        )


class InferenceFailureError(PlsinetError, RuntimeError):
    """Too many bootstrap replicates failed to fit."""


class CheckpointError(PlsinetError, ValueError):
    """Malformed or incompatible checkpoint file."""
