"""A module containing the toolkit's exception hierarchy."""

from typing import Any


class EmitterKitError(Exception):
    """Base class of every error raised by the toolkit."""
    code: str = "emitterkit-error"
    exit_code: int = 1
    status_code: int = 500

    def __init__(self, message: str = "", **context: Any) -> None:
        """The initializer of the error.

        Args:
            message (str): Human readable description.
            **context: Extra values reported alongside the message.
        """

        super().__init__(message or self.code)
        self.message = message or self.code
        self.context = context

    def to_dict(self) -> dict:
        """A method rendering the error for JSON output.

        Returns:
            dict: Code, message and context.
        """

        return {
            "code": self.code,
            "detail": self.message,
            "context": {k: str(v) for k, v in self.context.items()},
        }


class DomainValidationError(EmitterKitError):
    """Invalid input or violated precondition."""
    code = "validation-error"
    exit_code = 2
    status_code = 422


class DegenerateRates(DomainValidationError):
    code = "rates-degenerate"


class DegenerateNormalization(DomainValidationError):
    code = "normalization-degenerate"


class DegenerateDesign(DomainValidationError):
    code = "design-degenerate"


class DegenerateGeometry(DomainValidationError):
    code = "geometry-degenerate"


class RangeOrder(DomainValidationError):
    code = "range-order"


class OutOfRange(DomainValidationError):
    code = "out-of-range"


class UnwrapStep(DomainValidationError):
    code = "unwrap-step"


class UncalibratableRegion(DomainValidationError):
    code = "uncalibratable-region"


class MismatchedStacks(DomainValidationError):
    code = "stacks-mismatched"


class EmptyChannel(DomainValidationError):
    code = "channel-empty"


class MissingSync(DomainValidationError):
    code = "sync-missing"


class EmptyDecay(DomainValidationError):
    code = "decay-empty"


class EmptySpectrum(DomainValidationError):
    code = "spectrum-empty"


class InsufficientSamples(DomainValidationError):
    code = "samples-insufficient"


class CapacityExceeded(DomainValidationError):
    code = "capacity-exceeded"


class EnsembleRecord(DomainValidationError):
    code = "record-g2-ensemble"


class FitError(EmitterKitError):
    """A fit that could not produce a trustworthy estimate."""
    code = "fit-error"
    exit_code = 3
    status_code = 422


class NotConverged(FitError):
    """Optimizer stopped without meeting its tolerance."""
    code = "fit-not-converged"

    def __init__(self, message: str = "", best_so_far: Any = None, **context: Any) -> None:
        super().__init__(message, **context)
        self.best_so_far = best_so_far


class InvalidRegime(FitError):
    code = "fit-invalid-regime"


class UnstableBootstrap(FitError):
    code = "bootstrap-unstable"


class StorageError(EmitterKitError):
    """File could not be read or written."""
    code = "storage-error"
    exit_code = 4
    status_code = 500


class FormatError(StorageError):
    code = "format-error"


class DegenerateFitWarning(UserWarning):
    """Fitted components that the data cannot separate."""


class SmallSampleWarning(UserWarning):
    """Summary statistics computed from a single sample."""
