"""Exceptions raised by the illposed toolkit."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    import numpy as np


class IllPosedError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(IllPosedError, ValueError):
    """Non-finite or otherwise malformed input data."""


class ShapeError(InputError):
    """Array dimensions do not fit together."""


class ParameterError(IllPosedError, ValueError):
    """A regularization or algorithm parameter is outside its admissible range."""


class SizeError(ParameterError):
    """A problem size is too small."""


class DefinitenessError(IllPosedError, ArithmeticError):
    """A matrix passed to the SPD solver is not symmetric positive definite."""


class DiscrepancyExhaustedError(IllPosedError):
    """No grid member satisfies the discrepancy bound."""

    def __init__(self, message: str, final_residual: float, alpha: float) -> None:
        super().__init__(message)
        self.final_residual = final_residual
        self.alpha = alpha


class ConvergenceError(IllPosedError):
    """An iteration exhausted its budget before reaching its tolerance."""

    def __init__(self, message: str, last_iterate: np.ndarray | None = None) -> None:
        super().__init__(message)
        self.last_iterate = last_iterate


class AlphaRuleError(ConvergenceError):
    """The Levenberg-Marquardt residual target is not attainable."""

    def __init__(
        self,
        message: str,
        attainable: tuple[float, float],
        last_iterate: np.ndarray | None = None,
    ) -> None:
        super().__init__(message, last_iterate)
        self.attainable = attainable


class DivergenceError(ConvergenceError):
    """The iteration error kept growing away from its running minimum."""


class DomainError(IllPosedError, ValueError):
    """Evaluation point lies outside the admitted ball of a nonlinear problem."""


class SubspaceError(IllPosedError, ValueError):
    """A subspace basis is not orthonormal or leaves the range of the operator."""


class MonotonicityError(IllPosedError):
    """A quantity that must be monotone in the regularization parameter is not."""


class DegeneracyError(IllPosedError):
    """All importance weights underflowed to zero."""


class ConfigValidationError(IllPosedError, ValueError):
    """An experiment configuration does not validate."""


class AcceptanceError(IllPosedError):
    """A self-test acceptance criterion failed."""
