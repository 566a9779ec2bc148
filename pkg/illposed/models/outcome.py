"""Result models for diagnostics and parameter choice rules."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np


class PicardVerdict(StrEnum):
    """Heuristic reading of the discrete Picard partial sums."""

    CONVERGING = "converging"
    DIVERGING = "diverging"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class PicardReport:
    """Partial sums S_N = sum_{n<=N} sigma_n^-2 <y, u_n>^2 and their verdict."""

    partial_sums: np.ndarray
    coefficients: np.ndarray
    verdict: PicardVerdict
    ratio: float  # Last-quartile over middle-quartile geometric mean increment


@dataclass(frozen=True, eq=False)
class ChoiceOutcome:
    """Result of a parameter choice rule.

    ``alpha`` is the selected regularization parameter (for iteration counts
    the parameter 1/m), ``index`` its position in the scanned grid and
    ``scan`` the values the rule minimized or tested, keyed by name.
    """

    alpha: float
    rule: str
    index: int | None = None
    residual: float | None = None
    scan: dict[str, np.ndarray] = field(default_factory=dict)
    flagged: bool = False  # Boundary or precondition case, see ``note``
    note: str = ""


@dataclass(frozen=True)
class DimensionChoice:
    """Discretization dimension picked by an a priori rule."""

    n: int
    flagged: bool = False
    note: str = ""
