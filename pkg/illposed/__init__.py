"""Regularization toolkit for discrete ill-posed inverse problems.

Spectral filters with parameter choice rules, projection methods, nonlinear
iterative regularization, frequentist and Bayesian estimators, and a
benchmark runner reproducing convergence rates on problems with known
singular systems.
"""

from __future__ import annotations

from .exceptions import IllPosedError
from .linalg import solve_spd, svd
from .models.experiment import ExperimentConfig, RunRecord
from .models.filter import Filter
from .models.singular_system import RandomSource, SingularSystem
from .runner import run_experiment

try:
    from ._version import version as __version__
except ImportError:  # pragma: no cover
    __version__ = "0.0.0"

__all__ = [
    "ExperimentConfig",
    "Filter",
    "IllPosedError",
    "RandomSource",
    "RunRecord",
    "SingularSystem",
    "run_experiment",
    "solve_spd",
    "svd",
]
