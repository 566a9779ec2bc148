"""Experiment configuration and result records for the benchmark runner."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..const import (
    CONF_AGGREGATE,
    CONF_DELTA_GRID,
    CONF_METHOD,
    CONF_OUTPUT,
    CONF_PROBLEM,
    CONF_RULE,
    CONF_RULE_PARAMS,
    CONF_SEEDS,
    CONF_SIGMA_LM,
    CONF_TAU,
    CONF_TRUTH,
)
from ..exceptions import InputError


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one benchmark sweep."""

    # Problem attributes
    problem: str
    n: int

    # Ground truth attributes
    nu: float
    rho: float
    w_kind: str
    truth_seed: int

    # Method attributes
    method: str
    rule: str
    rule_params: dict[str, Any]
    tau: float
    sigma_lm: float

    # Sweep attributes
    delta_start: float
    delta_factor: float
    delta_count: int
    master_seed: int
    realizations: int

    # Output attributes
    output: str
    aggregate: str

    # Factory methods
    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Create an ExperimentConfig from a schema-validated document.

        Args:
            data: Output of the voluptuous experiment schema

        Returns:
            ExperimentConfig instance
        """
        problem = data[CONF_PROBLEM]
        truth = data[CONF_TRUTH]
        grid = data[CONF_DELTA_GRID]
        seeds = data[CONF_SEEDS]
        return cls(
            problem=problem["name"],
            n=problem["n"],
            nu=truth["nu"],
            rho=truth["rho"],
            w_kind=truth["w"],
            truth_seed=truth["seed"],
            method=data[CONF_METHOD],
            rule=data[CONF_RULE],
            rule_params=dict(data[CONF_RULE_PARAMS]),
            tau=data[CONF_TAU],
            sigma_lm=data[CONF_SIGMA_LM],
            delta_start=grid["start"],
            delta_factor=grid["factor"],
            delta_count=grid["count"],
            master_seed=seeds["master"],
            realizations=seeds["realizations"],
            output=data[CONF_OUTPUT],
            aggregate=data[CONF_AGGREGATE],
        )

    @property
    def deltas(self) -> np.ndarray:
        """Strictly decreasing noise levels start * factor^k."""
        return self.delta_start * self.delta_factor ** np.arange(self.delta_count)


@dataclass(frozen=True)
class RunRecord:
    """One regularized solve: the unit row of the results table."""

    delta: float
    alpha_or_n: float
    error: float
    residual: float
    rule: str
    method: str
    seed: int
    wall_ms: float = 0.0
    realization: int = 0
    discrepancy_bound: float | None = field(default=None, compare=False)  # tau delta for discrepancy rules

    def __post_init__(self):
        for label in ("error", "residual"):
            value = getattr(self, label)
            if not (np.isfinite(value) and value >= 0):
                raise InputError(f"{label} must be finite and nonnegative, got {value}")


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log delta, log aggregated error)."""

    slope: float
    intercept: float
    residual: float
    points: int
