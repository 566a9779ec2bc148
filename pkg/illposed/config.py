"""Experiment configuration schema and loading.

The ground truth of a linear problem is x = |A|^nu w with ||w|| = rho, where
``truth.w`` is ``smooth`` (the normalized constant function), ``random`` (a
Gaussian draw seeded by ``truth.seed``) or ``mode`` (the leading right
singular vector). Tikhonov saturation against TSVD on the integration
operator needs ``truth = {"nu": 4, "w": "mode"}`` with ``rule = "morozov"``:
Tikhonov then fits a slope at most 0.78 and TSVD about 1. With the smooth or
random representer both methods fit below 0.78 at nu = 4.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
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
    DEFAULT_GRID_RATIO,
    DEFAULT_GRID_SIZE,
    DEFAULT_MASTER_SEED,
    DEFAULT_MAX_ITER,
    DEFAULT_REALIZATIONS,
    DEFAULT_SIGMA_LM,
    DEFAULT_TAU,
    LINEAR_PROBLEMS,
    METHODS,
    MIN_PROBLEM_SIZE,
    NONLINEAR_METHODS,
    PROJECTION_METHODS,
    PROBLEMS,
    RULE_APRIORI,
    RULE_NONE,
    RULES,
)
from .exceptions import ConfigValidationError
from .models.experiment import ExperimentConfig

_LOGGER = logging.getLogger(__name__)

POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
NONNEGATIVE = vol.All(vol.Coerce(float), vol.Range(min=0))
UNIT_OPEN = vol.All(vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False))
COUNT = vol.All(int, vol.Range(min=1))
SEED = vol.All(int, vol.Range(min=0, max=2**64 - 1))


def get_config_schema(defaults: dict[str, Any] | None = None) -> vol.Schema:
    """Get the experiment schema with optional defaults."""
    defaults = defaults or {}
    return vol.Schema(
        {
            vol.Required(CONF_PROBLEM): {
                vol.Required("name"): vol.In(PROBLEMS),
                vol.Optional("n", default=defaults.get("n", 64)): vol.All(int, vol.Range(min=MIN_PROBLEM_SIZE)),
            },
            vol.Optional(CONF_TRUTH, default={}): {
                vol.Optional("nu", default=1.0): NONNEGATIVE,
                vol.Optional("rho", default=1.0): POSITIVE,
                vol.Optional("w", default="smooth"): vol.In(("smooth", "random", "mode")),
                vol.Optional("seed", default=0): SEED,
            },
            vol.Required(CONF_METHOD): vol.In(METHODS),
            vol.Optional(CONF_RULE, default=defaults.get(CONF_RULE, RULE_APRIORI)): vol.In(RULES),
            vol.Optional(CONF_RULE_PARAMS, default={}): {
                vol.Optional("c", default=1.0): POSITIVE,
                vol.Optional("alpha0"): POSITIVE,
                vol.Optional("q", default=DEFAULT_GRID_RATIO): UNIT_OPEN,
                vol.Optional("grid_size", default=DEFAULT_GRID_SIZE): vol.All(int, vol.Range(min=2)),
                vol.Optional("nu_rule"): POSITIVE,
                vol.Optional("irgn_q", default=2.0): vol.All(vol.Coerce(float), vol.Range(min=1, min_included=False)),
                vol.Optional("max_iter", default=DEFAULT_MAX_ITER): COUNT,
                vol.Optional("sigma_prior", default=1.0): POSITIVE,
                vol.Optional("samples", default=10_000): vol.All(int, vol.Range(min=2)),
            },
            vol.Required(CONF_DELTA_GRID): {
                vol.Required("start"): POSITIVE,
                vol.Optional("factor", default=0.1): UNIT_OPEN,
                vol.Optional("count", default=1): COUNT,
            },
            vol.Optional(CONF_TAU, default=defaults.get(CONF_TAU, DEFAULT_TAU)): vol.All(
                vol.Coerce(float), vol.Range(min=1, min_included=False)
            ),
            vol.Optional(CONF_SIGMA_LM, default=DEFAULT_SIGMA_LM): UNIT_OPEN,
            vol.Optional(CONF_SEEDS, default={}): {
                vol.Optional("master", default=DEFAULT_MASTER_SEED): SEED,
                vol.Optional("realizations", default=DEFAULT_REALIZATIONS): COUNT,
            },
            vol.Optional(CONF_OUTPUT, default=defaults.get(CONF_OUTPUT, "results.csv")): str,
            vol.Optional(CONF_AGGREGATE, default="median"): vol.In(("median", "mean")),
        },
        extra=vol.PREVENT_EXTRA,
    )


def _check_combination(config: ExperimentConfig) -> None:
    """Reject method, rule and problem combinations the runner cannot execute."""
    if config.method not in NONLINEAR_METHODS and config.problem not in LINEAR_PROBLEMS:
        raise ConfigValidationError(f"method: {config.method} needs a linear problem, got {config.problem}")
    if config.method in PROJECTION_METHODS and config.rule not in (RULE_APRIORI, RULE_NONE):
        raise ConfigValidationError(f"rule: {config.method} supports apriori or none, got {config.rule}")


def validate_config(data: Any) -> ExperimentConfig:
    """Validate a parsed document and build the experiment configuration."""
    try:
        validated = get_config_schema()(data)
    except vol.MultipleInvalid as err:
        first = err.errors[0]
        field = ".".join(str(part) for part in first.path) or "<root>"
        raise ConfigValidationError(f"{field}: {first.msg}") from err
    except vol.Invalid as err:
        field = ".".join(str(part) for part in err.path) or "<root>"
        raise ConfigValidationError(f"{field}: {err.msg}") from err
    config = ExperimentConfig.from_dict(validated)
    _check_combination(config)
    _LOGGER.debug("Validated experiment %s/%s on %s", config.method, config.rule, config.problem)
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON experiment file."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigValidationError(f"<file>: cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigValidationError(f"<file>: {path} is not valid JSON: {err}") from err
    return validate_config(data)
