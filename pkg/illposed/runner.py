"""Benchmark runner.

Builds the configured problem and ground truth once, then solves every
(delta, realization) pair, possibly in worker threads, and returns the
records ordered by decreasing delta and realization index.
"""

from __future__ import annotations

import asyncio
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from ._utils_runner import realization_seeds
from .bayes import cm_monte_carlo, map_estimate
from .choice import apriori_alpha, filter_scan, geometric_grid, hanke_raus, l_curve, morozov, quasi_optimality
from .const import (
    DIAGONAL_CUBIC_C,
    FILTER_LANDWEBER,
    FILTER_TIKHONOV,
    FILTER_TSVD,
    LINEAR_METHODS,
    LINEAR_PROBLEMS,
    NOISE_EXACT,
    NOISE_WHITE,
    NONLINEAR_METHODS,
    PROJECTION_METHODS,
    RULE_APRIORI,
    RULE_HANKE_RAUS,
    RULE_L_CURVE,
    RULE_MOROZOV,
    RULE_NONE,
    RULE_QUASI_OPTIMALITY,
    STATISTICAL_METHODS,
)
from .exceptions import ConvergenceError, IllPosedError, ParameterError
from .linalg import gaussian_vector
from .models.experiment import ExperimentConfig, RunRecord
from .models.filter import Filter
from .models.problem import LinearProblem, NonlinearProblem
from .models.singular_system import RandomSource, SingularSystem
from .models.subspace import Subspace
from .models.trace import StopReason
from .nonlinear import irgn, levenberg_marquardt, nl_landweber
from .problems import (
    add_noise_exact,
    make_autoconvolution,
    make_diagonal_cubic,
    make_gaussian_kernel_operator,
    make_ground_truth,
    make_integration_operator,
    make_linear_forward,
    midpoint_grid,
    source_representer,
)
from .projection import apriori_dimension, dual_lsq_projection, lsq_projection
from .spectral import default_omega, filter_apply, landweber_run
from .statistics import pinsker

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Solution:
    """Regularized solution of one noisy instance."""

    x: np.ndarray
    alpha_or_n: float
    residual: float
    discrepancy_bound: float | None = None


class ExperimentRunner:
    """Runs one configured sweep over noise levels and realizations.

    Attributes:
        config: Validated experiment configuration
        threads: Maximum number of solves running at once
        forward: Forward map used for data and residuals
        linear: Discrete linear problem, None for nonlinear benchmarks
        x_dag: Ground truth solution
        y: Exact data
    """

    def __init__(self, config: ExperimentConfig, threads: int = 1) -> None:
        """Initialize the runner and build problem, truth and exact data.

        Args:
            config: Validated experiment configuration
            threads: Maximum number of concurrent solves
        """
        if threads < 1:
            raise ParameterError(f"threads must be positive, got {threads}")
        self.config = config
        self.threads = threads
        self.params = config.rule_params
        self.linear: LinearProblem | None = None
        self.system: SingularSystem | None = None

        linear_problem = config.problem in LINEAR_PROBLEMS
        if config.method in LINEAR_METHODS + STATISTICAL_METHODS and not linear_problem:
            raise ParameterError(f"method {config.method} needs a linear problem, got {config.problem}")

        truth_source = RandomSource(seed=config.truth_seed)
        if linear_problem:
            self.linear = (
                make_integration_operator(config.n)
                if config.problem == "integration"
                else make_gaussian_kernel_operator(config.n)
            )
            self.system = self.linear.singular_system
            w = source_representer(self.linear, config.w_kind, config.rho, truth_source)
            self.x_dag = make_ground_truth(self.linear, config.nu, w).x_dag
            self.forward: NonlinearProblem = make_linear_forward(self.linear.a, name=config.problem)
            self.x0 = np.zeros(config.n)
        elif config.problem == "diagonal_cubic":
            sigma = 1.0 / np.arange(1, config.n + 1)
            self.forward = make_diagonal_cubic(sigma, DIAGONAL_CUBIC_C)
            self.x_dag = sigma**config.nu * self._diagonal_representer(truth_source)
            self.x0 = np.zeros(config.n)
        else:
            self.forward = make_autoconvolution(config.n)
            self.x_dag = config.rho * (0.5 + midpoint_grid(config.n))
            self.x0 = np.full(config.n, config.rho)
        self.y = self.forward.evaluate(self.x_dag)

    def _diagonal_representer(self, src: RandomSource) -> np.ndarray:
        n, kind = self.config.n, self.config.w_kind
        if kind == "smooth":
            w = 1.0 / np.arange(1, n + 1)
        elif kind == "random":
            w = gaussian_vector(src, n)
        else:
            w = np.eye(n)[0]
        return self.config.rho * w / np.linalg.norm(w)

    @property
    def noise_model(self) -> str:
        return NOISE_WHITE if self.config.method in STATISTICAL_METHODS else NOISE_EXACT

    @property
    def rule_label(self) -> str:
        """Rule as recorded: iterative nonlinear methods stop by their own rule, statistical ones use none."""
        if self.config.method in STATISTICAL_METHODS:
            return RULE_NONE
        if self.config.method in ("nl_landweber", "lm"):
            return RULE_MOROZOV
        if self.config.method == "irgn":
            return RULE_APRIORI
        return self.config.rule

    def noisy_data(self, delta: float, src: RandomSource) -> np.ndarray:
        if self.noise_model == NOISE_WHITE:
            return self.y + delta * gaussian_vector(src, self.y.size)
        return add_noise_exact(self.y, delta, src)

    # Parameter helpers
    def _nu_rule(self) -> float:
        nu = self.params.get("nu_rule", self.config.nu)
        if nu <= 0:
            raise ParameterError("the a priori rule needs a positive source order; set rule_params.nu_rule")
        return nu

    def _alpha0(self) -> float:
        return self.params.get("alpha0", float(self.system.sigma[0]) ** 2)

    def _grid(self) -> np.ndarray:
        return geometric_grid(self._alpha0(), self.params["grid_size"], self.params["q"])

    def _filter(self) -> Filter:
        omega = default_omega(float(self.system.sigma[0]))
        return Filter.from_name(self.config.method, omega=omega)

    def _residual(self, x: np.ndarray, y_delta: np.ndarray) -> float:
        return float(np.linalg.norm(self.forward.forward(x) - y_delta))

    # Method dispatch
    def solve(self, delta: float, y_delta: np.ndarray, src: RandomSource) -> Solution:
        """Apply the configured method and rule to one data vector."""
        method = self.config.method
        if method in (FILTER_TSVD, FILTER_TIKHONOV, FILTER_LANDWEBER):
            return self._solve_filter(delta, y_delta)
        if method in PROJECTION_METHODS:
            return self._solve_projection(delta, y_delta)
        if method in NONLINEAR_METHODS:
            return self._solve_nonlinear(delta, y_delta)
        return self._solve_statistical(delta, y_delta, src)

    def _solve_filter(self, delta: float, y_delta: np.ndarray) -> Solution:
        filt = self._filter()
        rule = self.config.rule
        landweber = filt.name == FILTER_LANDWEBER

        if rule in (RULE_APRIORI, RULE_NONE):
            if rule == RULE_APRIORI:
                alpha = apriori_alpha(delta, self.config.rho, self._nu_rule(), self.params["c"])
            else:
                alpha = self._alpha0()
            if landweber:
                alpha = 1.0 / max(1, math.ceil(1.0 / alpha))
            x = filter_apply(filt, alpha, self.system, y_delta)
            return Solution(x, 1.0 / alpha if landweber else alpha, self._residual(x, y_delta))

        if rule == RULE_MOROZOV:
            bound = self.config.tau * delta
            if landweber:
                run = landweber_run(
                    self.linear.a,
                    y_delta,
                    filt.omega,
                    delta=delta,
                    tau=self.config.tau,
                    max_iter=self.params["max_iter"],
                    sigma_max=float(self.system.sigma[0]),
                )
                return Solution(run.x, float(run.n_steps), float(run.residual_norms[-1]), bound)
            outcome = morozov(
                self.linear.a,
                y_delta,
                delta,
                self.config.tau,
                self._grid(),
                lambda a: filter_apply(filt, a, self.system, y_delta),
            )
            x = filter_apply(filt, outcome.alpha, self.system, y_delta)
            return Solution(x, outcome.alpha, self._residual(x, y_delta), bound)

        if landweber:
            steps = np.unique(np.round(np.geomspace(1, self.params["max_iter"], self.params["grid_size"])))
            alphas = 1.0 / steps
        else:
            alphas = self._grid()
        solutions, residuals, norms = filter_scan(filt, alphas, self.system, y_delta)
        if rule == RULE_QUASI_OPTIMALITY:
            outcome = quasi_optimality(alphas, solutions)
        elif rule == RULE_HANKE_RAUS:
            outcome = hanke_raus(alphas, residuals)
        elif rule == RULE_L_CURVE:
            outcome = l_curve(alphas, residuals, norms)
        else:
            raise ParameterError(f"rule {rule} is not available for {filt.name}")
        x = solutions[outcome.index]
        return Solution(x, 1.0 / outcome.alpha if landweber else outcome.alpha, self._residual(x, y_delta))

    def _solve_projection(self, delta: float, y_delta: np.ndarray) -> Solution:
        rule = self.config.rule
        if rule == RULE_APRIORI:
            n = apriori_dimension(delta, self.system.sigma).n
        elif rule == RULE_NONE:
            n = self.system.rank
        else:
            raise ParameterError(f"rule {rule} is not available for {self.config.method}")
        if n == 0:
            x = np.zeros(self.linear.a.shape[1])
        elif self.config.method == "lsq_proj":
            x = lsq_projection(self.linear.a, y_delta, Subspace(basis=self.system.v[:, :n]))
        else:
            x = dual_lsq_projection(self.linear.a, y_delta, Subspace(basis=self.system.u[:, :n]), system=self.system)
        return Solution(x, float(n), self._residual(x, y_delta))

    def _solve_nonlinear(self, delta: float, y_delta: np.ndarray) -> Solution:
        method, tau, max_iter = self.config.method, self.config.tau, self.params["max_iter"]
        if method == "nl_landweber":
            trace = nl_landweber(self.forward, y_delta, delta, tau, self.x0, max_iter, reference=self.x_dag)
        elif method == "lm":
            trace = levenberg_marquardt(
                self.forward, y_delta, delta, tau, self.config.sigma_lm, self.x0, max_iter, reference=self.x_dag
            )
        else:
            alpha0 = self.params.get("alpha0", 1.0)
            nu = min(max(self.params.get("nu_rule", max(self.config.nu, 1.0)), 1.0), 2.0)
            trace = irgn(
                self.forward, y_delta, delta, tau, self.x0, alpha0, self.params["irgn_q"], nu, max_iter, self.x_dag
            )
            return Solution(trace.x, float(trace.n_steps), float(trace.residual_norms[-1]))
        if trace.stop_reason is not StopReason.DISCREPANCY:
            raise ConvergenceError(
                f"{method} stopped by {trace.stop_reason} after {trace.n_steps} steps above residual {tau * delta:.6g}",
                last_iterate=trace.x,
            )
        return Solution(trace.x, float(trace.n_steps), float(trace.residual_norms[-1]), tau * delta)

    def _solve_statistical(self, delta: float, y_delta: np.ndarray, src: RandomSource) -> Solution:
        method = self.config.method
        if method == "pinsker":
            solution = pinsker(self.system.sigma, self._nu_rule(), self.config.rho, delta)
            coeffs = solution.gamma * self.system.data_coefficients(y_delta) / self.system.sigma
            x = self.system.v @ coeffs
            return Solution(x, solution.kappa, self._residual(x, y_delta))
        sigma_prior = self.params["sigma_prior"]
        if method == "map":
            x = map_estimate(self.linear.a, y_delta, delta, sigma_prior)
            return Solution(x, (delta / sigma_prior) ** 2, self._residual(x, y_delta))
        x, summary = cm_monte_carlo(self.linear.a, y_delta, delta, sigma_prior, self.params["samples"], src)
        return Solution(x, summary.effective_sample_size, self._residual(x, y_delta))

    # Orchestration
    def run_one(self, delta: float, realization: int, seed: int) -> RunRecord:
        """Solve one (delta, realization) instance."""
        src = RandomSource(seed=seed)
        started = time.perf_counter()
        try:
            y_delta = self.noisy_data(delta, src)
            solution = self.solve(delta, y_delta, src)
        except IllPosedError as err:
            err.add_note(f"while solving {self.config.method}/{self.rule_label} at delta={delta:g}, seed={seed}")
            raise
        wall_ms = 1000.0 * (time.perf_counter() - started)
        _LOGGER.debug("delta=%.3g realization=%d done in %.1f ms", delta, realization, wall_ms)
        return RunRecord(
            delta=float(delta),
            alpha_or_n=float(solution.alpha_or_n),
            error=float(np.linalg.norm(solution.x - self.x_dag)),
            residual=solution.residual,
            rule=self.rule_label,
            method=self.config.method,
            seed=seed,
            wall_ms=wall_ms,
            realization=realization,
            discrepancy_bound=solution.discrepancy_bound,
        )

    async def async_run(self) -> list[RunRecord]:
        """Solve all instances with at most ``threads`` running at once, in deterministic order."""
        semaphore = asyncio.Semaphore(self.threads)
        seeds = realization_seeds(self.config.master_seed, self.config.realizations)

        async def solve_in_thread(delta: float, realization: int, seed: int) -> RunRecord:
            async with semaphore:
                return await asyncio.to_thread(self.run_one, delta, realization, seed)

        tasks = [
            solve_in_thread(float(delta), realization, seed)
            for delta in self.config.deltas
            for realization, seed in enumerate(seeds)
        ]
        records = await asyncio.gather(*tasks)
        _LOGGER.info(
            "Finished %d runs of %s/%s on %s", len(records), self.config.method, self.rule_label, self.config.problem
        )
        return list(records)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> list[RunRecord]:
    """Run a sweep synchronously; records ordered by (delta descending, realization)."""
    return asyncio.run(ExperimentRunner(config, threads).async_run())
