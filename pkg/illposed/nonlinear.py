"""Nonlinear regularization: derivative probes, Tikhonov, Landweber, Levenberg-Marquardt and IRGN.

Theory for nonlinear Tikhonov concerns global minimizers; the damped
Gauss-Newton solver here finds stationary points.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .const import (
    ARMIJO_CONSTANT,
    DISCREPANCY_REFINE_CAP,
    DIVERGENCE_FACTOR,
    DIVERGENCE_WINDOW,
    GRADIENT_TOLERANCE,
    LANDWEBER_DERIVATIVE_BOUND,
    LM_ALPHA_BRACKET,
    LM_BISECTION_CAP,
    LM_RATIO_TOLERANCE,
    REMAINDER_EXACT_TOLERANCE,
    RULE_MOROZOV,
    STAGNATION_TOLERANCE,
)
from .exceptions import (
    AlphaRuleError,
    ConvergenceError,
    DiscrepancyExhaustedError,
    DivergenceError,
    DomainError,
    ParameterError,
)
from .linalg import as_vector, gaussian_vector, solve_spd, svd
from .models.outcome import ChoiceOutcome
from .models.problem import NonlinearProblem
from .models.singular_system import RandomSource
from .models.trace import DerivativeCheck, IterationTrace, NonlinearityProbe, StopReason

_LOGGER = logging.getLogger(__name__)

_DEFAULT_SCALES = np.geomspace(1e-1, 1e-4, 7)
_LINE_SEARCH_HALVINGS = 60


def _unit_direction(src: RandomSource, n: int) -> np.ndarray:
    d = gaussian_vector(src, n)
    return d / np.linalg.norm(d)


def check_derivative(
    problem: NonlinearProblem,
    x,
    scales=None,
    direction=None,
) -> DerivativeCheck:
    """Taylor remainders ||F(x+h) - F(x) - F'(x)h|| along one direction over decreasing ||h||.

    The slope is fitted in log-log scale; a map whose remainders all vanish
    is reported exact with slope nan. The default direction is a fixed
    pseudo-random unit vector.
    """
    x = as_vector(x, "x", size=problem.dim)
    scales = _DEFAULT_SCALES if scales is None else as_vector(scales, "scales")
    if direction is None:
        direction = _unit_direction(RandomSource(seed=0), problem.dim)
    else:
        direction = as_vector(direction, "direction", size=problem.dim)
        direction = direction / np.linalg.norm(direction)

    fx = problem.evaluate(x)
    jac = problem.jacobian(x)
    remainders = np.empty(scales.size)
    for i, scale in enumerate(scales):
        h = scale * direction
        remainders[i] = np.linalg.norm(problem.evaluate(x + h) - fx - jac @ h)

    tolerance = REMAINDER_EXACT_TOLERANCE * max(1.0, float(np.linalg.norm(fx)))
    significant = remainders > tolerance
    if np.count_nonzero(significant) < 2:
        return DerivativeCheck(scales=scales, remainders=remainders, slope=float("nan"), exact=True)
    slope = float(np.polyfit(np.log(scales[significant]), np.log(remainders[significant]), 1)[0])
    _LOGGER.debug("Derivative check for %s: remainder slope %.4f", problem.name, slope)
    return DerivativeCheck(scales=scales, remainders=remainders, slope=slope, exact=False)


def tangential_cone_probe(
    problem: NonlinearProblem,
    x,
    radius: float,
    samples: int,
    src: RandomSource,
) -> NonlinearityProbe:
    """Sample the tangential cone constant eta and the Lipschitz constant of F' in a ball around x.

    Each sample draws a uniform direction and a uniform length in (0, radius].
    Ratios whose denominator falls below 1e-14 are skipped.
    """
    if radius <= 0 or radius > problem.domain_radius:
        raise ParameterError(f"radius must lie in (0, {problem.domain_radius}], got {radius}")
    if samples < 1:
        raise ParameterError(f"samples must be positive, got {samples}")
    x = as_vector(x, "x", size=problem.dim)
    fx = problem.evaluate(x)
    jac = problem.jacobian(x)

    eta = 0.0
    lipschitz = 0.0
    skipped = 0
    for _ in range(samples):
        length = radius * (1.0 - src.generator.random())
        h = length * _unit_direction(src, problem.dim)
        try:
            difference = problem.evaluate(x + h) - fx
        except DomainError:
            skipped += 1
            continue
        remainder = float(np.linalg.norm(difference - jac @ h))
        denominator = float(np.linalg.norm(difference))
        if denominator < 1e-14:
            skipped += 1
            continue
        eta = max(eta, remainder / denominator)
        lipschitz = max(lipschitz, 2.0 * remainder / length**2)

    _LOGGER.debug("Tangential cone probe for %s: eta=%.4g, L=%.4g, skipped %d", problem.name, eta, lipschitz, skipped)
    return NonlinearityProbe(eta_estimate=eta, lipschitz_estimate=lipschitz, samples=samples, skipped=skipped)


def _tikhonov_objective(problem: NonlinearProblem, x, y, alpha, x0) -> float:
    return 0.5 * float(np.sum((problem.evaluate(x) - y) ** 2)) + 0.5 * alpha * float(np.sum((x - x0) ** 2))


def nl_tikhonov(
    problem: NonlinearProblem,
    y_delta,
    alpha: float,
    x0,
    max_iter: int = 100,
    x_start=None,
) -> np.ndarray:
    """Stationary point of 1/2 ||F(x) - y||^2 + alpha/2 ||x - x0||^2 by damped Gauss-Newton.

    Steps solve (J^T J + alpha I) s = -grad and are halved until the Armijo
    condition holds. Stops once ||grad|| <= 1e-8 (1 + ||y||).
    """
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    y_delta = as_vector(y_delta, "y_delta")
    x0 = as_vector(x0, "x0", size=problem.dim)
    x = x0.copy() if x_start is None else as_vector(x_start, "x_start", size=problem.dim).copy()
    tolerance = GRADIENT_TOLERANCE * (1.0 + float(np.linalg.norm(y_delta)))
    identity = np.eye(problem.dim)

    value = _tikhonov_objective(problem, x, y_delta, alpha, x0)
    for iteration in range(max_iter + 1):
        jac = problem.jacobian(x)
        gradient = jac.T @ (problem.evaluate(x) - y_delta) + alpha * (x - x0)
        gradient_norm = float(np.linalg.norm(gradient))
        if gradient_norm <= tolerance:
            _LOGGER.debug("Nonlinear Tikhonov converged after %d steps (alpha=%.6g)", iteration, alpha)
            return x
        if iteration == max_iter:
            break

        step = solve_spd(jac.T @ jac + alpha * identity, -gradient)
        slope = float(gradient @ step)
        t = 1.0
        for _ in range(_LINE_SEARCH_HALVINGS):
            try:
                trial = _tikhonov_objective(problem, x + t * step, y_delta, alpha, x0)
            except DomainError:
                trial = math.inf
            if trial <= value + ARMIJO_CONSTANT * t * slope:
                break
            t *= 0.5
        else:
            raise ConvergenceError(f"line search stalled at gradient norm {gradient_norm:.3g}", last_iterate=x)
        x = x + t * step
        value = trial

    raise ConvergenceError(
        f"nonlinear Tikhonov did not reach gradient norm {tolerance:.3g} in {max_iter} steps", last_iterate=x
    )


def nl_tikhonov_discrepancy(
    problem: NonlinearProblem,
    y_delta,
    delta: float,
    tau: float,
    x0,
    alphas,
    max_iter: int = 100,
) -> tuple[ChoiceOutcome, np.ndarray]:
    """Scan a decreasing alpha grid for a minimizer with delta < residual <= tau delta.

    Each minimization starts from the previous one. When the first grid alpha
    with residual at most tau delta overshoots to residual <= delta, log alpha
    is bisected between it and its predecessor until the residual lands in
    (delta, tau delta]. If x0 already meets the bound it is returned flagged
    with alpha = inf; a selection still at or below delta after the bisection
    budget, or found at the first grid point, is returned flagged.
    """
    if tau <= 1:
        raise ParameterError(f"tau must exceed 1, got {tau}")
    y_delta = as_vector(y_delta, "y_delta")
    x0 = as_vector(x0, "x0", size=problem.dim)
    alphas = as_vector(alphas, "alphas")
    if alphas.size == 0 or np.any(np.diff(alphas) >= 0):
        raise ParameterError("alpha grid must be nonempty and strictly decreasing")
    threshold = tau * delta

    def residual_of(x: np.ndarray) -> float:
        return float(np.linalg.norm(problem.evaluate(x) - y_delta))

    start_residual = residual_of(x0)
    if start_residual <= threshold:
        _LOGGER.warning(
            "Initial guess already satisfies the discrepancy bound (%.6g <= %.6g)", start_residual, threshold
        )
        outcome = ChoiceOutcome(
            alpha=math.inf,
            rule=RULE_MOROZOV,
            residual=start_residual,
            flagged=True,
            note="x0 already satisfies the discrepancy bound",
        )
        return outcome, x0.copy()

    x = x0.copy()
    x_above = x0.copy()
    residuals: list[float] = []
    for i, alpha in enumerate(alphas):
        x = nl_tikhonov(problem, y_delta, float(alpha), x0, max_iter=max_iter, x_start=x)
        residual = residual_of(x)
        residuals.append(residual)
        _LOGGER.debug("Nonlinear discrepancy scan alpha=%.6g residual=%.6g", alpha, residual)
        if residual > threshold:
            x_above = x
            continue

        selected = float(alpha)
        if residual <= delta and i > 0:
            hi, lo = math.log(alphas[i - 1]), math.log(selected)
            for _ in range(DISCREPANCY_REFINE_CAP):
                mid = math.exp(0.5 * (hi + lo))
                trial = nl_tikhonov(problem, y_delta, mid, x0, max_iter=max_iter, x_start=x_above)
                trial_residual = residual_of(trial)
                if trial_residual > threshold:
                    hi, x_above = math.log(mid), trial
                    continue
                lo, x, residual, selected = math.log(mid), trial, trial_residual, mid
                if residual > delta:
                    break
            _LOGGER.debug("Refined discrepancy selection to alpha=%.6g residual=%.6g", selected, residual)

        below = residual <= delta
        if below:
            _LOGGER.warning("Residual %.6g at alpha=%.6g is not above delta=%.6g", residual, selected, delta)
        outcome = ChoiceOutcome(
            alpha=selected,
            rule=RULE_MOROZOV,
            index=i,
            residual=residual,
            scan={"alphas": alphas[: i + 1], "residuals": np.array(residuals)},
            flagged=below,
            note="residual not above delta; refine the grid" if below else "",
        )
        return outcome, x

    raise DiscrepancyExhaustedError(
        f"no grid alpha reaches residual {threshold:.6g}; final residual {residuals[-1]:.6g}",
        final_residual=residuals[-1],
        alpha=float(alphas[-1]),
    )


def landweber_threshold(eta: float) -> float:
    """Smallest admissible tau, 2(1 + eta)/(1 - 2 eta), for eta < 1/2."""
    if not 0 <= eta < 0.5:
        raise ParameterError(f"tangential cone constant must lie in [0, 1/2), got {eta}")
    return 2.0 * (1.0 + eta) / (1.0 - 2.0 * eta)


class _DivergenceGuard:
    """Flags a monitored norm staying above twice its running minimum for a window of steps."""

    def __init__(self) -> None:
        self.minimum = math.inf
        self.streak = 0

    def update(self, value: float) -> bool:
        self.minimum = min(self.minimum, value)
        self.streak = self.streak + 1 if value > DIVERGENCE_FACTOR * self.minimum else 0
        return self.streak >= DIVERGENCE_WINDOW


def nl_landweber(
    problem: NonlinearProblem,
    y_delta,
    delta: float,
    tau: float,
    x0,
    max_iter: int,
    reference=None,
    eta: float | None = None,
) -> IterationTrace:
    """Nonlinear Landweber x_{n+1} = x_n - F'(x_n)^T (F(x_n) - y) with discrepancy stopping.

    F and y are divided by ||F'(x0)|| / 0.9 when that norm exceeds 0.9; the
    factor is reported as ``scale`` and residuals are kept in original units.
    With ``eta`` the condition tau > 2(1 + eta)/(1 - 2 eta) is enforced. An
    iterate that no longer moves ends the run with stop reason ``stagnation``.
    """
    y_delta = as_vector(y_delta, "y_delta")
    x = as_vector(x0, "x0", size=problem.dim).copy()
    if eta is not None and tau <= landweber_threshold(eta):
        raise ParameterError(f"tau={tau} must exceed {landweber_threshold(eta):.6g} for eta={eta}")
    if reference is not None:
        reference = as_vector(reference, "reference", size=problem.dim)

    start = svd(problem.jacobian(x))
    norm = float(start.sigma[0]) if start.rank else 0.0
    scale = norm / LANDWEBER_DERIVATIVE_BOUND if norm > LANDWEBER_DERIVATIVE_BOUND else 1.0
    threshold = tau * delta

    residual = y_delta - problem.evaluate(x)
    residuals = [float(np.linalg.norm(residual))]
    errors = None if reference is None else [float(np.linalg.norm(x - reference))]
    guard = _DivergenceGuard()
    guard.update(errors[0] if errors is not None else residuals[0])
    stop_reason = StopReason.MAX_ITER
    steps = 0

    if residuals[0] <= threshold:
        stop_reason = StopReason.DISCREPANCY
    else:
        for steps in range(1, max_iter + 1):
            step = (problem.jacobian(x).T @ residual) / scale**2
            x = x + step
            residual = y_delta - problem.evaluate(x)
            residuals.append(float(np.linalg.norm(residual)))
            if errors is not None:
                errors.append(float(np.linalg.norm(x - reference)))
            if guard.update(errors[-1] if errors is not None else residuals[-1]):
                raise DivergenceError(f"nonlinear Landweber diverged at step {steps}", last_iterate=x)
            if residuals[-1] <= threshold:
                stop_reason = StopReason.DISCREPANCY
                break
            if float(np.linalg.norm(step)) <= STAGNATION_TOLERANCE * (1.0 + float(np.linalg.norm(x))):
                stop_reason = StopReason.STAGNATION
                _LOGGER.warning("Nonlinear Landweber stalled at step %d with residual %.6g", steps, residuals[-1])
                break

    notes = [] if eta is not None else ["tau not checked against a tangential cone estimate"]
    if scale != 1.0:
        notes.append(f"forward map scaled by 1/{scale:.6g}")
    _LOGGER.info("Nonlinear Landweber stopped after %d steps (%s)", steps, stop_reason)
    return IterationTrace(
        x=x,
        n_steps=steps,
        stop_reason=stop_reason,
        residual_norms=np.array(residuals),
        error_norms=None if errors is None else np.array(errors),
        scale=scale,
        notes=notes,
    )


def lm_alpha(sigma_j: np.ndarray, coeffs: np.ndarray, perp: float, target: float) -> tuple[float, float]:
    """Bisection on log alpha for ||F'h_alpha + F(x) - y|| = target.

    The linearized residual squared is sum (alpha/(s^2 + alpha))^2 c^2 + perp^2,
    increasing in alpha. Returns (alpha, linearized residual).
    """
    total = float(np.hypot(np.linalg.norm(coeffs), perp))

    def linearized(alpha: float) -> float:
        return float(np.hypot(np.linalg.norm(alpha / (sigma_j**2 + alpha) * coeffs), perp))

    if sigma_j.size == 0 or target <= perp:
        raise AlphaRuleError(
            f"target residual {target:.6g} is not above the attainable minimum {perp:.6g}",
            attainable=(perp, total),
        )
    top = float(sigma_j[0]) ** 2
    lo, hi = math.log(LM_ALPHA_BRACKET[0] * top), math.log(LM_ALPHA_BRACKET[1] * top)
    if not linearized(math.exp(lo)) <= target <= linearized(math.exp(hi)):
        raise AlphaRuleError(
            f"target residual {target:.6g} is not bracketed by alpha in [{math.exp(lo):.3g}, {math.exp(hi):.3g}]",
            attainable=(linearized(math.exp(lo)), linearized(math.exp(hi))),
        )

    mid = 0.5 * (lo + hi)
    value = linearized(math.exp(mid))
    for _ in range(LM_BISECTION_CAP):
        mid = 0.5 * (lo + hi)
        value = linearized(math.exp(mid))
        if abs(value - target) <= LM_RATIO_TOLERANCE * target:
            break
        if value > target:
            hi = mid
        else:
            lo = mid
    return math.exp(mid), value


def levenberg_marquardt(
    problem: NonlinearProblem,
    y_delta,
    delta: float,
    tau: float,
    sigma: float,
    x0,
    max_iter: int,
    reference=None,
) -> IterationTrace:
    """Levenberg-Marquardt with alpha_n chosen so the linearized residual is sigma times the residual.

    Stops at the first ||F(x_N) - y|| <= tau delta, which needs tau > 1/sigma.
    """
    if not 0 < sigma < 1:
        raise ParameterError(f"sigma must lie in (0, 1), got {sigma}")
    if tau <= 1.0 / sigma:
        raise ParameterError(f"tau={tau} must exceed 1/sigma={1.0 / sigma:.6g}")
    y_delta = as_vector(y_delta, "y_delta")
    x = as_vector(x0, "x0", size=problem.dim).copy()
    if reference is not None:
        reference = as_vector(reference, "reference", size=problem.dim)
    threshold = tau * delta

    residual = y_delta - problem.evaluate(x)
    residuals = [float(np.linalg.norm(residual))]
    errors = None if reference is None else [float(np.linalg.norm(x - reference))]
    alphas: list[float] = []
    ratios: list[float] = []
    stop_reason = StopReason.MAX_ITER
    steps = 0

    if residuals[0] <= threshold:
        stop_reason = StopReason.DISCREPANCY
    else:
        for steps in range(1, max_iter + 1):
            jac = problem.jacobian(x)
            system = svd(jac)
            coeffs = system.data_coefficients(residual)
            perp = float(np.linalg.norm(residual - system.u @ coeffs))
            try:
                alpha, _ = lm_alpha(system.sigma, coeffs, perp, sigma * residuals[-1])
            except AlphaRuleError as err:
                raise AlphaRuleError(f"step {steps}: {err}", attainable=err.attainable, last_iterate=x) from err
            step = system.v @ (system.sigma / (system.sigma**2 + alpha) * coeffs)
            ratios.append(float(np.linalg.norm(jac @ step - residual)) / residuals[-1])
            alphas.append(alpha)
            x = x + step
            residual = y_delta - problem.evaluate(x)
            residuals.append(float(np.linalg.norm(residual)))
            if errors is not None:
                errors.append(float(np.linalg.norm(x - reference)))
            _LOGGER.debug("LM step %d: alpha=%.6g residual=%.6g", steps, alpha, residuals[-1])
            if residuals[-1] <= threshold:
                stop_reason = StopReason.DISCREPANCY
                break

    _LOGGER.info("Levenberg-Marquardt stopped after %d steps (%s)", steps, stop_reason)
    return IterationTrace(
        x=x,
        n_steps=steps,
        stop_reason=stop_reason,
        residual_norms=np.array(residuals),
        error_norms=None if errors is None else np.array(errors),
        alphas=np.array(alphas),
        ratios=np.array(ratios),
    )


def irgn_stopping_index(delta: float, tau: float, alpha0: float, q: float, nu: float) -> int:
    """First n with (alpha0 q^-n)^((nu+1)/2) <= tau delta."""
    if tau <= 0 or delta <= 0:
        raise ParameterError(f"tau and delta must be positive, got tau={tau}, delta={delta}")
    exponent = (nu + 1.0) / 2.0
    n = 0
    while (alpha0 * q**-n) ** exponent > tau * delta:
        n += 1
    return n


def irgn(
    problem: NonlinearProblem,
    y_delta,
    delta: float,
    tau: float,
    x0,
    alpha0: float,
    q: float,
    nu: float,
    max_iter: int,
    reference=None,
) -> IterationTrace:
    """Iteratively regularized Gauss-Newton with alpha_n = alpha0 q^-n and a priori stopping.

    x_{n+1} = x_n + (J^T J + alpha_n I)^-1 (J^T (y - F(x_n)) + alpha_n (x0 - x_n)),
    stopped at the first n with alpha_n^((nu+1)/2) <= tau delta.
    """
    if alpha0 <= 0:
        raise ParameterError(f"alpha0 must be positive, got {alpha0}")
    if q <= 1:
        raise ParameterError(f"q must exceed 1, got {q}")
    if not 1 <= nu <= 2:
        raise ParameterError(f"nu must lie in [1, 2], got {nu}")
    y_delta = as_vector(y_delta, "y_delta")
    x0 = as_vector(x0, "x0", size=problem.dim)
    if reference is not None:
        reference = as_vector(reference, "reference", size=problem.dim)
    stop = irgn_stopping_index(delta, tau, alpha0, q, nu)

    x = x0.copy()
    residual = y_delta - problem.evaluate(x)
    residuals = [float(np.linalg.norm(residual))]
    errors = None if reference is None else [float(np.linalg.norm(x - reference))]
    alphas: list[float] = []
    identity = np.eye(problem.dim)

    for n in range(min(stop, max_iter)):
        alpha = alpha0 * q**-n
        jac = problem.jacobian(x)
        x = x + solve_spd(jac.T @ jac + alpha * identity, jac.T @ residual + alpha * (x0 - x))
        residual = y_delta - problem.evaluate(x)
        alphas.append(alpha)
        residuals.append(float(np.linalg.norm(residual)))
        if errors is not None:
            errors.append(float(np.linalg.norm(x - reference)))
        _LOGGER.debug("IRGN step %d: alpha=%.6g residual=%.6g", n + 1, alpha, residuals[-1])

    if stop > max_iter:
        raise ConvergenceError(f"IRGN needs {stop} steps but the budget is {max_iter}", last_iterate=x)
    _LOGGER.info("IRGN stopped after %d steps", stop)
    return IterationTrace(
        x=x,
        n_steps=stop,
        stop_reason=StopReason.A_PRIORI,
        residual_norms=np.array(residuals),
        error_norms=None if errors is None else np.array(errors),
        alphas=np.array(alphas),
    )
