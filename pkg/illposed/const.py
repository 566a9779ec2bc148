"""Constants for the illposed regularization toolkit."""

from typing import Final

# Package metadata
NAME: Final = "illposed"  # Console script and logger namespace

# Numerical substrate
RANK_CUTOFF_FACTOR: Final = 1.0  # Multiplies max(rows, cols) * eps * sigma_1 for the numerical rank
JACOBI_MAX_SWEEPS: Final = 60  # One-sided Jacobi gives up after this many full sweeps
SYMMETRY_TOLERANCE: Final = 1e-12  # solve_spd rejects matrices further than this from symmetric

# Picard verdict heuristic (last quartile vs middle quartile geometric means)
PICARD_DIVERGING_RATIO: Final = 10.0  # Tail-to-middle ratio above which coefficients are diverging
PICARD_CONVERGING_RATIO: Final = 0.1  # Tail-to-middle ratio below which the Picard condition holds

# Spectral filters
FILTER_TSVD: Final = "tsvd"  # Cutoff filter, infinite qualification
FILTER_TIKHONOV: Final = "tikhonov"  # Qualification 2
FILTER_LANDWEBER: Final = "landweber"  # Iteration count m acts as 1/alpha
DEFAULT_OMEGA_FACTOR: Final = 0.9  # Landweber omega = factor / sigma_1^2 when unspecified
QUALIFICATION_SAMPLES: Final = 2000  # Log-spaced lambda samples in qualification_scan
VALUE_FUNCTION_FLAT_TOLERANCE: Final = 1e-12  # Skip j' = g checks where g barely varies

# Parameter choice
DEFAULT_GRID_RATIO: Final = 0.5  # alpha_n = alpha_0 * q^n
RULE_APRIORI: Final = "apriori"  # alpha = c (delta / rho)^(2/(nu+1))
RULE_MOROZOV: Final = "morozov"  # Discrepancy principle, residual <= tau delta
RULE_QUASI_OPTIMALITY: Final = "quasiopt"  # Minimizes the distance between neighboring solutions
RULE_HANKE_RAUS: Final = "hanke_raus"  # Minimizes residual / sqrt(alpha)
RULE_L_CURVE: Final = "l_curve"  # Minimizes residual times solution norm
RULE_NONE: Final = "none"  # No parameter choice, or the method stops by itself

# Projection
SUBSPACE_TOLERANCE: Final = 1e-10  # B^T B = I tolerance for orthonormal bases
RANGE_TOLERANCE: Final = 1e-8  # Dual least-squares subspaces must lie this close to range(A)
LSQ_ALARM_FACTOR: Final = 2.0  # Safety factor of the least-squares projection error alarm

# Nonlinear iterations
GRADIENT_TOLERANCE: Final = 1e-8  # Relative gradient norm target of the nonlinear Tikhonov solver
ARMIJO_CONSTANT: Final = 1e-4  # Sufficient decrease constant in the backtracking line search
DISCREPANCY_REFINE_CAP: Final = 40  # Log-alpha bisections that pull a nonlinear discrepancy pick above delta
LM_ALPHA_BRACKET: Final = (1e-12, 1e12)  # Multiples of sigma_1^2 searched by the LM alpha rule
LM_BISECTION_CAP: Final = 200  # Bisection steps allowed for the LM alpha rule
LM_RATIO_TOLERANCE: Final = 1e-10  # Relative accuracy of the LM residual ratio
DIVERGENCE_FACTOR: Final = 2.0  # Error above this multiple of its running minimum counts as diverging
DIVERGENCE_WINDOW: Final = 10  # Consecutive diverging steps before giving up
LANDWEBER_DERIVATIVE_BOUND: Final = 0.9  # Nonlinear Landweber rescales F so that ||F'(x0)|| <= this
REMAINDER_EXACT_TOLERANCE: Final = 1e-12  # Taylor remainders below this are treated as exactly zero
STAGNATION_TOLERANCE: Final = 1e-14  # Step length, relative to 1 + ||x||, at which an iteration has stalled

# Statistics and Bayes
PINSKER_CROSS_CHECK_TOLERANCE: Final = 1e-10  # Allowed gap between root-found and explicit kappa
LOW_ESS_WARNING: Final = 10.0  # Effective sample size below which importance sampling warns

# Experiment configuration keys
CONF_PROBLEM: Final = "problem"  # Name and size n
CONF_TRUTH: Final = "truth"  # Source order nu, norm rho, representer w and its seed
CONF_METHOD: Final = "method"  # One of METHODS
CONF_RULE: Final = "rule"  # One of RULES
CONF_RULE_PARAMS: Final = "rule_params"  # Constants of the rule and method (c, alpha0, q, max_iter, ...)
CONF_DELTA_GRID: Final = "delta_grid"  # Geometric noise levels: start, factor, count
CONF_TAU: Final = "tau"  # Discrepancy factor, must exceed 1
CONF_SIGMA_LM: Final = "sigma_lm"  # Levenberg-Marquardt residual ratio in (0, 1)
CONF_SEEDS: Final = "seeds"  # Master seed and number of realizations
CONF_OUTPUT: Final = "output"  # Results file name
CONF_AGGREGATE: Final = "aggregate"  # median or mean over realizations

# Experiment defaults
DEFAULT_TAU: Final = 1.5  # Exceeds 1/DEFAULT_SIGMA_LM as Levenberg-Marquardt requires
DEFAULT_SIGMA_LM: Final = 0.7  # Levenberg-Marquardt linearized residual ratio
DEFAULT_MASTER_SEED: Final = 20240601  # Per-realization seeds derive from this by mix_seed
DEFAULT_REALIZATIONS: Final = 1  # Noise draws per delta
DEFAULT_GRID_SIZE: Final = 40  # Parameters scanned by the heuristic rules
DEFAULT_MAX_ITER: Final = 100_000  # Iteration cap for Landweber-type methods in experiments

PROBLEMS: Final = ("integration", "kernel_gauss", "diagonal_cubic", "autoconvolution")
LINEAR_PROBLEMS: Final = ("integration", "kernel_gauss")
PROJECTION_METHODS: Final = ("lsq_proj", "dual_lsq_proj")
LINEAR_METHODS: Final = ("tsvd", "tikhonov", "landweber", "lsq_proj", "dual_lsq_proj")
NONLINEAR_METHODS: Final = ("nl_landweber", "lm", "irgn")
STATISTICAL_METHODS: Final = ("pinsker", "map", "cm")
METHODS: Final = LINEAR_METHODS + NONLINEAR_METHODS + STATISTICAL_METHODS
RULES: Final = (RULE_APRIORI, RULE_MOROZOV, RULE_QUASI_OPTIMALITY, RULE_HANKE_RAUS, RULE_L_CURVE, RULE_NONE)

# Output formats (results.csv columns in order)
CSV_HEADER: Final = ("delta", "alpha_or_N", "error", "residual", "rule", "method", "seed", "wall_ms")
FLOAT_FORMAT: Final = ".17g"  # 17 significant digits keeps doubles round-trippable and byte-stable

# CLI exit codes
EXIT_OK: Final = 0  # Success
EXIT_CONFIG: Final = 2  # Invalid or unreadable configuration
EXIT_METHOD: Final = 3  # Numerical failure of a method or rule
EXIT_ACCEPTANCE: Final = 4  # Self-test acceptance check failed

# Problems
MIN_PROBLEM_SIZE: Final = 4  # Smallest grid accepted by the built-in problems

# Benchmark problems
DIAGONAL_CUBIC_C: Final = 0.1  # Nonlinearity of the diagonal cubic benchmark
NOISE_EXACT: Final = "exact"  # ||y_delta - y|| = delta
NOISE_WHITE: Final = "white"  # Independent N(0, delta^2) per component
