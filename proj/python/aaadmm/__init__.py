"""ADMM fixed-point solvers with Anderson acceleration and optimal
stationary coefficient analysis."""

from ._core import (
    CircleParams,
    ConvergenceEstimate,
    IterationTrace,
    OptimalSAAResult,
    ProblemInstance,
    Spectrum,
    __version__,
    analytic_jacobian,
    brute_force_sweep,
    circle_params,
    companion_psi,
    default_instance,
    estimate_convergence_factor,
    fd_jacobian,
    fd_jacobian_map,
    generate_instance,
    lambda_roots,
    load_instance,
    optimal_beta_single_mu,
    optimal_saa1,
    project_box,
    project_nonneg,
    prox_l1,
    reference_solution,
    rho_saa,
    run,
    run_experiment,
    run_map,
    s_mu,
    save_instance,
    spectrum_from_eigenvalues,
    spectrum_of,
)

__all__ = [
    "CircleParams",
    "ConvergenceEstimate",
    "IterationTrace",
    "OptimalSAAResult",
    "ProblemInstance",
    "Spectrum",
    "__version__",
    "analytic_jacobian",
    "brute_force_sweep",
    "circle_params",
    "companion_psi",
    "default_instance",
    "estimate_convergence_factor",
    "fd_jacobian",
    "fd_jacobian_map",
    "generate_instance",
    "lambda_roots",
    "load_instance",
    "optimal_beta_single_mu",
    "optimal_saa1",
    "project_box",
    "project_nonneg",
    "prox_l1",
    "reference_solution",
    "rho_saa",
    "run",
    "run_experiment",
    "run_map",
    "s_mu",
    "save_instance",
    "spectrum_from_eigenvalues",
    "spectrum_of",
]
