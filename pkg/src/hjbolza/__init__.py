"""Numerical laboratory for Bolza value functions and their Hamilton-Jacobi characterizations."""

from __future__ import annotations

from .conjugate import ConjugateQuery, ConjugateResult, conjugate_table_1d, hamiltonian
from .errors import AccuracyError, ConfigError, DimensionError, DomainError, ResolutionError
from .limits import LimitSchedule
from .nonsmooth import (
    DerivativeEstimate,
    LPlusEstimate,
    ae_equality_check,
    lower_contingent_derivative,
    lplus,
    subdifferential_test,
    superdifferential_test,
    upper_contingent_derivative,
)
from .problems import (
    CatalogEntry,
    ContinuityClass,
    Problem,
    approximate_continuous,
    catalog_entry,
    catalog_names,
    coercivity_radius,
    eval_lagrangian,
    eval_terminal,
    get_problem,
)
from .reports import VerificationReport
from .trajectory import MinimizationOptions, Trajectory, difference_quotients, dpp_residual, minimize_bolza
from .value_grid import (
    GridSpec,
    ValueGrid,
    hopf_lax,
    initial_layer_check,
    interpolate,
    local_lipschitz_estimate,
    solve_semilagrangian,
)
from .verifier import (
    CandidateFunction,
    SuiteConfig,
    check_subsolution_contingent,
    check_supersolution_contingent,
    check_viscosity,
    comparison_via_approximation,
    counterexample_feb22a,
    run_suite,
)

__version__ = "0.1.0"
