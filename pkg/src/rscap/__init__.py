"""Replica-symmetric saddle point equations of the Ising perceptron."""
from .errors import ConfigError, DomainError, EvaluationError, NumericalResolutionError, RscapError
from .gauss import QuadratureRule, gaussian_expect, hermite_rule, inv_mills, inv_mills_prime, mills_gap, std_normal
from .lemmas import LemmaReport, margin_at, verify, verify_all
from .model import (
    alpha_c,
    b_prime,
    big_B,
    c_kappa,
    cap_A,
    g_fun,
    g_quartic,
    overlap_P,
    r_map,
    rs_free_energy,
    trunc_moments,
)
from .solver import (
    CapacityResult,
    NoSolution,
    SaddlePoint,
    SolverConfig,
    SweepRecord,
    approach_critical,
    capacity,
    solve_saddle,
    sweep,
)

__version__ = "0.1.0"
