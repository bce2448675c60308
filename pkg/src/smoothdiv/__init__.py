"""Smooth phi-divergences and scaled shift divergences as l1 surrogates."""

from .divergence import d_new, d_phi, d_tv, l1_norm, total_mass, weighted_l1
from .duality import LaplaceDual, conjugate, cumulant, sample_w, verify_duality
from .errors import DimensionError, DomainError
from .generator import GeneratorParams, phi, phi_limit_gap, phi_prime, phi_tv
from .lasso import LassoProblem, LassoSolution, make_problem, solve_lasso, surrogate_report
from .limits import (
    SweepMode,
    SweepRow,
    SweepSpec,
    check_limits,
    sweep,
    sweep_phi_surrogate,
    sweep_shift_surrogate,
)

__version__ = "0.1.0"
