"""Numerics for the time-fractional Fujita equation at the critical exponent.

Modules: special_functions (Mittag-Leffler, h_alpha), field (grids and data),
propagators (P_alpha, alpha S_alpha), mild_solver, certifier, experiments,
fieldio and cli.
"""

from .certifier import (CertifierConstants, bound_rhs, check_necessary_condition,
                        divergence_base, gamma_alpha, iteration_table, lower_bound_w)
from .field import BallQuery, Field, GridSpec, ball_integral, gaussian_bump, mu_eps
from .mild_solver import SolverConfig, estimate_Talpha, solve
from .propagators import AlphaParams, apply_alphaS, apply_P, apply_P_subordination
from .special_functions import h_alpha, h_laplace, h_moment, mittag_leffler

__version__ = "0.1.0"
