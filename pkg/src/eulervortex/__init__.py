"""Desingularized point vortices of the planar Euler equations.

Stationary vortex cores are computed as solutions of the semilinear
problem ``-Delta u = eps^-2 (u - q_eps)_+^p`` on gridded planar domains and
compared with the point-vortex (Kirchhoff-Routh) picture.
"""
from .capacity import (CapacitySpec, capacity_numeric, capacity_segment_ray,
                       check_capacity_bounds, elliptic_K, segment_ray_numeric)
from .domain import Domain, Grid, curvature_at, discretize, make_domain
from .errors import NumericalError, ValidationError, VortexError
from .green import (GreenEvaluator, boundary_h_expansion, green_eval, koebe_assemble,
                    make_evaluator, robin, star_flux_check)
from .poisson import dirichlet_energy, solve_dirichlet
from .radial_profile import limit_constant, profile_for_kappa, solve_unit_profile
from .routh import (BackgroundField, RouthConfig, VortexState, build_stream_q,
                    integrate_dynamics, routh_config, routh_eval, routh_grad, routh_maximize)
from .semilinear import (ProblemSpec, cutoff_lift, diagnostics, epsilon_sweep, hat_function,
                         solve_pair, solve_single)

__version__ = "0.1.0"

__all__ = [
    "BackgroundField", "CapacitySpec", "Domain", "GreenEvaluator", "Grid", "NumericalError",
    "ProblemSpec", "RouthConfig", "ValidationError", "VortexError", "VortexState",
    "boundary_h_expansion", "build_stream_q", "capacity_numeric", "capacity_segment_ray",
    "check_capacity_bounds", "curvature_at", "cutoff_lift", "diagnostics", "dirichlet_energy",
    "discretize", "elliptic_K", "epsilon_sweep", "green_eval", "hat_function",
    "integrate_dynamics", "koebe_assemble", "limit_constant", "make_domain", "make_evaluator",
    "profile_for_kappa", "robin", "routh_config", "routh_eval", "routh_grad", "routh_maximize",
    "segment_ray_numeric", "solve_dirichlet", "solve_pair", "solve_single", "solve_unit_profile",
    "star_flux_check",
]
