"""Steady MHD transonic shocks in a cylindrical sector: background flow,
shock-front algebra, the fixed-point operator of the free-boundary problem
and its numerical audit."""
from .background import (BackgroundSolution, Coefficients, admissible_exit_range,
                         coefficients_at, solve_background, verify_super_alfvenic)
from .config import RunConfig, load_config, parse_config
from .driver import (Iterate, Problem, RunReport, apply_T, build_problem, norm_Xi,
                     residual_report, run, solve_problem_S)
from .errors import *  # noqa: F401,F403
from .jump import classify_discontinuity, rh_residual, solve_normal_shock
from .spectral import ModalField, SpectralGrid
from .state import FlowState, ThermoParams, classify_regime, derived_quantities
from .upstream import InletData, Mode, march_supersonic

__version__ = "0.1.0"
