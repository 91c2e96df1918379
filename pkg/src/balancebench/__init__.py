"""Deterministic pitch-control test bench for a two-wheeled balancing robot.

Models the robot as an inverted pendulum, linearizes it, and compares PID,
LQR and Mamdani fuzzy controllers in a fixed-step closed-loop simulation
with step-response metrics and an analytic Routh-Hurwitz stability oracle.
"""

from .errors import InputError, SolverError
from .fuzzy import FuzzyConfig, FuzzyVariable, RuleBase, default_config, fuzzy_control, infer, membership
from .lqr import LqrController, LqrWeights, lqr_control, synthesize
from .metrics import ResponseMetrics, compare, compute_metrics
from .numerics import char_poly, lqr_gain, mat_mul, rk4_step, routh_hurwitz, solve_care
from .pid import PidConfig, PidGains, PidState, pid_stability_poly, pid_step
from .plant import PitchState, PlantParams, StateSpace, build_full, build_reduced, nonlinear_deriv
from .sim import BatchResult, Disturbance, SimConfig, Trajectory, batch_run, run

__version__ = "0.1.0"

__all__ = [
    "BatchResult",
    "Disturbance",
    "FuzzyConfig",
    "FuzzyVariable",
    "InputError",
    "LqrController",
    "LqrWeights",
    "PidConfig",
    "PidGains",
    "PidState",
    "PitchState",
    "PlantParams",
    "ResponseMetrics",
    "RuleBase",
    "SimConfig",
    "SolverError",
    "StateSpace",
    "Trajectory",
    "batch_run",
    "build_full",
    "build_reduced",
    "char_poly",
    "compare",
    "compute_metrics",
    "default_config",
    "fuzzy_control",
    "infer",
    "lqr_control",
    "lqr_gain",
    "mat_mul",
    "membership",
    "nonlinear_deriv",
    "pid_stability_poly",
    "pid_step",
    "rk4_step",
    "routh_hurwitz",
    "run",
    "solve_care",
    "synthesize",
]
