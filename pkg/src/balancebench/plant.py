"""Physical parameters and pitch dynamics of the balancing robot.

The robot is modeled as an inverted pendulum on a cart. Two linearization
conventions are supported because the robot's published formula set uses
the denominator D = I(M+m) + M m^2 while the textbook cart-pole derivation
uses D = I(M+m) + M m l^2:

* ``native``    D = I(M+m) + M m^2   (default; gains quoted by this bench
  trace to the robot's own formula set)
* ``standard``  D = I(M+m) + M m l^2

The pendulum mass ``m`` has no published value; the default 0.2 kg is an
assumption of this bench and every CLI run echoes the value in effect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

MODE_NATIVE = "native"
MODE_STANDARD = "standard"
FORMULA_MODES = (MODE_NATIVE, MODE_STANDARD)

KIND_REDUCED = "reduced-2"
KIND_FULL = "full-4"

DEFAULT_PENDULUM_MASS = 0.2


@dataclass(frozen=True)
class PlantParams:
    """Physical constants of the robot.

    M: chassis (cart) mass, kg
    m: pendulum mass, kg
    l: pendulum length, m
    I: pendulum moment of inertia, kg m^2
    b: dynamic friction coefficient
    g: gravitational acceleration, m/s^2
    """

    M: float = 0.0754
    m: float = DEFAULT_PENDULUM_MASS
    l: float = 0.157
    I: float = 0.01094
    b: float = 0.65
    g: float = 9.8

    def __post_init__(self) -> None:
        checks = [
            (self.M > 0, "M must be > 0"),
            (self.m >= 0, "m must be >= 0"),
            (self.l > 0, "l must be > 0"),
            (self.I > 0, "I must be > 0"),
            (self.b >= 0, "b must be >= 0"),
            (self.g > 0, "g must be > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InputError(msg)
        for name in ("M", "m", "l", "I", "b", "g"):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"{name} must be finite")


@dataclass(frozen=True)
class PitchState:
    """Pitch angle (rad) and pitch angular velocity (rad/s)."""

    phi: float = 0.0
    phi_dot: float = 0.0


@dataclass(frozen=True)
class StateSpace:
    """An (A, B) pair tagged with its dimension kind and formula mode."""

    a: np.ndarray
    b: np.ndarray
    kind: str
    mode: str


def _check_mode(mode: str) -> None:
    if mode not in FORMULA_MODES:
        raise InputError(f"formula mode must be one of {FORMULA_MODES}, got {mode!r}")


def denominator(params: PlantParams, mode: str = MODE_NATIVE) -> float:
    """Common denominator D of the linearized coefficients."""
    _check_mode(mode)
    if mode == MODE_NATIVE:
        d = params.I * (params.M + params.m) + params.M * params.m ** 2
    else:
        d = params.I * (params.M + params.m) + params.M * params.m * params.l ** 2
    if d <= 0.0:
        raise InputError(f"degenerate parameters: denominator {d} <= 0")
    return d


def reduced_coeffs(params: PlantParams, mode: str = MODE_NATIVE) -> tuple[float, float]:
    """(A21, B2) of the reduced pitch model: phi_dd = A21*phi + B2*u."""
    d = denominator(params, mode)
    a21 = params.m * params.g * params.l * (params.M + params.m) / d
    b2 = params.m * params.l / d
    return a21, b2


def build_reduced(params: PlantParams, mode: str = MODE_NATIVE) -> StateSpace:
    """Reduced 2-state linearization with state (phi, phi_dot)."""
    a21, b2 = reduced_coeffs(params, mode)
    a = np.array([[0.0, 1.0], [a21, 0.0]])
    b = np.array([[0.0], [b2]])
    return StateSpace(a=a, b=b, kind=KIND_REDUCED, mode=mode)


def build_full(params: PlantParams, mode: str = MODE_NATIVE) -> StateSpace:
    """Full 4-state linearization with state (x, x_dot, phi, phi_dot)."""
    d = denominator(params, mode)
    m, M, l, inertia, b, g = params.m, params.M, params.l, params.I, params.b, params.g
    a = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -(inertia + m * l ** 2) * b / d, m ** 2 * g * l ** 2 / d, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, -m * l * b / d, m * g * l * (M + m) / d, 0.0],
    ])
    bvec = np.array([
        [0.0],
        [(inertia + m * l ** 2) / d],
        [0.0],
        [m * l / d],
    ])
    return StateSpace(a=a, b=bvec, kind=KIND_FULL, mode=mode)


def nonlinear_deriv(params: PlantParams, mode: str, s: PitchState, u: float,
                    damping: float = 0.0) -> np.ndarray:
    """Sine-extended pitch dynamics: phi_dd = A21*sin(phi) - c_d*phi_dot + B2*u.

    Linearizing about phi = 0 with damping 0 recovers build_reduced exactly.
    The damping knob defaults to 0 to match the undamped reduced A.
    """
    a21, b2 = reduced_coeffs(params, mode)
    phi_dd = a21 * math.sin(s.phi) - damping * s.phi_dot + b2 * u
    return np.array([s.phi_dot, phi_dd])
