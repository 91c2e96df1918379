"""Discrete PID controller and its closed-loop stability oracle.

The controller output is u = kp*e + ki*S + kd*D where S accumulates the
error and D differences it. Two accumulation modes are supported:

* ``dt-scaled`` (default): S += e*dt and D = (e - prev)/dt, so behavior is
  invariant under timestep refinement.
* ``unscaled``: S += e and D = e - prev with no dt factor, the raw
  sum-and-difference bookkeeping some embedded loops use.

State is threaded explicitly through ``pid_step``; after a reset both the
previous error and the running sum are zero, so the first derivative term
differences against zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .plant import KIND_REDUCED, StateSpace

DT_SCALED = "dt-scaled"
UNSCALED = "unscaled"
ACCUMULATION_MODES = (DT_SCALED, UNSCALED)


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    def __post_init__(self) -> None:
        for name in ("kp", "ki", "kd"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise InputError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class PidState:
    prev_error: float = 0.0
    error_sum: float = 0.0
    initialized: bool = False


@dataclass(frozen=True)
class PidConfig:
    """PID controller setup consumed by the simulation loop."""

    gains: PidGains
    accumulation_mode: str = DT_SCALED
    u_max: float | None = None  # optional symmetric output saturation

    def __post_init__(self) -> None:
        if self.accumulation_mode not in ACCUMULATION_MODES:
            raise InputError(f"accumulation mode must be one of {ACCUMULATION_MODES}")
        if self.u_max is not None and not self.u_max > 0.0:
            raise InputError("u_max must be positive when given")


def pid_step(gains: PidGains, st: PidState, error: float, dt: float,
             accumulation_mode: str = DT_SCALED) -> tuple[float, PidState]:
    """One controller update; returns (output, next state)."""
    if not (dt > 0.0):
        raise InputError(f"dt must be positive, got {dt}")
    if accumulation_mode == DT_SCALED:
        error_sum = st.error_sum + error * dt
        deriv = (error - st.prev_error) / dt
    elif accumulation_mode == UNSCALED:
        error_sum = st.error_sum + error
        deriv = error - st.prev_error
    else:
        raise InputError(f"accumulation mode must be one of {ACCUMULATION_MODES}")
    u = gains.kp * error + gains.ki * error_sum + gains.kd * deriv
    return u, PidState(prev_error=error, error_sum=error_sum, initialized=True)


def pid_stability_poly(gains: PidGains, ss: StateSpace) -> np.ndarray:
    """Characteristic polynomial of the ideal continuous PID loop.

    For the reduced plant phi_dd = A21*phi + B2*u with u the negated PID
    output, the closed loop is
    s^3 + B2*kd*s^2 + (B2*kp - A21)*s + B2*ki.
    """
    if ss.kind != KIND_REDUCED:
        raise InputError(f"expected a {KIND_REDUCED} state space, got {ss.kind}")
    a21 = float(ss.a[1, 0])
    b2 = float(ss.b[1, 0])
    return np.array([1.0, b2 * gains.kd, b2 * gains.kp - a21, b2 * gains.ki])
