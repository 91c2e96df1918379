"""Fixed-step closed-loop simulation of the pitch dynamics.

Each step measures the pitch, forms the error e = phi - setpoint, asks the
controller for its output, and advances the state one RK4 step with the
control force held constant. PID and fuzzy controllers compute a restoring
effort from the error, so the force applied to the plant is the negative
of their output; the LQR law u = -Kx already carries its sign and is
applied directly. The force recorded in the trajectory is the one applied.

The controller runs at every integration step (control dt = physics dt).
A run stops early, flagged as diverged, when |phi| exceeds the divergence
threshold or the state stops being finite; the offending sample is the
last one recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import fuzzy, lqr, pid, plant
from .errors import InputError, SolverError
from .numerics import rk4_step
from .plant import PitchState, PlantParams

Controller = Union[pid.PidConfig, lqr.LqrWeights, fuzzy.FuzzyConfig]

PLANT_LINEAR = "linear"
PLANT_NONLINEAR = "nonlinear"
PLANT_MODES = (PLANT_LINEAR, PLANT_NONLINEAR)


@dataclass(frozen=True)
class Disturbance:
    """An instantaneous impulse (rad/s) added to phi_dot at a given time."""

    time: float
    impulse: float


@dataclass(frozen=True)
class SimConfig:
    t_final: float = 10.0
    dt: float = 0.001
    initial: PitchState = PitchState()
    setpoint: float = 0.0
    plant_mode: str = PLANT_NONLINEAR
    disturbance: Disturbance | None = None
    divergence_threshold: float = math.pi / 2.0
    damping: float = 0.0  # nonlinear-mode pitch-rate damping c_d

    def __post_init__(self) -> None:
        if not (0.0 < self.dt <= self.t_final):
            raise InputError(f"need 0 < dt <= t_final, got dt={self.dt}, t_final={self.t_final}")
        if not self.divergence_threshold > 0.0:
            raise InputError("divergence threshold must be positive")
        if self.plant_mode not in PLANT_MODES:
            raise InputError(f"plant mode must be one of {PLANT_MODES}")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled (t, pitch, pitch_rate, u) series."""

    dt: float
    t: np.ndarray
    pitch: np.ndarray
    pitch_rate: np.ndarray
    u: np.ndarray
    diverged: bool = False

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class BatchResult:
    label: str
    trajectory: Trajectory | None = None
    error: str | None = None


def _control_step(controller: Controller, ss: plant.StateSpace,
                  sc: SimConfig) -> Callable[[float, float], float]:
    """Build the per-step control callback, closing over bookkeeping state.

    Controller synthesis happens here, so synthesis failures surface
    before the simulation loop starts.
    """
    if isinstance(controller, pid.PidConfig):
        cfg = controller
        state = pid.PidState()

        def step(phi: float, phi_dot: float) -> float:
            nonlocal state
            error = phi - sc.setpoint
            out, state = pid.pid_step(cfg.gains, state, error, sc.dt, cfg.accumulation_mode)
            if cfg.u_max is not None:
                out = max(-cfg.u_max, min(cfg.u_max, out))
            return -out

        return step

    if isinstance(controller, lqr.LqrWeights):
        ctl = lqr.synthesize(ss, controller)

        def step(phi: float, phi_dot: float) -> float:
            return lqr.lqr_control(ctl, PitchState(phi, phi_dot))

        return step

    if isinstance(controller, fuzzy.FuzzyConfig):
        cfg = controller
        integral = 0.0
        prev_error = 0.0

        def step(phi: float, phi_dot: float) -> float:
            nonlocal integral, prev_error
            error = phi - sc.setpoint
            rate = (error - prev_error) / sc.dt
            prev_error = error
            out, integral = fuzzy.fuzzy_control(cfg, integral, error, rate, sc.dt)
            return -out

        return step

    raise InputError(f"unknown controller type {type(controller).__name__}")


def run(params: PlantParams, mode: str, controller: Controller, sc: SimConfig) -> Trajectory:
    """Simulate one closed loop and record its trajectory."""
    ss = plant.build_reduced(params, mode)
    control = _control_step(controller, ss, sc)

    if sc.plant_mode == PLANT_LINEAR:
        a, b = ss.a, ss.b[:, 0]

        def deriv(x: np.ndarray, u: float) -> np.ndarray:
            return a @ x + b * u
    else:
        def deriv(x: np.ndarray, u: float) -> np.ndarray:
            return plant.nonlinear_deriv(params, mode, PitchState(x[0], x[1]), u, sc.damping)

    n_steps = int(math.floor(sc.t_final / sc.dt))
    times: list[float] = []
    pitches: list[float] = []
    rates: list[float] = []
    forces: list[float] = []
    diverged = False

    x = np.array([sc.initial.phi, sc.initial.phi_dot])
    disturbance_pending = sc.disturbance is not None
    for k in range(n_steps + 1):
        t = k * sc.dt
        if disturbance_pending and t >= sc.disturbance.time:
            x = np.array([x[0], x[1] + sc.disturbance.impulse])
            disturbance_pending = False
        u = control(float(x[0]), float(x[1]))
        times.append(t)
        pitches.append(float(x[0]))
        rates.append(float(x[1]))
        forces.append(float(u))
        if not (np.all(np.isfinite(x)) and math.isfinite(u)) or abs(x[0]) > sc.divergence_threshold:
            diverged = True
            break
        if k == n_steps:
            break
        x = rk4_step(deriv, x, u, sc.dt)

    return Trajectory(dt=sc.dt, t=np.array(times), pitch=np.array(pitches),
                      pitch_rate=np.array(rates), u=np.array(forces), diverged=diverged)


def batch_run(params: PlantParams, mode: str,
              controllers: Sequence[tuple[str, Controller]],
              sc: SimConfig) -> list[BatchResult]:
    """Run every (label, controller) under one shared configuration.

    Individual failures are recorded per label instead of aborting the
    batch; results keep the input order.
    """
    if not controllers:
        raise InputError("controller list must be nonempty")
    results = []
    for label, controller in controllers:
        try:
            results.append(BatchResult(label=label, trajectory=run(params, mode, controller, sc)))
        except (InputError, SolverError) as exc:
            results.append(BatchResult(label=label, error=str(exc)))
    return results
