"""LQR controller on the reduced pitch model.

Synthesis solves the continuous algebraic Riccati equation for the reduced
(phi, phi_dot) plant and applies full state feedback u = -K x. The
continuous-time gain is used directly in the simulator's zero-order-hold
loop; the Riccati problem is never discretized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import InputError
from .plant import KIND_REDUCED, PitchState, StateSpace


@dataclass(frozen=True)
class LqrWeights:
    """State penalty q (2x2) and input penalty r (1x1)."""

    q: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        q = numerics.as_matrix(self.q, "q")
        r = numerics.as_matrix(self.r, "r")
        if q.shape != (2, 2):
            raise InputError(f"q must be 2x2, got {q.shape}")
        if r.shape != (1, 1):
            raise InputError(f"r must be 1x1, got {r.shape}")
        if not numerics.is_positive_semidefinite(q):
            raise InputError("q must be symmetric positive semidefinite")
        if not r[0, 0] > 0.0:
            raise InputError("r must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_scalars(cls, q11: float, q22: float, r: float) -> "LqrWeights":
        return cls(q=np.diag([float(q11), float(q22)]), r=np.array([[float(r)]]))


# The two weight pairs exercised throughout the bench.
WEIGHTS_A = LqrWeights.from_scalars(10.0, 100.0, 0.001)
WEIGHTS_B = LqrWeights.from_scalars(100.0, 1000.0, 0.0001)


@dataclass(frozen=True)
class LqrController:
    """Synthesized 1x2 gain plus the weights it came from."""

    k: np.ndarray
    weights: LqrWeights = field(repr=False)


def synthesize(ss: StateSpace, weights: LqrWeights) -> LqrController:
    """Solve the Riccati problem for the reduced plant and package the gain."""
    if ss.kind != KIND_REDUCED:
        raise InputError(f"expected a {KIND_REDUCED} state space, got {ss.kind}")
    k = numerics.lqr_gain(ss.a, ss.b, weights.q, weights.r)
    return LqrController(k=k, weights=weights)


def lqr_control(ctl: LqrController, s: PitchState) -> float:
    """Feedback law u = -(k1*phi + k2*phi_dot)."""
    return -(float(ctl.k[0, 0]) * s.phi + float(ctl.k[0, 1]) * s.phi_dot)
