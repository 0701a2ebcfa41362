"""State evolution: first-order Gauss-Markov gains plus constant-velocity angles.

The transition for a step of ``dt`` seconds factors into independent blocks.
Gain components decay by ``beta_dt = beta ** (dt / T_S)`` and receive fresh
Gaussian innovation with variance ``(1 - beta_dt**2) / 2`` per real component,
which keeps every complex gain at unit mean power in steady state.  Each
(position, velocity) pair advances by the usual constant-velocity matrix
``[[1, dt], [0, 1]]`` with process noise ``(dt / T_S) * q_upsilon``, a
random-walk scaling that preserves the per-reference-step statistics no matter
how finely a step is subdivided.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelState
from .errors import BadConfig, DimensionMismatch, NonpositiveStep
from .numerics import matrix_sqrt_psd


@dataclass(frozen=True)
class DynamicsModel:
    """Parameters of the state-evolution model.

    Attributes:
        L: Number of propagation paths.
        beta: Gain correlation over one reference step, in (0, 1].
        T_S: Reference step length in seconds.
        q_upsilon: Diagonal entries (position, velocity) of the per-pair
            process-noise covariance accumulated over one reference step.
    """

    L: int
    beta: float
    T_S: float
    q_upsilon: np.ndarray = field(
        default_factory=lambda: np.array([1e-4, 1e2])
    )

    def __post_init__(self):
        if self.L < 1:
            raise BadConfig(f"need at least one path, got L={self.L}")
        if not 0.0 < self.beta <= 1.0:
            raise BadConfig(f"beta must lie in (0, 1], got {self.beta}")
        if self.T_S <= 0.0:
            raise BadConfig(f"reference step must be positive, got {self.T_S}")
        q = np.asarray(self.q_upsilon, dtype=float)
        if q.shape != (2,):
            raise BadConfig(f"q_upsilon must have two entries, got shape {q.shape}")
        if np.any(q < 0.0):
            raise BadConfig("q_upsilon entries must be nonnegative")
        object.__setattr__(self, "q_upsilon", q)


@dataclass(frozen=True)
class TransitionPair:
    """Transition matrix and process-noise covariance for one step of dt seconds."""

    A: np.ndarray
    Q: np.ndarray
    dt: float


def build_transition(model: DynamicsModel, dt: float) -> TransitionPair:
    """Builds the (A, Q) pair for a step of ``dt`` seconds.

    Args:
        model: Dynamics parameters.
        dt: Step length in seconds, must be positive.

    Returns:
        TransitionPair whose A is block-diagonal over the gain block and the
        position/velocity pairs, and whose Q is diagonal.
    """
    if dt <= 0.0:
        raise NonpositiveStep(f"step must be positive, got {dt}")
    L = model.L
    ratio = dt / model.T_S
    beta_dt = model.beta ** ratio

    pair = np.array([[1.0, dt], [0.0, 1.0]])
    A = np.zeros((6 * L, 6 * L))
    A[: 2 * L, : 2 * L] = beta_dt * np.eye(2 * L)
    side = np.kron(np.eye(2 * L), pair)
    A[2 * L :, 2 * L :] = side

    q_diag = np.empty(6 * L)
    q_diag[: 2 * L] = (1.0 - beta_dt**2) / 2.0
    q_diag[2 * L :] = np.tile(ratio * model.q_upsilon, 2 * L)
    return TransitionPair(A=A, Q=np.diag(q_diag), dt=dt)


def _check_state(x: ChannelState, tp: TransitionPair) -> None:
    if x.x.shape[0] != tp.A.shape[0]:
        raise DimensionMismatch(
            f"state has length {x.x.shape[0]} but transition is {tp.A.shape[0]}-dimensional"
        )


def advance_truth(
    x: ChannelState, tp: TransitionPair, rng: np.random.Generator
) -> ChannelState:
    """Advances a true state one step, adding process noise drawn from rng."""
    _check_state(x, tp)
    z = rng.standard_normal(tp.Q.shape[0])
    diag = np.diagonal(tp.Q)
    if np.count_nonzero(tp.Q - np.diag(diag)) == 0:
        u = np.sqrt(diag) * z
    else:
        u = matrix_sqrt_psd(tp.Q) @ z
    return ChannelState(x.L, tp.A @ x.x + u)


def advance_mean(x_hat: ChannelState, tp: TransitionPair) -> ChannelState:
    """Advances a state estimate deterministically (no process noise)."""
    _check_state(x_hat, tp)
    return ChannelState(x_hat.L, tp.A @ x_hat.x)


def advance_covariance(R: np.ndarray, tp: TransitionPair) -> np.ndarray:
    """Propagates a state covariance: A R A^T + Q, symmetrized."""
    R = np.asarray(R, dtype=float)
    if R.shape != tp.A.shape:
        raise DimensionMismatch(
            f"covariance shape {R.shape} does not match transition shape {tp.A.shape}"
        )
    out = tp.A @ R @ tp.A.T + tp.Q
    return (out + out.T) / 2.0
