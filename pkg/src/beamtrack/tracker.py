"""Unscented Kalman filter over the interleaved gain/angle state.

The filter alternates a linear predict step (the dynamics are exactly linear)
with an unscented measurement update: sigma points drawn from the prior are
pushed through the nonlinear state-to-channel map, and the resulting sample
statistics stand in for the Jacobians an extended filter would need.  Both
process and measurement noise enter additively, so no state augmentation is
required.

Sigma statistics are exposed separately (``channel_statistics``) because beam
design consumes the same prior channel moments the update does; computing them
once per step avoids a second transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import ArrayGeometry, ChannelState, channel_matrix, real_channel_vectors
from .dynamics import DynamicsModel, TransitionPair, advance_covariance, build_transition
from .errors import (
    BadScaling,
    DimensionMismatch,
    IndefiniteCovariance,
    IndefiniteMatrix,
    SingularInnovation,
)
from .numerics import matrix_sqrt_psd
from .sounding import Observation, SoundingPlan


@dataclass(frozen=True)
class UkfParams:
    """Sigma-point scaling parameters.

    Attributes:
        eta: Spread of the sigma points around the mean.
        kappa: Secondary scaling parameter.
        mu: Distribution parameter entering only the zeroth covariance weight.
    """

    eta: float = 1e-3
    kappa: float = 0.0
    mu: float = 2.0

    def lam(self, dim: int) -> float:
        return self.eta**2 * (dim + self.kappa) - dim


@dataclass(frozen=True)
class TrackerState:
    """Filter mean, covariance, and the index of the last processed block."""

    x_hat: ChannelState
    R: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class SigmaSet:
    """Symmetric sigma points (rows) with their mean and covariance weights."""

    points: np.ndarray
    w_mean: np.ndarray
    w_cov: np.ndarray


@dataclass(frozen=True)
class ChannelStats:
    """Sigma-transform moments of the stacked-real channel.

    Attributes:
        h_hat: Weighted mean of the transformed points.
        Pi: Weighted covariance of the transformed points (symmetric).
        R_xh: Cross-covariance between state and transformed points.
    """

    h_hat: np.ndarray
    Pi: np.ndarray
    R_xh: np.ndarray


def sigma_points(x_hat: np.ndarray, R: np.ndarray, params: UkfParams) -> SigmaSet:
    """Builds the symmetric sigma-point set for a Gaussian (x_hat, R).

    Args:
        x_hat: Mean vector, length n.
        R: Covariance, n x n symmetric PSD.
        params: Scaling parameters; requires n + lambda > 0.

    Returns:
        SigmaSet of 2n+1 points whose weighted moments reproduce (x_hat, R).
    """
    x_hat = np.asarray(x_hat, dtype=float)
    n = x_hat.shape[0]
    lam = params.lam(n)
    scale = n + lam
    if scale <= 0.0:
        raise BadScaling(f"need dim + lambda > 0, got {scale}")
    try:
        root = matrix_sqrt_psd(scale * np.asarray(R, dtype=float))
    except IndefiniteMatrix as exc:
        raise IndefiniteCovariance(str(exc)) from exc

    points = np.empty((2 * n + 1, n))
    points[0] = x_hat
    points[1 : n + 1] = x_hat + root.T
    points[n + 1 :] = x_hat - root.T

    w_mean = np.full(2 * n + 1, 1.0 / (2.0 * scale))
    w_mean[0] = lam / scale
    w_cov = w_mean.copy()
    w_cov[0] += 1.0 - params.eta**2 + params.mu
    return SigmaSet(points=points, w_mean=w_mean, w_cov=w_cov)


def make_channel_fn(L: int, tx: ArrayGeometry, rx: ArrayGeometry):
    """Returns a batched state->stacked-real-channel map for the given arrays."""

    def channel_fn(X: np.ndarray) -> np.ndarray:
        return real_channel_vectors(X, L, tx, rx)

    return channel_fn


def channel_statistics(sigma: SigmaSet, channel_fn) -> ChannelStats:
    """Pushes sigma points through the channel map and collects moments."""
    zeta = np.asarray(channel_fn(sigma.points), dtype=float)
    if zeta.shape[0] != sigma.points.shape[0]:
        raise DimensionMismatch(
            f"channel map returned {zeta.shape[0]} rows for "
            f"{sigma.points.shape[0]} sigma points"
        )
    h_hat = sigma.w_mean @ zeta
    dz = zeta - h_hat
    Pi = (dz * sigma.w_cov[:, None]).T @ dz
    dx = sigma.points - sigma.points[0]
    R_xh = (dx * sigma.w_cov[:, None]).T @ dz
    return ChannelStats(h_hat=h_hat, Pi=(Pi + Pi.T) / 2.0, R_xh=R_xh)


def _condition_covariance(R: np.ndarray) -> np.ndarray:
    """Symmetrizes and clamps tiny negative eigenvalues; errors if indefinite."""
    R = (R + R.T) / 2.0
    try:
        np.linalg.cholesky(R + np.eye(R.shape[0]) * 0.0)
        return R
    except np.linalg.LinAlgError:
        pass
    w, V = np.linalg.eigh(R)
    tol = 1e-9 * max(1.0, np.linalg.norm(R))
    if w[0] < -tol:
        raise IndefiniteCovariance(
            f"posterior covariance has eigenvalue {w[0]:.3e} below -{tol:.1e}"
        )
    w = np.where(w < 0.0, 1e-12, w)
    return (V * w) @ V.T


def predict(ts: TrackerState, tp: TransitionPair) -> TrackerState:
    """Propagates the estimate one step forward, producing the next prior."""
    if ts.x_hat.x.shape[0] != tp.A.shape[0]:
        raise DimensionMismatch(
            f"state length {ts.x_hat.x.shape[0]} does not match "
            f"transition dimension {tp.A.shape[0]}"
        )
    x_new = tp.A @ ts.x_hat.x
    R_new = advance_covariance(ts.R, tp)
    return TrackerState(x_hat=ChannelState(ts.x_hat.L, x_new), R=R_new, k=ts.k + 1)


def update(
    prior: TrackerState,
    plan: SoundingPlan,
    y: Observation,
    params: UkfParams,
    rho: float | None = None,
    channel_fn=None,
    stats: ChannelStats | None = None,
) -> TrackerState:
    """Applies one unscented measurement update.

    Args:
        prior: Predicted state before seeing the measurement.
        plan: Sounding plan whose G_real produced the observation.
        y: Stacked-real measurement.
        params: Sigma-point scaling parameters.
        rho: Linear SNR; defaults to the observation's own snr_rho.
        channel_fn: Batched state->stacked-real-channel map; required unless
            precomputed stats are supplied.
        stats: Prior sigma-transform moments, if already computed for beam
            design; skips a redundant transform.

    Returns:
        Posterior TrackerState with conditioned covariance.
    """
    if rho is None:
        rho = y.snr_rho
    if stats is None:
        if channel_fn is None:
            raise DimensionMismatch("update needs either channel_fn or stats")
        sigma = sigma_points(prior.x_hat.x, prior.R, params)
        stats = channel_statistics(sigma, channel_fn)
    G = plan.G_real
    if y.y_real.shape != (G.shape[0],):
        raise DimensionMismatch(
            f"observation has shape {y.y_real.shape}, expected ({G.shape[0]},)"
        )
    if stats.h_hat.shape != (G.shape[1],):
        raise DimensionMismatch(
            f"channel map produced length {stats.h_hat.shape[0]}, "
            f"expected {G.shape[1]}"
        )

    innovation = y.y_real - G @ stats.h_hat
    S = G @ stats.Pi @ G.T + np.eye(G.shape[0]) / (2.0 * rho)
    T = G @ stats.R_xh.T  # maps state deviations into observation space
    try:
        factor = cho_factor((S + S.T) / 2.0)
    except np.linalg.LinAlgError:
        try:
            factor = cho_factor((S + S.T) / 2.0 + 1e-12 * np.eye(S.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise SingularInnovation(
                "innovation covariance is singular even after regularization"
            ) from exc
    x_new = prior.x_hat.x + T.T @ cho_solve(factor, innovation)
    R_new = prior.R - T.T @ cho_solve(factor, T)
    return TrackerState(
        x_hat=ChannelState(prior.x_hat.L, x_new),
        R=_condition_covariance(R_new),
        k=prior.k,
    )


def forward_predict_channel(
    ts: TrackerState,
    model: DynamicsModel,
    horizon: float,
    tx: ArrayGeometry,
    rx: ArrayGeometry,
) -> np.ndarray:
    """Predicts the complex channel matrix ``horizon`` seconds ahead.

    The deterministic part of the dynamics is exact for any step length, so a
    single transition covers the whole horizon.  The filter itself is not
    advanced; this is a read-only projection for beam pointing between
    soundings.
    """
    if horizon < 0.0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    state = ts.x_hat
    if horizon > 0.0:
        tp = build_transition(model, horizon)
        state = ChannelState(state.L, tp.A @ state.x)
    return channel_matrix(state, tx, rx)
