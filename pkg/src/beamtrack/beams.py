"""Adaptive sounding-beam design from tracked channel statistics.

The next sounding should measure the channel along the directions that most
reduce weighted posterior uncertainty.  Unconstrained, those directions are
the top generalized eigenvectors of the pencil (A, B) built from the prior
sigma statistics; the physical transmit/receive factorization is then
recovered by rearranging the eigenvector matrix so Kronecker structure
becomes an outer product and taking its best rank-one approximation.  A
deterministic DFT grid acts as the fallback (and as the non-adaptive control
arm) whenever the statistics carry no usable information.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ArrayGeometry
from .errors import (
    BadBeamCount,
    BadConfig,
    DimensionMismatch,
    NonpositiveSnr,
)
from .numerics import KroneckerFactorDims, generalized_eig_sym, kron_rearrange, rank_one_factor, unvec
from .tracker import ChannelStats, TrackerState, UkfParams, channel_statistics, make_channel_fn, sigma_points


@dataclass(frozen=True)
class BeamDesignInput:
    """Prior channel statistics and sizing for one beam-design problem.

    Attributes:
        R_xh: State-to-channel cross-covariance, 6L x 2*M_R*M_T.
        Pi_hat: Channel covariance from the sigma transform, symmetric PSD.
        W: Per-state-component weights (diagonal entries), strictly positive.
        rho: Linear SNR of the upcoming sounding.
        num_tx_beams: Transmit beam count N_T.
        num_rx_beams: Receive beam count N_R.
    """

    R_xh: np.ndarray
    Pi_hat: np.ndarray
    W: np.ndarray
    rho: float
    num_tx_beams: int
    num_rx_beams: int

    def __post_init__(self):
        R_xh = np.asarray(self.R_xh, dtype=float)
        Pi = np.asarray(self.Pi_hat, dtype=float)
        W = np.asarray(self.W, dtype=float)
        if W.ndim == 2:
            if np.count_nonzero(W - np.diag(np.diagonal(W))):
                raise BadConfig("weight matrix must be diagonal")
            W = np.diagonal(W).copy()
        if W.shape != (R_xh.shape[0],):
            raise DimensionMismatch(
                f"weights have shape {W.shape}, expected ({R_xh.shape[0]},)"
            )
        if np.any(W <= 0.0):
            raise BadConfig("weights must be strictly positive")
        if Pi.shape != (R_xh.shape[1], R_xh.shape[1]):
            raise DimensionMismatch(
                f"Pi_hat shape {Pi.shape} does not match R_xh width {R_xh.shape[1]}"
            )
        if self.rho <= 0.0:
            raise NonpositiveSnr(f"snr must be positive, got {self.rho}")
        if self.num_tx_beams < 1 or self.num_rx_beams < 1:
            raise BadBeamCount("need at least one beam per side")
        object.__setattr__(self, "R_xh", R_xh)
        object.__setattr__(self, "Pi_hat", Pi)
        object.__setattr__(self, "W", W)


@dataclass(frozen=True)
class BeamDesignOutput:
    """Designed beams plus solver diagnostics."""

    F: np.ndarray
    Z: np.ndarray
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rank_one_residual: float = 0.0
    used_fallback: bool = False


def unconstrained_optimal_directions(
    inp: BeamDesignInput,
) -> tuple[np.ndarray, np.ndarray]:
    """Top observation directions ignoring the Kronecker/unit-norm structure.

    Builds A = R_xh^T W^-1 R_xh and B = Pi_hat + (1/(2 rho)) I and returns the
    leading N_T*N_R generalized eigenvectors of (A, B) as columns, together
    with their eigenvalues in descending order.
    """
    n_dirs = inp.num_tx_beams * inp.num_rx_beams
    A = (inp.R_xh.T / inp.W) @ inp.R_xh
    A = (A + A.T) / 2.0
    m = A.shape[0]
    B = inp.Pi_hat + np.eye(m) / (2.0 * inp.rho)
    eigvals, eigvecs = generalized_eig_sym(A, B, n_dirs)
    return eigvecs, eigvals


def real_directions_to_complex(V_real: np.ndarray) -> np.ndarray:
    """Interprets stacked-real direction columns as unit-norm complex beams."""
    V_real = np.asarray(V_real, dtype=float)
    if V_real.shape[0] % 2:
        raise DimensionMismatch(
            f"stacked-real directions need an even row count, got {V_real.shape[0]}"
        )
    half = V_real.shape[0] // 2
    V = V_real[:half] + 1j * V_real[half:]
    norms = np.linalg.norm(V, axis=0)
    return V / np.where(norms > 0.0, norms, 1.0)


def kronecker_beams(V: np.ndarray, dims: KroneckerFactorDims) -> BeamDesignOutput:
    """Projects complex directions onto a single (F conj) kron Z structure.

    Args:
        V: Complex matrix approximating conj(F) kron Z, with F of shape
            (dims.m1, dims.n1) and Z of shape (dims.m2, dims.n2).
        dims: Factor shapes used for the rearrangement.

    Returns:
        BeamDesignOutput with unit-norm beam columns and the relative
        rank-one residual of the rearranged matrix as a diagnostic.
    """
    V = np.asarray(V, dtype=complex)
    if V.shape != dims.product_shape:
        raise DimensionMismatch(
            f"directions have shape {V.shape}, expected {dims.product_shape}"
        )
    U = kron_rearrange(V, dims)
    u, s, v = rank_one_factor(U)
    residual = np.linalg.norm(U - s * np.outer(u, v.conj())) / np.linalg.norm(U)

    F = unvec(np.sqrt(s) * u, dims.m1, dims.n1).conj()
    Z = unvec(np.sqrt(s) * v.conj(), dims.m2, dims.n2)
    F = _normalized_columns(F, dims.m1)
    Z = _normalized_columns(Z, dims.m2)
    return BeamDesignOutput(F=F, Z=Z, rank_one_residual=float(residual))


def _normalized_columns(B: np.ndarray, M: int) -> np.ndarray:
    """Unit-normalizes columns, substituting DFT columns for degenerate ones."""
    norms = np.linalg.norm(B, axis=0)
    bad = norms <= 1e-12
    if np.any(bad):
        grid = baseline_beams("dft_grid", M, B.shape[1])
        B = B.copy()
        B[:, bad] = grid[:, bad]
        norms = np.linalg.norm(B, axis=0)
    return B / norms


def design_beams(
    prior: TrackerState,
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    params: UkfParams,
    rho: float,
    num_tx_beams: int,
    num_rx_beams: int,
    W: np.ndarray | None = None,
    stats: ChannelStats | None = None,
) -> BeamDesignOutput:
    """Designs the next sounding beams from the predicted tracker state.

    Args:
        prior: Predicted (pre-observation) tracker state.
        tx: Transmit array geometry.
        rx: Receive array geometry.
        params: Sigma-point parameters used for the channel statistics.
        rho: Linear SNR of the upcoming sounding.
        num_tx_beams: Transmit beam count.
        num_rx_beams: Receive beam count.
        W: Optional per-component weights (defaults to uniform).
        stats: Optional precomputed prior sigma statistics, to share work
            with the subsequent measurement update.

    Returns:
        BeamDesignOutput; falls back to the DFT grid when the statistics are
        degenerate (nothing to aim at), with used_fallback set.
    """
    n = prior.x_hat.x.shape[0]
    if stats is None:
        sigma = sigma_points(prior.x_hat.x, prior.R, params)
        stats = channel_statistics(sigma, make_channel_fn(prior.x_hat.L, tx, rx))
    if W is None:
        W = np.ones(n)
    dims = KroneckerFactorDims(
        tx.num_antennas, num_tx_beams, rx.num_antennas, num_rx_beams
    )

    if np.linalg.norm(stats.R_xh) <= 1e-12:
        return _fallback(dims)
    inp = BeamDesignInput(
        R_xh=stats.R_xh,
        Pi_hat=stats.Pi,
        W=W,
        rho=rho,
        num_tx_beams=num_tx_beams,
        num_rx_beams=num_rx_beams,
    )
    V_real, eigvals = unconstrained_optimal_directions(inp)
    if eigvals[0] < 1e-12:
        return _fallback(dims)
    out = kronecker_beams(real_directions_to_complex(V_real), dims)
    return BeamDesignOutput(
        F=out.F,
        Z=out.Z,
        eigenvalues=eigvals,
        rank_one_residual=out.rank_one_residual,
        used_fallback=False,
    )


def _fallback(dims: KroneckerFactorDims) -> BeamDesignOutput:
    return BeamDesignOutput(
        F=baseline_beams("dft_grid", dims.m1, dims.n1),
        Z=baseline_beams("dft_grid", dims.m2, dims.n2),
        used_fallback=True,
    )


def baseline_beams(
    kind: str, M: int, N: int, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Non-adaptive beam sets used as fallbacks and experiment controls.

    Args:
        kind: "dft_grid" for evenly spaced columns of the M-point unitary DFT
            matrix, or "random_unit" for normalized complex Gaussian columns.
        M: Antennas per beam.
        N: Beam count (N <= M for dft_grid).
        rng: Required for random_unit.

    Returns:
        M x N complex matrix with unit-norm columns.
    """
    if N < 1:
        raise BadBeamCount(f"need at least one beam, got {N}")
    if kind == "dft_grid":
        if N > M:
            raise BadBeamCount(f"dft_grid supports at most {M} beams, asked for {N}")
        cols = (np.arange(N) * M) // N
        m = np.arange(M)
        return np.exp(-2j * np.pi * np.outer(m, cols) / M) / np.sqrt(M)
    if kind == "random_unit":
        if rng is None:
            raise BadConfig("random_unit beams need an rng")
        B = rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))
        return B / np.linalg.norm(B, axis=0)
    raise BadConfig(f"unknown baseline beam kind {kind!r}")
