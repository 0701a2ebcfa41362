"""Observation operators built from sounding beams, and noisy measurements.

Sounding a channel ``H`` with transmit beams ``F`` (columns) and receive
beams ``Z`` yields the matrix ``Z^H H F``; vectorizing turns that into the
linear operator ``G = F^T kron Z^H`` acting on ``vec(H)``.  Everything
downstream works with the stacked-real form, where receiver noise is i.i.d.
Gaussian with variance ``1 / (2 rho)`` per real component.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyBeamSet,
    NonpositiveSnr,
    NotUnitNorm,
)
from .numerics import complex_to_real_stacked, vec


@dataclass(frozen=True)
class SoundingPlan:
    """Beam sets together with their precomputed observation operators.

    Attributes:
        F: Transmit beams, one unit-norm column per sounding direction.
        Z: Receive beams, one unit-norm column per sounding direction.
        G: Complex observation operator, F.T kron Z.conj().T.
        G_real: Stacked-real form of G, acting on [Re vec H; Im vec H].
    """

    F: np.ndarray
    Z: np.ndarray
    G: np.ndarray
    G_real: np.ndarray

    @property
    def num_soundings(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True)
class Observation:
    """One stacked-real measurement taken at time index k."""

    y_real: np.ndarray
    snr_rho: float
    time_index: int


def _checked_beams(B: np.ndarray, name: str) -> np.ndarray:
    B = np.asarray(B, dtype=complex)
    if B.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-d beam matrix, got ndim={B.ndim}")
    if B.shape[1] == 0:
        raise EmptyBeamSet(f"{name} has no beams")
    norms = np.linalg.norm(B, axis=0)
    err = np.max(np.abs(norms - 1.0))
    if err <= 1e-6:
        return B
    if err <= 1e-3:
        warnings.warn(
            f"renormalizing {name}: worst column norm off by {err:.2e}",
            stacklevel=3,
        )
        return B / norms
    raise NotUnitNorm(f"{name} columns must be unit norm; worst deviation {err:.2e}")


def build_plan(F: np.ndarray, Z: np.ndarray) -> SoundingPlan:
    """Validates beam sets and precomputes the observation operators.

    Args:
        F: M_T x N_T transmit beams.
        Z: M_R x N_R receive beams.

    Returns:
        SoundingPlan with G = F.T kron Z^H and its stacked-real form.
    """
    F = _checked_beams(F, "F")
    Z = _checked_beams(Z, "Z")
    G = np.kron(F.T, Z.conj().T)
    return SoundingPlan(F=F, Z=Z, G=G, G_real=complex_to_real_stacked(G))


def observe(
    plan: SoundingPlan,
    h_real: np.ndarray,
    rho: float,
    rng: np.random.Generator,
    time_index: int = 0,
    noiseless: bool = False,
) -> Observation:
    """Measures a stacked-real channel vector through the plan's operator.

    Args:
        plan: Sounding plan whose G_real maps channels to measurements.
        h_real: Stacked-real channel vector [Re vec H; Im vec H].
        rho: Linear SNR; each real noise component has variance 1/(2 rho).
        rng: Noise source.
        time_index: Index stored on the observation.
        noiseless: Skip the noise draw (infinite-SNR limit).

    Returns:
        Observation with y = G_real h + noise.
    """
    if rho <= 0.0:
        raise NonpositiveSnr(f"snr must be positive, got {rho}")
    h_real = np.asarray(h_real, dtype=float)
    if h_real.shape != (plan.G_real.shape[1],):
        raise DimensionMismatch(
            f"channel vector has shape {h_real.shape}, expected ({plan.G_real.shape[1]},)"
        )
    y = plan.G_real @ h_real
    if not noiseless:
        y = y + rng.standard_normal(y.shape[0]) / np.sqrt(2.0 * rho)
    return Observation(y_real=y, snr_rho=rho, time_index=time_index)


def noiseless_response(plan: SoundingPlan, H: np.ndarray) -> np.ndarray:
    """Returns the beam-space response Z^H H F of a complex channel matrix."""
    H = np.asarray(H, dtype=complex)
    expected = (plan.Z.shape[0], plan.F.shape[0])
    if H.shape != expected:
        raise DimensionMismatch(f"channel has shape {H.shape}, expected {expected}")
    return plan.Z.conj().T @ H @ plan.F


def stack_response(plan: SoundingPlan, H: np.ndarray) -> np.ndarray:
    """Stacked-real vectorization of noiseless_response, for cross-checks."""
    resp = vec(noiseless_response(plan, H))
    return np.concatenate([resp.real, resp.imag])
