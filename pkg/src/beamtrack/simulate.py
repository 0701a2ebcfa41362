"""Monte Carlo experiment harness: scenario synthesis, frame loop, metrics.

One simulated frame interleaves two time scales.  The true channel state
advances every ``fine_step`` seconds; once per coherence period ``T_S`` the
tracker predicts, designs sounding beams from its prior statistics, observes
the channel through them, and updates.  Between soundings, metrics are
evaluated on the fine grid for three arms sharing the same truth: the tracked
estimate held fixed, the tracked estimate forward-predicted to the current
instant, and an unfiltered one-shot estimate redrawn each period with the
same statistics as the initializer.

Runs are reproducible and order-independent: run ``i`` of a config seeds all
of its randomness from ``SeedSequence([seed, i])``, with separate child
streams for the scenario draw, the process noise, the observation noise, and
the one-shot arm, so no arm perturbs another.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .beams import design_beams
from .channel import ArrayGeometry, ChannelState, channel_matrix
from .dynamics import DynamicsModel, advance_truth, build_transition
from .errors import BadConfig, EmptyInput, ZeroChannel
from .sounding import build_plan, observe
from .tracker import (
    TrackerState,
    UkfParams,
    channel_statistics,
    make_channel_fn,
    predict,
    sigma_points,
    update,
)

DIVERGENCE_NORM = 1e9


@dataclass(frozen=True)
class ScenarioConfig:
    """Experiment configuration; defaults reproduce the reference setup.

    Attributes:
        L: Path count.
        M_T, M_R: Transmit/receive antenna counts.
        N_T, N_R: Sounding beam counts per period.
        first_N_T, first_N_R: Optional beam counts for the first period only,
            letting a run start with a denser sweep before settling on
            N_T/N_R; ``None`` uses N_T/N_R throughout.
        rho_db: SNR in dB.
        beta: Gain correlation per reference step.
        T_S: Coherence period (seconds) — one sounding per period.
        frame_length: Total simulated time (seconds).
        fine_step: Truth-evolution and metric grid step (seconds).
        sigma_vdot: Rayleigh scale of the initial path speed |d upsilon/dt|.
        init_pos_var: Variance of the initial virtual-position estimate error.
        init_vel_var: Variance of the (zero-mean) initial velocity estimate.
        init_gain_var: Variance of the complex initial gain estimate error.
        q_upsilon: Per-pair (position, velocity) process noise per T_S.
        d_over_lambda: Antenna spacing in wavelengths.
        seed: Master seed; run i derives from SeedSequence([seed, i]).
        num_runs: Monte Carlo run count.
    """

    L: int = 4
    M_T: int = 16
    M_R: int = 16
    N_T: int = 6
    N_R: int = 6
    first_N_T: int | None = None
    first_N_R: int | None = None
    rho_db: float = 10.0
    beta: float = 0.905
    T_S: float = 1e-4
    frame_length: float = 5e-3
    fine_step: float = 1e-6
    sigma_vdot: float = 100.0 * np.sqrt(2.0 / np.pi)
    init_pos_var: float = 0.1
    init_vel_var: float = 1e6
    init_gain_var: float = 0.01
    q_upsilon: tuple = (1e-4, 1e2)
    d_over_lambda: float = 0.5
    seed: int = 0
    num_runs: int = 20

    def __post_init__(self):
        for name in ("L", "M_T", "M_R", "N_T", "N_R", "num_runs"):
            if getattr(self, name) < 1:
                raise BadConfig(f"{name} must be at least 1")
        if self.N_T > self.M_T or self.N_R > self.M_R:
            raise BadConfig("beam counts cannot exceed antenna counts")
        for name, cap in (("first_N_T", self.M_T), ("first_N_R", self.M_R)):
            value = getattr(self, name)
            if value is not None and not 1 <= value <= cap:
                raise BadConfig(f"{name} must lie in [1, {cap}]")
        for name in ("T_S", "frame_length", "fine_step"):
            if getattr(self, name) <= 0.0:
                raise BadConfig(f"{name} must be positive")
        if not _divides(self.fine_step, self.T_S):
            raise BadConfig("fine_step must divide T_S")
        if not _divides(self.T_S, self.frame_length):
            raise BadConfig("T_S must divide frame_length")
        for name in ("init_pos_var", "init_vel_var", "init_gain_var", "sigma_vdot"):
            if getattr(self, name) < 0.0:
                raise BadConfig(f"{name} must be nonnegative")
        object.__setattr__(self, "q_upsilon", tuple(float(q) for q in self.q_upsilon))

    @property
    def rho(self) -> float:
        return 10.0 ** (self.rho_db / 10.0)

    @property
    def steps_per_period(self) -> int:
        return round(self.T_S / self.fine_step)

    @property
    def num_fine_steps(self) -> int:
        return round(self.frame_length / self.fine_step)

    @property
    def num_observations(self) -> int:
        return round(self.frame_length / self.T_S)


def _divides(small: float, big: float) -> bool:
    ratio = big / small
    return abs(ratio - round(ratio)) < 1e-9 * ratio and round(ratio) >= 1


@dataclass
class RunRecord:
    """Per-run metric trajectories on the fine time grid."""

    times: np.ndarray
    true_tx: np.ndarray
    est_tx: np.ndarray
    true_rx: np.ndarray
    est_rx: np.ndarray
    tracked_loss: np.ndarray
    oneshot_loss: np.ndarray
    prediction_gain: np.ndarray
    obs_times: np.ndarray
    trace_wr: np.ndarray
    innovation_norms: np.ndarray
    diverged: bool = False


@dataclass
class FrameSummary:
    """Across-run quantiles of the per-time metrics."""

    times: np.ndarray
    obs_times: np.ndarray
    tracked_loss: dict
    oneshot_loss: dict
    prediction_gain: dict
    aod_error: dict
    aoa_error: dict
    trace_wr: dict
    innovation_norm: dict
    num_runs: int = 0
    num_diverged: int = 0


def generate_scenario(
    cfg: ScenarioConfig, rng: np.random.Generator
) -> tuple[ChannelState, ChannelState, np.ndarray]:
    """Draws the true initial state, its noisy estimate, and the estimate's covariance."""
    truth = _draw_truth(cfg, rng)
    estimate = _noisy_estimate(truth, cfg, rng)
    return truth, estimate, _initial_covariance(cfg)


def _draw_truth(cfg: ScenarioConfig, rng: np.random.Generator) -> ChannelState:
    gains = (
        rng.standard_normal(cfg.L) + 1j * rng.standard_normal(cfg.L)
    ) / np.sqrt(2.0)
    theta_t = rng.uniform(-np.pi / 2.0, np.pi / 2.0, cfg.L)
    theta_r = rng.uniform(-np.pi / 2.0, np.pi / 2.0, cfg.L)
    speed_t = rng.rayleigh(cfg.sigma_vdot, cfg.L) * rng.choice([-1.0, 1.0], cfg.L)
    speed_r = rng.rayleigh(cfg.sigma_vdot, cfg.L) * rng.choice([-1.0, 1.0], cfg.L)
    return ChannelState.from_parts(
        gains, np.tan(theta_t), speed_t, np.tan(theta_r), speed_r
    )


def _noisy_estimate(
    truth: ChannelState, cfg: ScenarioConfig, rng: np.random.Generator
) -> ChannelState:
    """Perturbs a true state with the initializer's error statistics."""
    L = cfg.L
    gains = truth.gains + np.sqrt(cfg.init_gain_var / 2.0) * (
        rng.standard_normal(L) + 1j * rng.standard_normal(L)
    )
    pos_sd = np.sqrt(cfg.init_pos_var)
    vel_sd = np.sqrt(cfg.init_vel_var)
    return ChannelState.from_parts(
        gains,
        truth.tx_positions + pos_sd * rng.standard_normal(L),
        vel_sd * rng.standard_normal(L),
        truth.rx_positions + pos_sd * rng.standard_normal(L),
        vel_sd * rng.standard_normal(L),
    )


def _initial_covariance(cfg: ScenarioConfig) -> np.ndarray:
    diag = np.empty(6 * cfg.L)
    diag[: 2 * cfg.L] = cfg.init_gain_var / 2.0
    diag[2 * cfg.L :] = np.tile([cfg.init_pos_var, cfg.init_vel_var], 2 * cfg.L)
    return np.diag(diag)


def beamformers_from_estimate(H_est: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dominant right/left singular vectors of an estimated channel matrix."""
    u, s, vh = np.linalg.svd(np.asarray(H_est, dtype=complex))
    if s[0] <= 0.0:
        raise ZeroChannel("cannot pick beams for an all-zero channel estimate")
    return vh[0].conj(), u[:, 0]


def snr_loss_ratio(H_true: np.ndarray, H_est: np.ndarray) -> float:
    """Beamforming gain achieved with estimated CSI relative to perfect CSI.

    Points the transmit/receive pair at the dominant singular vectors of the
    estimate and measures the captured fraction of the true channel's
    spectral gain, a number in [0, 1].
    """
    f, z = beamformers_from_estimate(H_est)
    denom = np.linalg.norm(np.asarray(H_true, dtype=complex), 2) ** 2
    if denom <= 0.0:
        raise ZeroChannel("true channel is zero; loss ratio undefined")
    return float(np.abs(z.conj() @ H_true @ f) ** 2 / denom)


def _loss_given_beams(H_true, f, z, spectral_gain) -> float:
    return float(np.abs(z.conj() @ H_true @ f) ** 2 / spectral_gain)


def run_frame(cfg: ScenarioConfig, run_index: int = 0) -> RunRecord:
    """Simulates one frame: truth evolution, periodic sounding, tracking, metrics."""
    rho = cfg.rho
    tx = ArrayGeometry(cfg.M_T, cfg.d_over_lambda)
    rx = ArrayGeometry(cfg.M_R, cfg.d_over_lambda)
    model = DynamicsModel(
        L=cfg.L, beta=cfg.beta, T_S=cfg.T_S, q_upsilon=np.array(cfg.q_upsilon)
    )
    tp_fine = build_transition(model, cfg.fine_step)
    tp_obs = build_transition(model, cfg.T_S)
    params = UkfParams()
    channel_fn = make_channel_fn(cfg.L, tx, rx)

    seq = np.random.SeedSequence([cfg.seed, run_index])
    rng_scenario, rng_truth, rng_obs, rng_oneshot = (
        np.random.default_rng(s) for s in seq.spawn(4)
    )

    truth, estimate, R0 = generate_scenario(cfg, rng_scenario)
    ts = TrackerState(x_hat=estimate, R=R0, k=0)

    n_fine = cfg.num_fine_steps
    n_obs = cfg.num_observations
    per_obs = cfg.steps_per_period

    rec = RunRecord(
        times=np.arange(n_fine) * cfg.fine_step,
        true_tx=np.full((n_fine, cfg.L), np.nan),
        est_tx=np.full((n_fine, cfg.L), np.nan),
        true_rx=np.full((n_fine, cfg.L), np.nan),
        est_rx=np.full((n_fine, cfg.L), np.nan),
        tracked_loss=np.full(n_fine, np.nan),
        oneshot_loss=np.full(n_fine, np.nan),
        prediction_gain=np.full(n_fine, np.nan),
        obs_times=np.arange(n_obs) * cfg.T_S,
        trace_wr=np.full(n_obs, np.nan),
        innovation_norms=np.full(n_obs, np.nan),
    )

    held_beams = oneshot_beams = None
    period_start = 0.0
    for i in range(n_fine):
        t = i * cfg.fine_step
        if i > 0:
            truth = advance_truth(truth, tp_fine, rng_truth)
        if not (np.all(np.isfinite(truth.x)) and np.linalg.norm(truth.x) < DIVERGENCE_NORM):
            rec.diverged = True
            break

        if i % per_obs == 0:
            k = i // per_obs
            if k > 0:
                ts = predict(ts, tp_obs)
            sigma = sigma_points(ts.x_hat.x, ts.R, params)
            stats = channel_statistics(sigma, channel_fn)
            n_t = cfg.first_N_T if k == 0 and cfg.first_N_T else cfg.N_T
            n_r = cfg.first_N_R if k == 0 and cfg.first_N_R else cfg.N_R
            design = design_beams(ts, tx, rx, params, rho, n_t, n_r, stats=stats)
            plan = build_plan(design.F, design.Z)

            h_true = channel_fn(truth.x[None, :])[0]
            obs = observe(plan, h_true, rho, rng_obs, time_index=k)
            rec.innovation_norms[k] = np.linalg.norm(
                obs.y_real - plan.G_real @ stats.h_hat
            )
            ts = update(ts, plan, obs, params, rho, stats=stats)
            if not (
                np.all(np.isfinite(ts.x_hat.x))
                and np.linalg.norm(ts.x_hat.x) < DIVERGENCE_NORM
            ):
                rec.diverged = True
                break
            rec.trace_wr[k] = np.trace(ts.R)

            period_start = t
            H_held = channel_matrix(ts.x_hat, tx, rx)
            held_beams = beamformers_from_estimate(H_held)
            oneshot = _noisy_estimate(truth, cfg, rng_oneshot)
            oneshot_beams = beamformers_from_estimate(channel_matrix(oneshot, tx, rx))

        H_true = channel_matrix(truth, tx, rx)
        spectral_gain = np.linalg.norm(H_true, 2) ** 2
        held_loss = _loss_given_beams(H_true, *held_beams, spectral_gain)
        rec.tracked_loss[i] = held_loss
        rec.oneshot_loss[i] = _loss_given_beams(H_true, *oneshot_beams, spectral_gain)

        horizon = t - period_start
        if horizon > 0.0:
            tp_h = build_transition(model, horizon)
            predicted = ChannelState(cfg.L, tp_h.A @ ts.x_hat.x)
            pred_beams = beamformers_from_estimate(channel_matrix(predicted, tx, rx))
            pred_loss = _loss_given_beams(H_true, *pred_beams, spectral_gain)
            rec.prediction_gain[i] = pred_loss / max(held_loss, 1e-300)
        else:
            rec.prediction_gain[i] = 1.0

        rec.true_tx[i] = truth.tx_positions
        rec.est_tx[i] = ts.x_hat.tx_positions
        rec.true_rx[i] = truth.rx_positions
        rec.est_rx[i] = ts.x_hat.rx_positions

    return rec


def _worker_count(cfg: ScenarioConfig, max_workers: int | None) -> int:
    if max_workers is None:
        env = os.environ.get("BEAMTRACK_THREADS", "")
        max_workers = int(env) if env.strip() else (os.cpu_count() or 1)
    return max(1, min(max_workers, cfg.num_runs))


def run_many(cfg: ScenarioConfig, max_workers: int | None = None) -> list[RunRecord]:
    """Executes cfg.num_runs independent frames, in parallel when possible.

    Results are identical whatever the worker count: each run's randomness
    depends only on (cfg.seed, run_index).
    """
    workers = _worker_count(cfg, max_workers)
    indices = range(cfg.num_runs)
    if workers == 1:
        return [run_frame(cfg, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(partial(run_frame, cfg), indices))


def _quantiles(stack: np.ndarray) -> dict:
    return {
        "median": np.nanmedian(stack, axis=0),
        "q25": np.nanquantile(stack, 0.25, axis=0),
        "q75": np.nanquantile(stack, 0.75, axis=0),
    }


def aggregate_runs(records: list[RunRecord]) -> FrameSummary:
    """Pointwise across-run quantiles of every metric, excluding diverged runs."""
    if not records:
        raise EmptyInput("no run records to aggregate")
    clean = [r for r in records if not r.diverged]
    if not clean:
        raise EmptyInput(f"all {len(records)} runs diverged")

    def stack(attr):
        return np.stack([getattr(r, attr) for r in clean])

    aod = np.abs(stack("est_tx") - stack("true_tx"))  # (runs, time, path)
    aoa = np.abs(stack("est_rx") - stack("true_rx"))
    pooled_aod = aod.transpose(0, 2, 1).reshape(-1, aod.shape[1])
    pooled_aoa = aoa.transpose(0, 2, 1).reshape(-1, aoa.shape[1])

    return FrameSummary(
        times=clean[0].times,
        obs_times=clean[0].obs_times,
        tracked_loss=_quantiles(stack("tracked_loss")),
        oneshot_loss=_quantiles(stack("oneshot_loss")),
        prediction_gain=_quantiles(stack("prediction_gain")),
        aod_error=_quantiles(pooled_aod),
        aoa_error=_quantiles(pooled_aoa),
        trace_wr=_quantiles(stack("trace_wr")),
        innovation_norm=_quantiles(stack("innovation_norms")),
        num_runs=len(records),
        num_diverged=len(records) - len(clean),
    )
