"""Command-line front end: config parsing, experiment execution, file emission.

Two subcommands:

* ``simulate`` runs the Monte Carlo experiment described by a flat
  ``key=value`` config file (keys match :class:`ScenarioConfig` field names,
  plus ``output_dir``/``formats``/``arms``/``quantiles`` for output routing)
  and writes ``paths.csv``, ``esnr.csv``, and ``summary.json``.  ``--set
  key=value`` overrides take final precedence.  Identical config and seed
  give byte-identical CSV output.
* ``selftest`` runs the numeric invariant suite (sigma-moment
  reconstruction, unscented-equals-Kalman on a linear map, Kronecker factor
  recovery) and prints a pass/fail table.

All internal math stays in linear units; dB conversion happens only at
emission.  Orchestration is single-threaded — run-level parallelism is
delegated to :func:`run_many`, capped by the BEAMTRACK_THREADS env var.

Exit codes: simulate — 0 success, 1 config error, 2 runtime error or every
run diverged; selftest — 0 all checks pass, 3 any check fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .beams import kronecker_beams
from .channel import ChannelState
from .dynamics import DynamicsModel, build_transition
from .errors import BadConfig, BeamtrackError, EmptyInput
from .numerics import KroneckerFactorDims
from .simulate import RunRecord, ScenarioConfig, run_many
from .sounding import Observation, build_plan
from .tracker import (
    SigmaSet,
    TrackerState,
    UkfParams,
    channel_statistics,
    predict,
    sigma_points,
    update,
)

CSV_SCHEMA = "# beamtrack-csv v1"
ARMS = ("tracked", "one_shot", "predicted")
OUTPUT_FORMATS = ("csv", "json")
_CLI_KEYS = ("output_dir", "formats", "arms", "quantiles")


@dataclass(frozen=True)
class CliConfig:
    """Experiment configuration plus output routing.

    Attributes:
        scenario: The experiment itself.
        output_dir: Directory receiving the result files (created if absent).
        formats: Which outputs to write: "csv" (paths.csv, esnr.csv) and/or
            "json" (summary.json).
        arms: Which metric arms to emit: tracked / one_shot / predicted.
        quantiles: Quantile levels reported in summary.json.
    """

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    output_dir: str = "."
    formats: tuple = OUTPUT_FORMATS
    arms: tuple = ARMS
    quantiles: tuple = (0.25, 0.5, 0.75)

    def __post_init__(self):
        if not self.arms:
            raise BadConfig("at least one arm must be selected")
        for arm in self.arms:
            if arm not in ARMS:
                raise BadConfig(f"unknown arm {arm!r}; choose from {ARMS}")
        for fmt in self.formats:
            if fmt not in OUTPUT_FORMATS:
                raise BadConfig(
                    f"unknown output format {fmt!r}; choose from {OUTPUT_FORMATS}"
                )
        for q in self.quantiles:
            if not 0.0 < q < 1.0:
                raise BadConfig(f"quantile levels must lie in (0, 1), got {q}")


# --- config file parsing -------------------------------------------------

_SCENARIO_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_SCENARIO_DEFAULTS = ScenarioConfig()


def _split_csv(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _convert_scenario_value(name: str, text: str):
    """Converts one raw config string to the type of a ScenarioConfig field."""
    default = getattr(_SCENARIO_DEFAULTS, name)
    try:
        if default is None:  # optional int (first-period beam counts)
            return None if text.strip().lower() in ("", "none") else int(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(part) for part in _split_csv(text))
    except ValueError as exc:
        raise BadConfig(f"invalid value for {name}: {text!r}") from exc
    raise BadConfig(f"config key {name} is not settable from text")


def _convert_cli_value(name: str, text: str):
    if name == "output_dir":
        return text.strip()
    if name in ("formats", "arms"):
        return tuple(_split_csv(text))
    try:
        return tuple(float(part) for part in _split_csv(text))  # quantiles
    except ValueError as exc:
        raise BadConfig(f"invalid value for {name}: {text!r}") from exc


def _parse_kv(item: str, source: str) -> tuple[str, str]:
    key, sep, value = item.partition("=")
    if not sep or not key.strip():
        raise BadConfig(f"{source}: expected key=value, got {item!r}")
    return key.strip(), value.strip()


def read_config_file(path: str) -> dict:
    """Parses a flat key=value config file; blank lines and # comments skip."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise BadConfig(f"cannot read config file {path}: {exc}") from exc
    pairs = {}
    for num, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, value = _parse_kv(line, source=f"{path}:{num}")
        pairs[key] = value
    return pairs


def build_cli_config(pairs: dict) -> CliConfig:
    """Typed CliConfig from raw key=value string pairs; unknown keys reject."""
    scenario_kwargs, cli_kwargs = {}, {}
    for key, value in pairs.items():
        if key in _SCENARIO_FIELDS:
            scenario_kwargs[key] = _convert_scenario_value(key, value)
        elif key in _CLI_KEYS:
            cli_kwargs[key] = _convert_cli_value(key, value)
        else:
            raise BadConfig(f"unknown config key: {key}")
    return CliConfig(scenario=ScenarioConfig(**scenario_kwargs), **cli_kwargs)


def load_cli_config(config_path: str | None, overrides=()) -> CliConfig:
    """Reads the optional config file, then applies --set overrides on top."""
    pairs = read_config_file(config_path) if config_path is not None else {}
    for item in overrides:
        key, value = _parse_kv(item, source="--set")
        pairs[key] = value
    return build_cli_config(pairs)


# --- result emission ------------------------------------------------------

def _write_csv(path: str, columns: list, data: np.ndarray, fmt: list) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_SCHEMA + "\n")
        fh.write(",".join(columns) + "\n")
        np.savetxt(fh, data, fmt=fmt, delimiter=",")


def _paths_table(records: list) -> np.ndarray:
    blocks = []
    for run, rec in enumerate(records):
        n_fine, L = rec.true_tx.shape
        blocks.append(
            np.column_stack(
                [
                    np.full(n_fine * L, run),
                    np.repeat(rec.times, L),
                    np.tile(np.arange(L), n_fine),
                    rec.true_tx.ravel(),
                    rec.est_tx.ravel(),
                    rec.true_rx.ravel(),
                    rec.est_rx.ravel(),
                ]
            )
        )
    return np.vstack(blocks)


def _db(ratio: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return 10.0 * np.log10(ratio)


_ARM_COLUMNS = {
    "tracked": ("loss_tracked_db", "tracked_loss"),
    "one_shot": ("loss_oneshot_db", "oneshot_loss"),
    "predicted": ("pred_gain_db", "prediction_gain"),
}


def _esnr_table(records: list, arms: tuple) -> tuple[list, np.ndarray]:
    columns = ["run", "t_s"]
    blocks = []
    for run, rec in enumerate(records):
        cols = [np.full(rec.times.shape, run), rec.times]
        for arm in ARMS:
            if arm in arms:
                cols.append(_db(getattr(rec, _ARM_COLUMNS[arm][1])))
        blocks.append(np.column_stack(cols))
    for arm in ARMS:
        if arm in arms:
            columns.append(_ARM_COLUMNS[arm][0])
    return columns, np.vstack(blocks)


def _arm_summary(records: list, arms: tuple, quantiles: tuple) -> dict:
    clean = [r for r in records if not r.diverged]
    out = {}
    for arm in arms:
        pool = np.concatenate([getattr(r, _ARM_COLUMNS[arm][1]) for r in clean])
        key = "median_gain_db" if arm == "predicted" else "median_loss_db"
        out[arm] = {
            key: float(_db(np.nanmedian(pool))),
            "quantiles_db": {
                str(q): float(_db(np.nanquantile(pool, q))) for q in quantiles
            },
        }
    return out


def _write_summary(path: str, cfg: CliConfig, records: list) -> None:
    scenario = dataclasses.asdict(cfg.scenario)
    scenario["q_upsilon"] = list(cfg.scenario.q_upsilon)
    summary = {
        "schema": "beamtrack-summary v1",
        "config": {
            **scenario,
            "output_dir": cfg.output_dir,
            "formats": list(cfg.formats),
            "arms": list(cfg.arms),
            "quantiles": list(cfg.quantiles),
        },
        "num_runs": len(records),
        "num_diverged": sum(r.diverged for r in records),
        "seeds": [[cfg.scenario.seed, i] for i in range(len(records))],
        "arms": _arm_summary(records, cfg.arms, cfg.quantiles),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(cfg: CliConfig, records: list) -> list:
    written = []
    if "csv" in cfg.formats:
        paths_path = os.path.join(cfg.output_dir, "paths.csv")
        _write_csv(
            paths_path,
            ["run", "t_s", "path", "true_aod_v", "est_aod_v", "true_aoa_v", "est_aoa_v"],
            _paths_table(records),
            ["%d", "%.10e", "%d", "%.10e", "%.10e", "%.10e", "%.10e"],
        )
        written.append("paths.csv")
        columns, table = _esnr_table(records, cfg.arms)
        _write_csv(
            os.path.join(cfg.output_dir, "esnr.csv"),
            columns,
            table,
            ["%d", "%.10e"] + ["%.10e"] * (len(columns) - 2),
        )
        written.append("esnr.csv")
    if "json" in cfg.formats:
        _write_summary(os.path.join(cfg.output_dir, "summary.json"), cfg, records)
        written.append("summary.json")
    return written


# --- subcommands ----------------------------------------------------------

def cmd_simulate(config_path: str | None = None, overrides=()) -> int:
    """Runs the experiment and writes result files; returns the exit code."""
    try:
        cfg = load_cli_config(config_path, overrides)
        os.makedirs(cfg.output_dir, exist_ok=True)
        if not os.access(cfg.output_dir, os.W_OK):
            raise BadConfig(f"output_dir is not writable: {cfg.output_dir}")
    except (BeamtrackError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    start = time.perf_counter()
    try:
        records = run_many(cfg.scenario)
        diverged = sum(r.diverged for r in records)
        if diverged == len(records):
            raise EmptyInput(f"all {len(records)} runs diverged")
        written = _emit(cfg, records)
    except (BeamtrackError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start
    listing = ", ".join(written) if written else "no files (empty formats)"
    print(
        f"wrote {listing} in {cfg.output_dir} "
        f"({len(records)} runs, {diverged} diverged, {elapsed:.1f}s)"
    )
    return 0


def _unit_columns(rng: np.random.Generator, M: int, N: int) -> np.ndarray:
    B = rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))
    return B / np.linalg.norm(B, axis=0)


def _faulted(sigma: SigmaSet, fault: float) -> SigmaSet:
    if fault == 0.0:
        return sigma
    w_mean = sigma.w_mean.copy()
    w_cov = sigma.w_cov.copy()
    w_mean[0] += fault
    w_cov[0] += fault
    return SigmaSet(points=sigma.points, w_mean=w_mean, w_cov=w_cov)


def _check_sigma_moments(fault: float) -> float:
    """Max reconstruction error of (mean, covariance) from sigma points."""
    rng = np.random.default_rng(11)
    params = UkfParams()
    worst = 0.0
    for _ in range(10):
        n = 24
        x = rng.standard_normal(n)
        A = rng.standard_normal((n, n))
        R = A @ A.T / n
        sigma = _faulted(sigma_points(x, R, params), fault)
        mean = sigma.w_mean @ sigma.points
        dev = sigma.points - mean
        cov = (dev * sigma.w_cov[:, None]).T @ dev
        worst = max(
            worst,
            float(np.max(np.abs(mean - x))),
            float(np.max(np.abs(cov - R))),
        )
    return worst


def _kalman_update(x, R, H, y_vec, noise_var):
    S = H @ R @ H.T + noise_var * np.eye(H.shape[0])
    K = np.linalg.solve(S, H @ R).T
    return x + K @ (y_vec - H @ x), R - K @ H @ R


def _check_ukf_matches_kf(fault: float) -> float:
    """Max deviation from the exact Kalman filter on a linear channel map."""
    rng = np.random.default_rng(12)
    dft2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    plan = build_plan(dft2.astype(complex), dft2.astype(complex))
    C = rng.standard_normal((8, 6))
    channel_fn = lambda X: X @ C.T  # noqa: E731 - tiny linear surrogate
    H = plan.G_real @ C
    rho = 10.0
    model = DynamicsModel(L=1, beta=0.905, T_S=1e-4)
    tp = build_transition(model, 1e-4)
    params = UkfParams()

    ts = TrackerState(ChannelState(1, np.zeros(6)), np.eye(6))
    x_kf, R_kf = np.zeros(6), np.eye(6)
    worst = 0.0
    for k in range(20):
        ts = predict(ts, tp)
        x_kf, R_kf = tp.A @ x_kf, tp.A @ R_kf @ tp.A.T + tp.Q
        y_vec = rng.standard_normal(8)
        obs = Observation(y_real=y_vec, snr_rho=rho, time_index=k)
        sigma = _faulted(sigma_points(ts.x_hat.x, ts.R, params), fault)
        stats = channel_statistics(sigma, channel_fn)
        ts = update(ts, plan, obs, params, stats=stats)
        x_kf, R_kf = _kalman_update(x_kf, R_kf, H, y_vec, 1.0 / (2.0 * rho))
        worst = max(
            worst,
            float(np.max(np.abs(ts.x_hat.x - x_kf))),
            float(np.max(np.abs(ts.R - R_kf))),
        )
    return worst


def _check_kronecker_recovery(fault: float) -> float:
    """Worst per-column correlation shortfall when factoring exact products."""
    del fault  # weights do not enter this check
    rng = np.random.default_rng(13)
    dims = KroneckerFactorDims(16, 4, 16, 4)
    worst = 0.0
    for _ in range(10):
        F0 = _unit_columns(rng, 16, 4)
        Z0 = _unit_columns(rng, 16, 4)
        out = kronecker_beams(np.kron(F0.conj(), Z0), dims)
        for j in range(4):
            worst = max(worst, 1.0 - abs(out.F[:, j].conj() @ F0[:, j]))
            worst = max(worst, 1.0 - abs(out.Z[:, j].conj() @ Z0[:, j]))
    return worst


_SELFTEST_CHECKS = (
    ("sigma moments reconstruct mean and covariance", _check_sigma_moments, 1e-9),
    ("unscented update equals Kalman on linear map", _check_ukf_matches_kf, 1e-8),
    ("Kronecker factor recovery from exact products", _check_kronecker_recovery, 1e-9),
)


def cmd_selftest(inject_fault: bool = False) -> int:
    """Runs the numeric invariant suite; exit 0 iff every check passes."""
    fault = 1e-3 if inject_fault else 0.0
    start = time.perf_counter()
    failures = 0
    print(f"{'check':<48}{'max error':>12}{'tolerance':>12}  result")
    for name, check, tol in _SELFTEST_CHECKS:
        err = check(fault)
        ok = err <= tol
        failures += not ok
        print(f"{name:<48}{err:>12.2e}{tol:>12.0e}  {'pass' if ok else 'FAIL'}")
    elapsed = time.perf_counter() - start
    total = len(_SELFTEST_CHECKS)
    print(f"selftest: {total - failures}/{total} checks passed ({elapsed:.1f}s)")
    return 3 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamtrack",
        description="Channel-tracking Monte Carlo experiments and numeric selftest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser(
        "simulate", help="run the experiment and write paths.csv/esnr.csv/summary.json"
    )
    sim.add_argument("--config", metavar="PATH", help="flat key=value config file")
    sim.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable; applied after --config)",
    )
    st = sub.add_parser("selftest", help="run the numeric invariant suite")
    st.add_argument(
        "--inject-fault",
        action="store_true",
        help="perturb internal weights to verify the suite detects faults",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.overrides)
    return cmd_selftest(inject_fault=args.inject_fault)


if __name__ == "__main__":
    sys.exit(main())
