"""Command-line interface: reproducible simulation and analysis runs.

Subcommands chain into a pipeline (generate-coupling, simulate, analyze,
xcorr, spectra, pipeline, validate). Data goes only to files; progress and
telemetry go to stderr. Exit codes: 0 success, 2 configuration error,
3 runtime error. Every run writes `config_used.ini` plus `manifest.json`
(config hash, seed, per-stage files and timings), and rerunning the same
config and seed reproduces the data files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    ExperimentConfig,
    build_config,
    canonical_text,
    config_hash,
)
from .coupling import (
    CouplingMatrix,
    generate_coupling,
    read_coupling,
    validate_coupling,
    write_coupling_dense,
    write_coupling_sparse,
)
from .io import (
    read_panel_csv,
    write_flat_text,
    write_json_atomic,
    write_matrix_csv,
    write_rows_atomic,
)
from .market import run_simulation
from .series import (
    DegenerateSeriesError,
    WindowSearchError,
    distribution_stats,
    integrated_autocorr_time,
    mean_acf,
    normalize_returns,
    volatility_index,
)
from .spectra import mp_reference, spectral_trajectory
from .xcorr import MODES, WindowSpec, rolling_correlations


def _say(message: str) -> None:
    print(message, file=sys.stderr, flush=True)


class Manifest:
    """Per-run record of stages, output files and timings."""

    def __init__(self, config: ExperimentConfig):
        self.path = config.out_dir / "manifest.json"
        self.data = {
            "config_hash": config_hash(config),
            "master_seed": config.model.master_seed,
            "version": __version__,
            "stages": {},
            "failure": None,
        }
        if self.path.exists():
            try:
                previous = json.loads(self.path.read_text())
            except (OSError, ValueError):
                previous = None
            if previous and previous.get("config_hash") == self.data["config_hash"]:
                self.data["stages"] = previous.get("stages", {})

    def record(self, stage: str, files: list, seconds: float) -> None:
        self.data["stages"][stage] = {
            "files": [str(f) for f in files],
            "seconds": seconds,
        }
        self.data["failure"] = None
        self.save()

    def record_failure(self, stage: str, error: str) -> None:
        self.data["failure"] = {"stage": stage, "error": error}
        self.save()

    def save(self) -> None:
        write_json_atomic(self.path, self.data)


def _prepare_out(config: ExperimentConfig) -> Manifest:
    config.out_dir.mkdir(parents=True, exist_ok=True)
    used = config.out_dir / "config_used.ini"
    used.write_text(canonical_text(config), newline="\n")
    return Manifest(config)


def resolve_coupling(config: ExperimentConfig) -> CouplingMatrix:
    """Load the configured matrix file, or regenerate it from the recipe."""
    if config.coupling_path is not None:
        return read_coupling(config.coupling_path)
    return generate_coupling(config.coupling)


def _write_summary(config: ExperimentConfig, stem: str, payload: dict) -> list[Path]:
    """Summary document as JSON, or flat key=value text when JSON is disabled."""
    if "json" in config.formats:
        return [write_json_atomic(config.out_dir / f"{stem}.json", payload)]
    flat: dict[str, object] = {}

    def _flatten(prefix: str, obj) -> None:
        if isinstance(obj, dict):
            for key in sorted(obj):
                _flatten(f"{prefix}{key}" if not prefix else f"{prefix}.{key}", obj[key])
        elif isinstance(obj, (list, tuple)):
            for idx, item in enumerate(obj):
                _flatten(f"{prefix}.{idx}", item)
        else:
            flat[prefix] = "null" if obj is None else obj

    _flatten("", payload)
    return [write_flat_text(config.out_dir / f"{stem}.txt", flat)]


# -- stages -------------------------------------------------------------------

def cmd_generate_coupling(config: ExperimentConfig) -> list[Path]:
    gamma = resolve_coupling(config)
    diagnostics = validate_coupling(gamma)
    files = [
        write_coupling_dense(gamma, config.out_dir / "coupling_dense.csv"),
        write_coupling_sparse(gamma, config.out_dir / "coupling_sparse.txt"),
    ]
    files += _write_summary(config, "coupling_validation", diagnostics.as_dict())
    _say(
        f"coupling: n={diagnostics.n} nonzeros={diagnostics.nonzero_count} "
        f"diagonal_ok={diagnostics.diagonal_ok}"
    )
    return files


def cmd_simulate(config: ExperimentConfig) -> list[Path]:
    gamma = resolve_coupling(config)
    total = config.model.therm_sweeps + config.model.collect_sweeps
    started = time.perf_counter()
    last = [started]

    def progress(phase, done, phase_total):
        now = time.perf_counter()
        if now - last[0] >= 2.0:
            rate = (done if phase == "thermalize" else config.model.therm_sweeps + done) / (
                now - started
            )
            _say(f"simulate[{phase}] {done}/{phase_total} ({rate:.0f} sweeps/s)")
            last[0] = now

    panel = run_simulation(config.model, gamma, threads=config.threads, progress=progress)
    elapsed = time.perf_counter() - started
    _say(f"simulate: {total} sweeps in {elapsed:.1f} s ({total / elapsed:.0f} sweeps/s)")
    from .io import write_panel_csv

    return [write_panel_csv(config.out_dir / "panel.csv", panel)]


def _tau_block(values: np.ndarray, asset_ids: list[int], factor: float) -> dict:
    taus, errors, windows, notes = [], [], [], []
    for asset, row in zip(asset_ids, values):
        try:
            estimate = integrated_autocorr_time(row, c=factor)
            taus.append(estimate.tau)
            errors.append(estimate.error)
            windows.append(estimate.window)
        except DegenerateSeriesError:
            taus.append(None)
            errors.append(None)
            windows.append(None)
            notes.append(f"asset {asset}: zero variance")
        except WindowSearchError as exc:
            taus.append(None)
            errors.append(None)
            windows.append(None)
            notes.append(f"asset {asset}: {exc}")
    present = [t for t in taus if t is not None]
    return {
        "asset": list(asset_ids),
        "tau": taus,
        "error": errors,
        "window": windows,
        "mean_tau": float(np.mean(present)) if present else None,
        "notes": notes,
    }


def cmd_analyze(config: ExperimentConfig, panel_path=None) -> list[Path]:
    panel_path = Path(panel_path) if panel_path else config.out_dir / "panel.csv"
    panel = read_panel_csv(panel_path)
    analysis = config.analysis
    values = panel.values
    mode_values = {
        "return": values,
        "absolute": np.abs(values),
        "squared": values**2,
    }

    max_lag = min(analysis.max_lag, panel.t_len - 1)
    curves = {}
    assets_used = {}
    for mode, data in mode_values.items():
        try:
            curves[mode] = mean_acf(data, max_lag)
            assets_used[mode] = int(
                sum(1 for row in data if row.std() != 0.0)
            )
        except DegenerateSeriesError:
            curves[mode] = None
            assets_used[mode] = 0

    noise_band = 1.96 / np.sqrt(panel.t_len)
    acf_rows = []
    for lag in range(max_lag + 1):
        row = [lag]
        for mode in ("return", "absolute", "squared"):
            curve = curves[mode]
            row.append(float(curve.rho[lag]) if curve is not None else float("nan"))
        acf_rows.append(row)
    files = [
        write_rows_atomic(
            config.out_dir / "acf.csv",
            ["lag", "rho_ret", "rho_abs", "rho_sq"],
            acf_rows,
        )
    ]

    vol = volatility_index(panel)
    files.append(
        write_rows_atomic(
            config.out_dir / "volatility_index.csv",
            ["t", "I"],
            zip(vol.t, vol.values),
        )
    )

    degenerate = [int(k) for k in np.flatnonzero(values.std(axis=1) == 0.0)]
    keep = [k for k in range(panel.n_assets) if k not in degenerate]
    pooled = None
    hist_rows = []
    if keep:
        normalized = normalize_returns(values[keep])
        stats = distribution_stats(
            normalized,
            pooled=True,
            bins=analysis.hist_bins,
            bin_range=analysis.hist_range,
        )
        pooled = {
            "count": stats.count,
            "mean": stats.mean,
            "variance": stats.variance,
            "skewness": stats.skewness,
            "kurtosis": stats.kurtosis,
        }
        hist_rows = list(zip(stats.histogram.centers, stats.histogram.density))
    files.append(
        write_rows_atomic(config.out_dir / "histogram.csv", ["bin_center", "density"], hist_rows)
    )

    moments = {
        "pooled": pooled,
        "degenerate_assets": degenerate,
        "noise_band": float(noise_band),
        "acf_assets_used": assets_used,
        "tau_int": {
            mode: _tau_block(
                data[keep] if keep else data,
                keep if keep else list(range(panel.n_assets)),
                analysis.tau_window_factor,
            )
            for mode, data in mode_values.items()
        },
        "histogram": {"bins": analysis.hist_bins, "range": analysis.hist_range},
    }
    files += _write_summary(config, "moments", moments)
    if degenerate:
        _say(f"analyze: degenerate assets {degenerate}")
    return files


def _mode_matrices(config: ExperimentConfig, panel, mode: str):
    spec = WindowSpec(
        window=config.window.window,
        stride=config.window.stride,
        mode=mode,
        normalization=config.window.normalization,
    )
    return spec, rolling_correlations(panel, spec)


def cmd_xcorr(config: ExperimentConfig, panel_path=None) -> list[Path]:
    panel_path = Path(panel_path) if panel_path else config.out_dir / "panel.csv"
    panel = read_panel_csv(panel_path)
    files = []
    for mode in MODES:
        spec, matrices = _mode_matrices(config, panel, mode)
        matrix_files = []
        if config.save_matrices:
            matrix_dir = config.out_dir / "matrices" / mode
            for matrix in matrices:
                matrix_files.append(
                    write_matrix_csv(matrix_dir / f"corr_{matrix.window_end}.csv", matrix.entries)
                )
        payload = {
            "mode": mode,
            "window": spec.window,
            "stride": spec.stride,
            "normalization": spec.normalization,
            "window_ends": [m.window_end for m in matrices],
            "degenerate_windows": {
                str(m.window_end): list(m.degenerate_assets)
                for m in matrices
                if m.degenerate_assets
            },
            "matrix_files": [str(p) for p in matrix_files],
        }
        files.append(write_json_atomic(config.out_dir / f"xcorr_{mode}.json", payload))
        files += matrix_files
        flagged = sum(1 for m in matrices if m.degenerate_assets)
        _say(f"xcorr[{mode}]: {len(matrices)} windows, {flagged} with degenerate assets")
    return files


def cmd_spectra(config: ExperimentConfig, panel_path=None) -> list[Path]:
    panel_path = Path(panel_path) if panel_path else config.out_dir / "panel.csv"
    panel = read_panel_csv(panel_path)
    if panel.t_len < config.window.window:
        raise ValueError(
            f"panel length {panel.t_len} is shorter than window {config.window.window}"
        )
    top_m = min(config.analysis.top_m, panel.n_assets)
    files = []
    mp = None
    for mode in MODES:
        spec, matrices = _mode_matrices(config, panel, mode)
        trajectory = spectral_trajectory(matrices, top_m=top_m, window_len=spec.window)
        mp = trajectory.mp or mp

        crf_header = ["window_end"] + [f"CRF{m}" for m in range(1, top_m + 1)]
        crf_rows = [
            [s.window_end, *[float(c) for c in s.crf[:top_m]]]
            for s in trajectory.summaries
        ]
        files.append(
            write_rows_atomic(config.out_dir / f"crf_{mode}.csv", crf_header, crf_rows)
        )

        ipr_rows = [
            [s.window_end, float(s.ipr[0]), float(s.ipr6[0])]
            for s in trajectory.summaries
        ]
        files.append(
            write_rows_atomic(
                config.out_dir / f"ipr_{mode}.csv",
                ["window_end", "IPR1", "IPR6_1"],
                ipr_rows,
            )
        )

        files.append(
            write_rows_atomic(
                config.out_dir / f"ipr_scatter_{mode}.csv",
                ["window_end", "l", "lambda", "ipr"],
                trajectory.scatter_rows(),
            )
        )

        payload = {
            "mode": mode,
            "window": spec.window,
            "stride": spec.stride,
            "top_m": top_m,
            "degenerate_windows": {
                str(s.window_end): list(s.degenerate_assets)
                for s in trajectory.summaries
                if s.degenerate_assets
            },
            "failures": [[end, msg] for end, msg in trajectory.failures],
            "mp": None
            if trajectory.mp is None
            else {
                "q": trajectory.mp.q,
                "lambda_minus": trajectory.mp.lambda_minus,
                "lambda_plus": trajectory.mp.lambda_plus,
            },
        }
        files.append(write_json_atomic(config.out_dir / f"spectra_{mode}.json", payload))
        _say(
            f"spectra[{mode}]: {len(trajectory.summaries)} windows, "
            f"{len(trajectory.failures)} failures"
        )

    if mp is not None:
        lam, rho = mp.sample(512)
        files.append(
            write_rows_atomic(
                config.out_dir / "mp_reference.csv", ["lambda", "rho"], zip(lam, rho)
            )
        )
    return files


PIPELINE_STAGES = (
    ("generate-coupling", cmd_generate_coupling),
    ("simulate", cmd_simulate),
    ("analyze", cmd_analyze),
    ("spectra", cmd_spectra),
)


def cmd_pipeline(config: ExperimentConfig) -> list[Path]:
    manifest = _prepare_out(config)
    all_files = []
    for name, stage in PIPELINE_STAGES:
        started = time.perf_counter()
        try:
            files = stage(config)
        except Exception as exc:
            manifest.record_failure(name, f"{type(exc).__name__}: {exc}")
            raise
        manifest.record(name, files, time.perf_counter() - started)
        all_files += files
    return all_files


def cmd_validate(config: ExperimentConfig) -> list[str]:
    warnings = config.validate()
    model = config.model
    print(f"config ok (hash {config_hash(config)[:12]})")
    print(f"model: {model.n_assets} assets on {model.side}x{model.side} lattices "
          f"({model.sites} sites each)")
    print(f"sweeps: {model.therm_sweeps} thermalization + {model.collect_sweeps} collected")
    ends = (model.collect_sweeps - config.window.window) // config.window.stride + 1
    print(f"windows: {ends} of length {config.window.window}, stride {config.window.stride}")
    if config.window.window > model.n_assets:
        mp = mp_reference(config.window.window, model.n_assets)
        print(
            f"marchenko-pastur: Q={mp.q:.4g} "
            f"lambda=[{mp.lambda_minus:.6g}, {mp.lambda_plus:.6g}]"
        )
    for warning in warnings:
        print(f"warning: {warning}")
    return warnings


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI config file")
    common.add_argument("--seed", type=int, metavar="U64", help="override master seed")
    common.add_argument("--threads", type=int, metavar="N", help="worker threads")
    common.add_argument(
        "--preset", choices=("paper", "desk"), default="paper", help="base parameter set"
    )
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--panel", metavar="PATH", help="input panel CSV (analysis stages)")
    common.add_argument(
        "--save-matrices", action="store_true", help="persist per-window matrices (xcorr)"
    )

    parser = argparse.ArgumentParser(
        prog="spinmarket",
        description="Coupled spin-lattice market simulator and analysis pipeline",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("generate-coupling", "draw and persist the cross-asset interaction matrix"),
        ("simulate", "run the lattice simulation and write the return panel"),
        ("analyze", "ACF, moments, histogram and volatility index from a panel"),
        ("xcorr", "rolling cross-correlation matrices from a panel"),
        ("spectra", "eigenvalue trajectories, CRF, IPR and the MP reference"),
        ("pipeline", "generate-coupling, simulate, analyze and spectra in sequence"),
        ("validate", "check a configuration without running anything"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def config_from_args(args) -> ExperimentConfig:
    overrides: dict[str, dict[str, str]] = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        overrides.setdefault("model", {})["seed"] = str(args.seed)
    if args.threads is not None:
        overrides.setdefault("run", {})["threads"] = str(args.threads)
    if args.out is not None:
        overrides.setdefault("output", {})["dir"] = args.out
    if args.save_matrices:
        overrides.setdefault("output", {})["save_matrices"] = "true"
    config = build_config(
        preset=args.preset, config_file=args.config, overrides=overrides
    )
    config.validate()
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        _say(f"config error: {exc}")
        return 2

    single_stage = {
        "generate-coupling": cmd_generate_coupling,
        "simulate": cmd_simulate,
        "analyze": cmd_analyze,
        "xcorr": cmd_xcorr,
        "spectra": cmd_spectra,
    }
    try:
        if args.command == "validate":
            cmd_validate(config)
        elif args.command == "pipeline":
            cmd_pipeline(config)
        else:
            stage = single_stage[args.command]
            manifest = _prepare_out(config)
            started = time.perf_counter()
            try:
                if args.command in ("analyze", "xcorr", "spectra"):
                    files = stage(config, panel_path=args.panel)
                else:
                    files = stage(config)
            except Exception as exc:
                manifest.record_failure(args.command, f"{type(exc).__name__}: {exc}")
                raise
            manifest.record(args.command, files, time.perf_counter() - started)
    except ConfigError as exc:
        _say(f"config error: {exc}")
        return 2
    except Exception as exc:
        _say(f"error: {type(exc).__name__}: {exc}")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
