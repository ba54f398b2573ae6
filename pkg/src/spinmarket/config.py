"""Experiment configuration: presets, INI files, flag overrides, hashing.

A configuration is a flat sectioned key/value file (INI syntax). The `paper`
preset is the shipped default, so a bare `pipeline` run reproduces the
full-scale setup (side 100, 300 assets, 5000 + 30000 sweeps, window 400);
the `desk` preset is a laptop-sized variant used by the test suite.
Precedence: preset < config file < command-line flags.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path

from .coupling import CouplingSpec
from .io import fmt
from .market import ModelParams
from .xcorr import WindowSpec


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


PRESETS: dict[str, dict[str, dict[str, str]]] = {
    "paper": {
        "model": {
            "side": "100",
            "assets": "300",
            "j": "1.0",
            "alpha": "60.0",
            "beta": "2.3",
            "therm_sweeps": "5000",
            "collect_sweeps": "30000",
            "seed": "12345",
        },
        "coupling": {
            "density": "0.10",
            "mean": "0.05",
            "variance": "0.01",
            "symmetrize": "false",
        },
        "window": {
            "length": "400",
            "stride": "400",
            "normalization": "window",
        },
        "analysis": {
            "max_lag": "200",
            "top_m": "5",
            "hist_bins": "81",
            "hist_range": "10.0",
            "tau_window_factor": "5.0",
        },
        "output": {
            "dir": "out",
            "save_matrices": "false",
            "formats": "csv,json",
        },
        "run": {
            "threads": "1",
        },
    },
}

PRESETS["desk"] = {
    section: dict(values) for section, values in PRESETS["paper"].items()
}
PRESETS["desk"]["model"].update(
    side="32", assets="20", therm_sweeps="1000", collect_sweeps="10000"
)
PRESETS["desk"]["window"].update(length="200", stride="200")


@dataclass(frozen=True)
class AnalysisParams:
    max_lag: int = 200
    top_m: int = 5
    hist_bins: int = 81
    hist_range: float = 10.0
    tau_window_factor: float = 5.0

    def __post_init__(self):
        if self.max_lag < 1:
            raise ValueError("max_lag must be >= 1")
        if self.top_m < 1:
            raise ValueError("top_m must be >= 1")
        if self.hist_bins < 1:
            raise ValueError("hist_bins must be >= 1")
        if self.hist_range <= 0:
            raise ValueError("hist_range must be > 0")
        if self.tau_window_factor <= 0:
            raise ValueError("tau_window_factor must be > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    coupling: CouplingSpec
    window: WindowSpec
    analysis: AnalysisParams
    out_dir: Path
    coupling_path: Path | None = None
    formats: tuple[str, ...] = ("csv", "json")
    threads: int = 1
    save_matrices: bool = False

    def validate(self) -> list[str]:
        """Cross-module checks; returns warnings, raises ConfigError on errors."""
        problems = []
        warnings = []
        if self.window.window > self.model.collect_sweeps:
            problems.append(
                f"window length {self.window.window} exceeds collected sweeps "
                f"{self.model.collect_sweeps}"
            )
        if self.analysis.max_lag >= self.model.collect_sweeps:
            problems.append(
                f"max_lag {self.analysis.max_lag} must be below collected sweeps "
                f"{self.model.collect_sweeps}"
            )
        if self.analysis.top_m > self.model.n_assets:
            problems.append(
                f"top_m {self.analysis.top_m} exceeds asset count {self.model.n_assets}"
            )
        if self.threads < 1:
            problems.append("threads must be >= 1")
        if self.coupling_path is not None and not self.coupling_path.exists():
            problems.append(f"coupling path does not exist: {self.coupling_path}")
        for item in self.formats:
            if item not in ("csv", "json"):
                problems.append(f"unknown output format: {item}")
        if self.window.window <= self.model.n_assets:
            warnings.append(
                "window length <= asset count (Q <= 1): no Marchenko-Pastur "
                "reference will be emitted"
            )
        if problems:
            raise ConfigError("; ".join(problems))
        return warnings


def _merge(base: dict[str, dict[str, str]], extra: dict[str, dict[str, str]]):
    for section, values in extra.items():
        base.setdefault(section, {}).update(values)


def _parse_bool(text: str, label: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{label} must be a boolean, got {text!r}")


def _get(raw, section, key, convert, label=None):
    label = label or f"[{section}] {key}"
    text = raw[section][key]
    try:
        if convert is bool:
            return _parse_bool(text, label)
        return convert(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: {exc}") from exc


def read_config_file(path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return {section: dict(parser[section]) for section in parser.sections()}


def build_config(
    preset: str = "paper",
    config_file=None,
    overrides: dict[str, dict[str, str]] | None = None,
) -> ExperimentConfig:
    """Assemble an ExperimentConfig from preset, optional file and overrides."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r} (choose from {sorted(PRESETS)})")
    raw = {section: dict(values) for section, values in PRESETS[preset].items()}
    if config_file is not None:
        file_values = read_config_file(config_file)
        known = set(raw)
        for section in file_values:
            if section not in known:
                raise ConfigError(f"unknown config section [{section}]")
            unknown_keys = set(file_values[section]) - set(raw[section]) - {"seed", "path"}
            if unknown_keys:
                raise ConfigError(
                    f"unknown keys in [{section}]: {', '.join(sorted(unknown_keys))}"
                )
        _merge(raw, file_values)
    if overrides:
        _merge(raw, overrides)

    try:
        model = ModelParams(
            side=_get(raw, "model", "side", int),
            n_assets=_get(raw, "model", "assets", int),
            j=_get(raw, "model", "j", float),
            alpha=_get(raw, "model", "alpha", float),
            beta=_get(raw, "model", "beta", float),
            therm_sweeps=_get(raw, "model", "therm_sweeps", int),
            collect_sweeps=_get(raw, "model", "collect_sweeps", int),
            master_seed=_get(raw, "model", "seed", int),
        )
        coupling_seed = (
            _get(raw, "coupling", "seed", int)
            if "seed" in raw["coupling"]
            else model.master_seed
        )
        coupling = CouplingSpec(
            n_assets=model.n_assets,
            density=_get(raw, "coupling", "density", float),
            mean=_get(raw, "coupling", "mean", float),
            variance=_get(raw, "coupling", "variance", float),
            seed=coupling_seed,
            symmetrize=_get(raw, "coupling", "symmetrize", bool),
        )
        window = WindowSpec(
            window=_get(raw, "window", "length", int),
            stride=_get(raw, "window", "stride", int),
            normalization=raw["window"]["normalization"].strip(),
        )
        analysis = AnalysisParams(
            max_lag=_get(raw, "analysis", "max_lag", int),
            top_m=_get(raw, "analysis", "top_m", int),
            hist_bins=_get(raw, "analysis", "hist_bins", int),
            hist_range=_get(raw, "analysis", "hist_range", float),
            tau_window_factor=_get(raw, "analysis", "tau_window_factor", float),
        )
        coupling_path = raw["coupling"].get("path", "").strip() or None
        formats = tuple(
            item.strip() for item in raw["output"]["formats"].split(",") if item.strip()
        )
        config = ExperimentConfig(
            model=model,
            coupling=coupling,
            window=window,
            analysis=analysis,
            out_dir=Path(raw["output"]["dir"]),
            coupling_path=Path(coupling_path) if coupling_path else None,
            formats=formats,
            threads=_get(raw, "run", "threads", int),
            save_matrices=_get(raw, "output", "save_matrices", bool),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config


def canonical_text(config: ExperimentConfig) -> str:
    """Deterministic INI rendering used for hashing and `config_used.ini`."""
    sections = {
        "model": {
            "side": str(config.model.side),
            "assets": str(config.model.n_assets),
            "j": fmt(config.model.j),
            "alpha": fmt(config.model.alpha),
            "beta": fmt(config.model.beta),
            "therm_sweeps": str(config.model.therm_sweeps),
            "collect_sweeps": str(config.model.collect_sweeps),
            "seed": str(config.model.master_seed),
        },
        "coupling": {
            "density": fmt(config.coupling.density),
            "mean": fmt(config.coupling.mean),
            "variance": fmt(config.coupling.variance),
            "seed": str(config.coupling.seed),
            "symmetrize": str(config.coupling.symmetrize).lower(),
            **({"path": str(config.coupling_path)} if config.coupling_path else {}),
        },
        "window": {
            "length": str(config.window.window),
            "stride": str(config.window.stride),
            "normalization": config.window.normalization,
        },
        "analysis": {
            "max_lag": str(config.analysis.max_lag),
            "top_m": str(config.analysis.top_m),
            "hist_bins": str(config.analysis.hist_bins),
            "hist_range": fmt(config.analysis.hist_range),
            "tau_window_factor": fmt(config.analysis.tau_window_factor),
        },
        "output": {
            "dir": str(config.out_dir),
            "save_matrices": str(config.save_matrices).lower(),
            "formats": ",".join(config.formats),
        },
        "run": {
            "threads": str(config.threads),
        },
    }
    lines = []
    for section in sorted(sections):
        lines.append(f"[{section}]")
        for key in sorted(sections[section]):
            lines.append(f"{key} = {sections[section][key]}")
        lines.append("")
    return "\n".join(lines)


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_text(config).encode()).hexdigest()


def with_updates(config: ExperimentConfig, **kwargs) -> ExperimentConfig:
    return dataclasses.replace(config, **kwargs)
