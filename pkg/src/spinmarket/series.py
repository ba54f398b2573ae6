"""Time-series statistics on simulated return panels.

Covers per-asset normalization, pooled distribution moments and histogram,
autocorrelation, the self-consistently windowed integrated autocorrelation
time, and the cross-sectional volatility index. Standard deviations use the
population convention (divisor T) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DegenerateSeriesError(ValueError):
    """A series (or panel row) has zero variance and cannot be normalized."""

    def __init__(self, asset: int | None = None, message: str | None = None):
        self.asset = asset
        if message is None:
            if asset is None:
                message = "series has zero variance"
            else:
                message = f"asset {asset} has zero variance"
        super().__init__(message)


class WindowSearchError(RuntimeError):
    """No self-consistent summation window below T/2 was found."""


@dataclass
class ReturnPanel:
    """N x T matrix of per-sweep returns, one row per asset."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("panel must be 2-dimensional (assets x time)")
        if self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise ValueError("panel must be non-empty")
        amax = float(np.abs(self.values).max())
        if not np.isfinite(amax) or amax > 1.0:
            raise ValueError("returns must lie in [-1, 1]")

    @property
    def n_assets(self) -> int:
        return self.values.shape[0]

    @property
    def t_len(self) -> int:
        return self.values.shape[1]


def degenerate_assets(values: np.ndarray) -> list[int]:
    """Indices of rows with zero population variance."""
    values = np.asarray(values, dtype=np.float64)
    sd = values.std(axis=1)
    return [int(k) for k in np.flatnonzero(sd == 0.0)]


def normalize_returns(panel: ReturnPanel | np.ndarray) -> np.ndarray:
    """Center each row by its mean and scale by its population std.

    Raises DegenerateSeriesError naming the first zero-variance asset.
    """
    values = panel.values if isinstance(panel, ReturnPanel) else np.asarray(panel, dtype=np.float64)
    mean = values.mean(axis=1, keepdims=True)
    sd = values.std(axis=1, keepdims=True)
    bad = np.flatnonzero(sd[:, 0] == 0.0)
    if bad.size:
        raise DegenerateSeriesError(int(bad[0]))
    return (values - mean) / sd


@dataclass
class Histogram:
    centers: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    bin_width: float
    total: int


@dataclass
class DistributionStats:
    count: int
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    histogram: Histogram


def _histogram(x: np.ndarray, bins: int, bin_range: float) -> Histogram:
    edges = np.linspace(-bin_range, bin_range, bins + 1)
    # out-of-range samples accumulate in the two edge bins
    clipped = np.clip(x, edges[0], edges[-1])
    counts, _ = np.histogram(clipped, edges)
    width = edges[1] - edges[0]
    total = int(x.size)
    density = counts / (total * width) if total else counts.astype(float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return Histogram(centers, counts, density, float(width), total)


def _stats_1d(x: np.ndarray, bins: int, bin_range: float) -> DistributionStats:
    if x.size == 0:
        raise ValueError("empty sample")
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d * d))
    if m2 == 0.0:
        raise DegenerateSeriesError(message="sample has zero variance")
    m3 = float(np.mean(d**3))
    m4 = float(np.mean(d**4))
    return DistributionStats(
        count=int(x.size),
        mean=mean,
        variance=m2,
        skewness=m3 / m2**1.5,
        kurtosis=m4 / m2**2,  # raw standardized 4th moment, Gaussian -> 3
        histogram=_histogram(x, bins, bin_range),
    )


def distribution_stats(
    normalized: np.ndarray,
    pooled: bool = True,
    bins: int = 81,
    bin_range: float = 10.0,
):
    """Moments and histogram of (normalized) returns.

    Pooled mode concatenates all rows into one sample; otherwise a list of
    per-asset results is returned. Kurtosis is the raw fourth standardized
    moment, so a Gaussian sample gives 3.
    """
    values = np.asarray(normalized, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty panel")
    if values.ndim == 1:
        values = values[None, :]
    if pooled:
        return _stats_1d(values.ravel(), bins, bin_range)
    return [_stats_1d(row, bins, bin_range) for row in values]


@dataclass
class AcfCurve:
    lags: np.ndarray
    rho: np.ndarray
    noise_band: float


def _centered(series) -> tuple[np.ndarray, float]:
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("series must be 1-dimensional")
    d = x - x.mean()
    c0 = float(d @ d)
    return d, c0


def acf(series, max_lag: int) -> AcfCurve:
    """Biased autocorrelation estimator (lag-0 denominator), rho[0] = 1.

    rho[l] = sum_t d_t d_{t+l} / sum_t d_t^2 with the full-series mean
    removed; the lag-0 denominator keeps |rho| <= 1.
    """
    d, c0 = _centered(series)
    t_len = d.size
    if not 1 <= max_lag < t_len:
        raise ValueError(f"max_lag must satisfy 1 <= max_lag < {t_len}")
    if c0 == 0.0:
        raise DegenerateSeriesError()
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    for lag in range(1, max_lag + 1):
        rho[lag] = float(d[:-lag] @ d[lag:]) / c0
    return AcfCurve(np.arange(max_lag + 1), rho, 1.96 / math.sqrt(t_len))


def mean_acf(values: np.ndarray, max_lag: int) -> AcfCurve:
    """Cross-asset mean of per-asset autocorrelations, skipping degenerate rows."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[None, :]
    curves = []
    for row in values:
        try:
            curves.append(acf(row, max_lag).rho)
        except DegenerateSeriesError:
            continue
    if not curves:
        raise DegenerateSeriesError(message="all rows have zero variance")
    rho = np.mean(curves, axis=0)
    rho[0] = 1.0
    return AcfCurve(np.arange(max_lag + 1), rho, 1.96 / math.sqrt(values.shape[1]))


@dataclass
class TauIntEstimate:
    tau: float
    error: float
    window: int


def integrated_autocorr_time(series, c: float = 5.0) -> TauIntEstimate:
    """Integrated autocorrelation time with a self-consistent window.

    tau(W) = 1/2 + sum_{l=1..W} rho[l]; the window is the smallest W with
    W >= c * tau(W). The error estimate is sqrt((4W+2)/T) * tau.
    """
    d, c0 = _centered(series)
    t_len = d.size
    if c0 == 0.0:
        raise DegenerateSeriesError()
    tau = 0.5
    max_window = t_len // 2
    for window in range(1, max_window + 1):
        tau += float(d[:-window] @ d[window:]) / c0
        if window >= c * tau:
            error = math.sqrt((4.0 * window + 2.0) / t_len) * tau
            return TauIntEstimate(tau=tau, error=error, window=window)
    raise WindowSearchError(
        f"no self-consistent window below T/2 = {max_window} (c = {c})"
    )


@dataclass
class VolatilityIndexSeries:
    """Cross-asset mean absolute return per time step."""

    t: np.ndarray
    values: np.ndarray


def volatility_index(panel: ReturnPanel | np.ndarray) -> VolatilityIndexSeries:
    values = panel.values if isinstance(panel, ReturnPanel) else np.asarray(panel, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty panel")
    index = np.abs(values).mean(axis=0)
    return VolatilityIndexSeries(t=np.arange(1, values.shape[1] + 1), values=index)


def shuffled_panel(panel: ReturnPanel, seed: int) -> ReturnPanel:
    """Null model: permute each asset's series independently in time.

    Destroys cross-asset equal-time correlation while keeping each marginal
    distribution, so correlation spectra should follow Wishart statistics.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    out = np.empty_like(panel.values)
    for k in range(panel.n_assets):
        out[k] = panel.values[k, rng.permutation(panel.t_len)]
    return ReturnPanel(out)
