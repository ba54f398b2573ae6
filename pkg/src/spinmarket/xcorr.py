"""Rolling equal-time cross-correlation matrices over a return panel.

Each window of length M ending at t normalizes every asset over the window
(window-local mean and population std) and forms C = m m^T / M. Window-local
normalization gives an exact unit diagonal, which the spectral analysis
relies on (trace = N). The literal composition with full-series
normalization is available as `normalization="global"`; its diagonal is
then only approximately 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import ReturnPanel

MODES = ("return", "absolute")
NORMALIZATIONS = ("window", "global")


@dataclass(frozen=True)
class WindowSpec:
    window: int = 400
    stride: int = 400
    mode: str = "return"
    normalization: str = "window"

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


@dataclass
class CorrelationMatrix:
    """One window's correlation matrix; degenerate assets are flagged.

    A degenerate asset (zero variance inside the window) keeps a unit
    diagonal entry and zero off-diagonals so the batch can continue.
    """

    window_end: int
    entries: np.ndarray
    degenerate_assets: tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def window_ends(t_len: int, window: int, stride: int) -> list[int]:
    """1-based end indices M, M+stride, ... <= T."""
    if window > t_len:
        return []
    return list(range(window, t_len + 1, stride))


def _window_matrix(block: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    mean = block.mean(axis=1, keepdims=True)
    sd = block.std(axis=1, keepdims=True)
    degenerate = np.flatnonzero(sd[:, 0] == 0.0)
    safe = np.where(sd == 0.0, 1.0, sd)
    m = (block - mean) / safe
    if degenerate.size:
        m[degenerate] = 0.0
    corr = (m @ m.T) / window
    return corr, degenerate


def rolling_correlations(panel: ReturnPanel | np.ndarray, spec: WindowSpec) -> list[CorrelationMatrix]:
    """Correlation matrix per window end, in time order.

    In absolute mode the panel is transformed element-wise to |R| first.
    Matrices are explicitly symmetrized (half the roundoff of the BLAS
    product) and degenerate assets get zeroed rows/columns with a unit
    diagonal plus an entry in `degenerate_assets`.
    """
    values = panel.values if isinstance(panel, ReturnPanel) else np.asarray(panel, dtype=np.float64)
    t_len = values.shape[1]
    if spec.window > t_len:
        raise ValueError(f"window {spec.window} exceeds series length {t_len}")
    data = np.abs(values) if spec.mode == "absolute" else values

    global_degenerate = np.array([], dtype=np.int64)
    if spec.normalization == "global":
        mean = data.mean(axis=1, keepdims=True)
        sd = data.std(axis=1, keepdims=True)
        global_degenerate = np.flatnonzero(sd[:, 0] == 0.0)
        safe = np.where(sd == 0.0, 1.0, sd)
        data = (data - mean) / safe
        if global_degenerate.size:
            data[global_degenerate] = 0.0

    out: list[CorrelationMatrix] = []
    for end in window_ends(t_len, spec.window, spec.stride):
        block = data[:, end - spec.window : end]
        if spec.normalization == "window":
            corr, degenerate = _window_matrix(block, spec.window)
        else:
            corr = (block @ block.T) / spec.window
            degenerate = global_degenerate
        corr = 0.5 * (corr + corr.T)
        if degenerate.size:
            corr[degenerate, :] = 0.0
            corr[:, degenerate] = 0.0
            corr[degenerate, degenerate] = 1.0
        out.append(CorrelationMatrix(end, corr, tuple(int(a) for a in degenerate)))
    return out
