"""Spectral analysis of correlation matrices.

Full symmetric eigendecomposition, cumulative risk fraction (share of total
variance carried by the top eigenvalues), the Marchenko-Pastur reference
spectrum for the matching window shape, and the inverse participation
ratios IPR = sum v^4 and IPR6 = sum v^6 that measure eigenvector
localization (delocalized baselines 3/N and 15/N^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .xcorr import CorrelationMatrix

EIGEN_GAP_TOL = 1e-10
SYMMETRY_TOL = 1e-9
NORM_TOL = 1e-6


class AsymmetricMatrixError(ValueError):
    """Input matrix deviates from symmetry beyond tolerance."""


class EigenDecompositionError(RuntimeError):
    """The eigensolver failed to converge."""


def _entries(matrix: CorrelationMatrix | np.ndarray) -> np.ndarray:
    if isinstance(matrix, CorrelationMatrix):
        return matrix.entries
    return np.asarray(matrix, dtype=np.float64)


def eig_sym(matrix: CorrelationMatrix | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns).

    Ties keep the solver's original order. Each eigenvector's sign is fixed
    by making its largest-magnitude component positive, so stored vectors
    are reproducible.
    """
    a = _entries(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    asym = float(np.abs(a - a.T).max()) if a.size else 0.0
    if asym > SYMMETRY_TOL:
        raise AsymmetricMatrixError(f"matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(str(exc)) from exc
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return values, vectors * signs


def crf(eigenvalues: np.ndarray, m: int) -> float:
    """Share of total variance in the top m eigenvalues (sorted descending)."""
    values = np.asarray(eigenvalues, dtype=np.float64)
    n = values.size
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}]")
    return float(values[:m].sum() / values.sum())


def crf_curve(eigenvalues: np.ndarray) -> np.ndarray:
    values = np.asarray(eigenvalues, dtype=np.float64)
    return np.cumsum(values) / values.sum()


@dataclass(frozen=True)
class MpReference:
    """Marchenko-Pastur spectrum for window length T and N assets, Q = T/N > 1."""

    q: float
    lambda_minus: float
    lambda_plus: float

    def density(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        inside = (lam > self.lambda_minus) & (lam < self.lambda_plus)
        rho = np.zeros_like(lam)
        lam_in = lam[inside]
        rho[inside] = (
            self.q
            / (2.0 * np.pi)
            * np.sqrt((self.lambda_plus - lam_in) * (lam_in - self.lambda_minus))
            / lam_in
        )
        return rho

    def sample(self, num: int = 512) -> tuple[np.ndarray, np.ndarray]:
        lam = np.linspace(self.lambda_minus, self.lambda_plus, num)
        return lam, self.density(lam)


def mp_reference(t_window: int, n_assets: int) -> MpReference:
    """Edges lambda_pm = 1 + 1/Q +- 2 sqrt(1/Q); rejects Q <= 1."""
    if n_assets < 1 or t_window < 1:
        raise ValueError("t_window and n_assets must be >= 1")
    q = t_window / n_assets
    if q <= 1.0:
        raise ValueError(f"Q = T/N = {q:.4g} must exceed 1")
    inv = 1.0 / q
    lam_minus = 1.0 + inv - 2.0 * math.sqrt(inv)
    lam_plus = 1.0 + inv + 2.0 * math.sqrt(inv)
    return MpReference(q=q, lambda_minus=lam_minus, lambda_plus=lam_plus)


def _check_unit_norm(vector: np.ndarray) -> np.ndarray:
    v = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"vector norm {norm} deviates from 1 beyond {NORM_TOL}")
    return v


def ipr(vector: np.ndarray) -> float:
    """Sum of 4th powers of the components of a unit vector."""
    v = _check_unit_norm(vector)
    return float(np.sum(v**4))


def ipr6(vector: np.ndarray) -> float:
    """Sum of 6th powers of the components of a unit vector."""
    v = _check_unit_norm(vector)
    return float(np.sum(v**6))


@dataclass
class SpectralSummary:
    """One window's spectrum and derived statistics.

    `non_unique[l]` marks eigenvectors adjacent to a near-degenerate
    eigenvalue gap (< 1e-10), where the IPR is basis-dependent.
    """

    window_end: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    crf: np.ndarray
    ipr: np.ndarray
    ipr6: np.ndarray
    non_unique: np.ndarray
    degenerate_assets: tuple[int, ...] = ()


@dataclass
class SpectralTrajectory:
    summaries: list[SpectralSummary]
    failures: list[tuple[int, str]]
    top_m: int
    mp: MpReference | None

    def scatter_rows(self):
        """(window_end, component l, eigenvalue, IPR) for l = 1..top_m."""
        for summary in self.summaries:
            count = min(self.top_m, summary.eigenvalues.size)
            for l in range(count):
                yield (
                    summary.window_end,
                    l + 1,
                    float(summary.eigenvalues[l]),
                    float(summary.ipr[l]),
                )


def summarize_window(matrix: CorrelationMatrix, top_m: int = 5) -> SpectralSummary:
    values, vectors = eig_sym(matrix)
    n = values.size
    powers4 = np.sum(vectors**4, axis=0)
    powers6 = np.sum(vectors**6, axis=0)
    gaps = -np.diff(values)
    non_unique = np.zeros(n, dtype=bool)
    if n > 1:
        tight = gaps < EIGEN_GAP_TOL
        non_unique[:-1] |= tight
        non_unique[1:] |= tight
    return SpectralSummary(
        window_end=matrix.window_end,
        eigenvalues=values,
        eigenvectors=vectors,
        crf=crf_curve(values),
        ipr=powers4,
        ipr6=powers6,
        non_unique=non_unique,
        degenerate_assets=matrix.degenerate_assets,
    )


def spectral_trajectory(
    matrices: list[CorrelationMatrix],
    top_m: int = 5,
    window_len: int | None = None,
) -> SpectralTrajectory:
    """Per-window spectra; eigensolver failures are recorded, not raised.

    When `window_len` is given and T/N > 1 the matching Marchenko-Pastur
    reference is attached.
    """
    if not matrices:
        return SpectralTrajectory([], [], top_m, None)
    n = matrices[0].n
    if any(m.n != n for m in matrices):
        raise ValueError("all windows must have the same asset count")
    mp = None
    if window_len is not None and window_len > n:
        mp = mp_reference(window_len, n)
    summaries: list[SpectralSummary] = []
    failures: list[tuple[int, str]] = []
    for matrix in matrices:
        try:
            summaries.append(summarize_window(matrix, top_m=top_m))
        except (EigenDecompositionError, AsymmetricMatrixError, ValueError) as exc:
            failures.append((matrix.window_end, str(exc)))
    return SpectralTrajectory(summaries, failures, top_m, mp)
