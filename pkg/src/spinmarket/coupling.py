"""Cross-asset interaction matrix: generation, validation, persistence.

The interaction strengths form an n x n matrix with zero diagonal. A sparse
fraction of the off-diagonal entries (10% by default) is drawn from a
Gaussian; the rest stay zero. Entries are directional, so the matrix is not
symmetric unless `symmetrize` is requested, and negative draws are kept.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .io import fmt, write_rows_atomic


@dataclass(frozen=True)
class CouplingSpec:
    """Recipe for a random interaction matrix, deterministic in `seed`."""

    n_assets: int
    density: float = 0.10
    mean: float = 0.05
    variance: float = 0.01
    seed: int = 0
    symmetrize: bool = False

    def __post_init__(self):
        if self.n_assets < 1:
            raise ValueError("n_assets must be >= 1")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must be in [0, 1]")
        if self.variance < 0.0:
            raise ValueError("variance must be >= 0")


@dataclass
class CouplingMatrix:
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError("coupling matrix must be square")
        if self.entries.shape[0] < 1:
            raise ValueError("coupling matrix must be at least 1x1")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass
class CouplingDiagnostics:
    n: int
    nonzero_count: int
    nonzero_min: float | None
    nonzero_max: float | None
    nonzero_mean: float | None
    diagonal_ok: bool

    @property
    def passed(self) -> bool:
        return self.diagonal_ok

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "nonzero_count": self.nonzero_count,
            "nonzero_min": self.nonzero_min,
            "nonzero_max": self.nonzero_max,
            "nonzero_mean": self.nonzero_mean,
            "diagonal_ok": self.diagonal_ok,
            "passed": self.passed,
        }


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def generate_coupling(spec: CouplingSpec) -> CouplingMatrix:
    """Draw the interaction matrix described by `spec`.

    Exactly round(density * n * (n-1)) off-diagonal positions are selected
    uniformly without replacement and filled with independent draws from
    Normal(mean, variance). `variance` is a variance, not a standard
    deviation. With `symmetrize`, unordered pairs are selected instead
    (round(density * n * (n-1) / 2) of them) and each pair shares one draw,
    which keeps the overall nonzero budget while making the matrix symmetric.
    """
    n = spec.n_assets
    rng = _rng(spec.seed)
    sd = math.sqrt(spec.variance)
    entries = np.zeros((n, n), dtype=np.float64)
    if n == 1:
        return CouplingMatrix(entries)

    if spec.symmetrize:
        n_pairs = n * (n - 1) // 2
        count = int(round(spec.density * n * (n - 1) / 2.0))
        chosen = rng.choice(n_pairs, size=count, replace=False)
        chosen.sort()
        iu, ju = np.triu_indices(n, k=1)
        values = rng.normal(spec.mean, sd, size=count)
        entries[iu[chosen], ju[chosen]] = values
        entries[ju[chosen], iu[chosen]] = values
    else:
        n_slots = n * (n - 1)
        count = int(round(spec.density * n_slots))
        chosen = rng.choice(n_slots, size=count, replace=False)
        chosen.sort()
        rows = chosen // (n - 1)
        rem = chosen % (n - 1)
        cols = np.where(rem < rows, rem, rem + 1)  # skip the diagonal slot
        entries[rows, cols] = rng.normal(spec.mean, sd, size=count)
    return CouplingMatrix(entries)


def validate_coupling(gamma: CouplingMatrix) -> CouplingDiagnostics:
    """Report matrix shape, nonzero statistics and the zero-diagonal check.

    A nonzero diagonal is reported as a failed check, not raised.
    """
    entries = gamma.entries
    mask = entries != 0.0
    off = entries[mask]
    diagonal_ok = bool(np.all(np.diag(entries) == 0.0))
    if off.size:
        return CouplingDiagnostics(
            n=gamma.n,
            nonzero_count=int(off.size),
            nonzero_min=float(off.min()),
            nonzero_max=float(off.max()),
            nonzero_mean=float(off.mean()),
            diagonal_ok=diagonal_ok,
        )
    return CouplingDiagnostics(gamma.n, 0, None, None, None, diagonal_ok)


# -- persistence ---------------------------------------------------------------

def write_coupling_dense(gamma: CouplingMatrix, path) -> Path:
    """Dense CSV with header `g0..g{n-1}` and one row per source asset."""
    header = [f"g{k}" for k in range(gamma.n)]
    return write_rows_atomic(path, header, (tuple(row) for row in gamma.entries))


def write_coupling_sparse(gamma: CouplingMatrix, path) -> Path:
    """Sparse text format: an `n=<N>` line, then `j,k,value` triplets."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = Path(str(path) + ".partial")
    rows, cols = np.nonzero(gamma.entries)
    with open(partial, "w", newline="\n") as fh:
        fh.write(f"n={gamma.n}\n")
        fh.write("j,k,value\n")
        for j, k in zip(rows, cols):
            fh.write(f"{j},{k},{fmt(gamma.entries[j, k])}\n")
    os.replace(partial, path)
    return path


def read_coupling_dense(path) -> CouplingMatrix:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return CouplingMatrix(data)


def read_coupling_sparse(path) -> CouplingMatrix:
    with open(path) as fh:
        first = fh.readline().strip()
        if not first.startswith("n="):
            raise ValueError(f"sparse coupling file must start with 'n=<N>': {path}")
        n = int(first[2:])
        header = fh.readline().strip()
        if header != "j,k,value":
            raise ValueError(f"unexpected sparse coupling header: {header!r}")
        entries = np.zeros((n, n), dtype=np.float64)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            j_s, k_s, v_s = line.split(",")
            entries[int(j_s), int(k_s)] = float(v_s)
    return CouplingMatrix(entries)


def read_coupling(path) -> CouplingMatrix:
    """Load either persistence format, sniffing the first line."""
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("n="):
        return read_coupling_sparse(path)
    return read_coupling_dense(path)
