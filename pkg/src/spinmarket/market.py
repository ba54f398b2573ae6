"""Coupled spin-lattice market dynamics.

Each of the N assets is an L x L lattice of +-1 agents with periodic
boundaries. Agent i of asset k feels the field

    h = J * sum_nn(s_j)  -  alpha * s_i * |M_k|  +  sum_j gamma[j, k] * M_j

where M_k is asset k's magnetization (mean spin). The first term imitates
neighbors, the second pushes agents toward the minority when the market is
one-sided, and the third imitates the other assets. Spins are redrawn by a
heat-bath rule: s_i becomes +1 with probability 1 / (1 + exp(-2 beta h)).

One sweep visits every site of every lattice exactly once, in a fresh
uniform permutation per lattice. Within a lattice the neighbor sum and the
own-lattice magnetization are read live (updated as spins flip), while the
cross-asset magnetizations are snapshotted at the start of the sweep. The
snapshot makes assets independent within a sweep, so they may be updated in
parallel, and per-asset counter-based RNG streams make the output identical
for any thread count. The per-sweep return of asset k is half the change of
its magnetization over the sweep.

Holding the own-lattice magnetization fixed over a whole sweep would make
the strongly one-sided state flip wholesale every sweep (for alpha > 4J the
flip probabilities saturate), locking the system into an exact period-2
orbit from the ordered start; reading it live lets the minority pressure
self-regulate at small |M|, which is where the interesting dynamics live.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coupling import CouplingMatrix
from .series import ReturnPanel

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False


@dataclass(frozen=True)
class ModelParams:
    """Simulation parameters. `sites` (= side^2) is always derived."""

    side: int
    n_assets: int
    j: float = 1.0
    alpha: float = 60.0
    beta: float = 2.3
    therm_sweeps: int = 5000
    collect_sweeps: int = 30000
    master_seed: int = 0

    def __post_init__(self):
        if self.side < 2:
            raise ValueError("side must be >= 2")
        if self.n_assets < 1:
            raise ValueError("n_assets must be >= 1")
        if self.beta <= 0.0:
            raise ValueError("beta must be > 0")
        if self.therm_sweeps < 0:
            raise ValueError("therm_sweeps must be >= 0")
        if self.collect_sweeps < 1:
            raise ValueError("collect_sweeps must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    @property
    def sites(self) -> int:
        return self.side * self.side


@dataclass
class SpinLattice:
    """One asset's grid, stored flat; every entry is exactly -1 or +1."""

    side: int
    spins: np.ndarray

    def __post_init__(self):
        self.spins = np.asarray(self.spins, dtype=np.int8)
        if self.spins.shape != (self.side * self.side,):
            raise ValueError("spins must be a flat array of side*side entries")
        if not np.all(np.abs(self.spins) == 1):
            raise ValueError("spins must be +-1")


@dataclass
class MarketState:
    """All lattices plus the sweep-start magnetization snapshot."""

    side: int
    spins: np.ndarray  # (n_assets, sites) int8
    mag_snapshot: np.ndarray  # (n_assets,) float64
    t: int = 0

    @property
    def n_assets(self) -> int:
        return self.spins.shape[0]

    @property
    def sites(self) -> int:
        return self.spins.shape[1]

    @property
    def lattices(self) -> list[SpinLattice]:
        return [SpinLattice(self.side, row) for row in self.spins]


@dataclass(frozen=True)
class RngPlan:
    """Per-asset counter-based streams derived from one master seed.

    Stream k is the k-th spawn of SeedSequence(master_seed), feeding a
    Philox generator, so draws for one asset never depend on how many
    threads process the others.
    """

    master_seed: int

    def asset_stream(self, k: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(k,))
        return np.random.Generator(np.random.Philox(seq))


def neighbor_table(side: int) -> np.ndarray:
    """Flat indices of the 4 torus neighbors (up, down, left, right) per site."""
    idx = np.arange(side * side)
    r, c = np.divmod(idx, side)
    up = ((r - 1) % side) * side + c
    down = ((r + 1) % side) * side + c
    left = r * side + (c - 1) % side
    right = r * side + (c + 1) % side
    return np.ascontiguousarray(np.stack([up, down, left, right], axis=1), dtype=np.int64)


def magnetization(lattice: SpinLattice | np.ndarray) -> float:
    """Mean spin; an exact ratio (integer sum) / sites."""
    spins = lattice.spins if isinstance(lattice, SpinLattice) else np.asarray(lattice)
    return int(spins.sum(dtype=np.int64)) / spins.size


def flip_probability(h: float, beta: float) -> float:
    """Heat-bath probability of the +1 state, 1/(1+exp(-2 beta h)).

    Computed on the sign-split form so large |h| saturates to 0 or 1 instead
    of overflowing.
    """
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    x = 2.0 * beta * h
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def local_field(
    k: int,
    i: int,
    state: MarketState,
    gamma: CouplingMatrix | np.ndarray,
    params: ModelParams,
) -> float:
    """Reference (non-hot-path) field at site i of asset k.

    Neighbor spins and the own-asset magnetization are read from the current
    lattice; the cross-asset term uses the sweep-start snapshot. The diagonal
    coupling entry is zero, so asset k's snapshot never feeds back here.
    """
    entries = gamma.entries if isinstance(gamma, CouplingMatrix) else np.asarray(gamma)
    if not 0 <= k < state.n_assets:
        raise IndexError(f"asset index {k} out of range")
    if not 0 <= i < state.sites:
        raise IndexError(f"site index {i} out of range")
    spins = state.spins[k]
    nbr = neighbor_table(state.side)
    neighbor_sum = int(spins[nbr[i]].sum(dtype=np.int64))
    own_mag = magnetization(spins)
    cross = float(entries[:, k] @ state.mag_snapshot)
    return params.j * neighbor_sum - params.alpha * float(spins[i]) * abs(own_mag) + cross


def _sweep_sites_impl(spins, nbr, perm, uniforms, j_nn, alpha, beta, cross, spin_sum, sites):
    """Visit the given permutation of sites once, heat-bath updating each.

    `spin_sum` tracks the integer sum of spins so the own-lattice
    magnetization is exact and updated live. Returns the final sum.
    """
    inv_sites = 1.0 / sites
    for q in range(perm.shape[0]):
        i = perm[q]
        neighbor_sum = (
            spins[nbr[i, 0]] + spins[nbr[i, 1]] + spins[nbr[i, 2]] + spins[nbr[i, 3]]
        )
        own_mag = spin_sum * inv_sites
        if own_mag < 0.0:
            own_mag = -own_mag
        h = j_nn * neighbor_sum - alpha * spins[i] * own_mag + cross
        x = 2.0 * beta * h
        if x >= 0.0:
            p = 1.0 / (1.0 + math.exp(-x))
        else:
            e = math.exp(x)
            p = e / (1.0 + e)
        target = 1 if uniforms[q] < p else -1
        if target != spins[i]:
            spin_sum += 2 * target
            spins[i] = target
    return spin_sum


if HAS_NUMBA:
    _sweep_sites = numba.njit(cache=True, nogil=True)(_sweep_sites_impl)
else:  # pragma: no cover - exercised only without numba
    _sweep_sites = _sweep_sites_impl


class MarketSimulation:
    """Mutable simulation of N coupled lattices.

    Lattices start fully ordered (all +1). `sweep()` returns the length-N
    vector of per-sweep returns. Thread parallelism only changes which
    worker updates which asset, never the numbers.
    """

    def __init__(
        self,
        params: ModelParams,
        gamma: CouplingMatrix | np.ndarray,
        threads: int = 1,
    ):
        entries = gamma.entries if isinstance(gamma, CouplingMatrix) else np.asarray(gamma, dtype=np.float64)
        n = params.n_assets
        if entries.shape != (n, n):
            raise ValueError(
                f"coupling matrix shape {entries.shape} does not match n_assets={n}"
            )
        if np.any(np.diag(entries) != 0.0):
            raise ValueError("coupling matrix must have a zero diagonal")
        if threads < 1:
            raise ValueError("threads must be >= 1")

        self.params = params
        self.threads = min(threads, n)
        self._sites = params.sites
        self._nbr = neighbor_table(params.side)
        self._spins = np.ones((n, self._sites), dtype=np.int8)
        self._sums = np.full(n, self._sites, dtype=np.int64)
        self._gamma_cols = np.ascontiguousarray(entries.T)  # row k holds gamma[:, k]
        self._streams = [RngPlan(params.master_seed).asset_stream(k) for k in range(n)]
        self._mag_snapshot = self._sums / float(self._sites)
        self.t = 0
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None
        self._blocks = [
            block for block in np.array_split(np.arange(n), self.threads) if block.size
        ]

    # context manager so the worker pool is always released
    def __enter__(self) -> "MarketSimulation":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    @property
    def state(self) -> MarketState:
        return MarketState(
            side=self.params.side,
            spins=self._spins,
            mag_snapshot=self._mag_snapshot,
            t=self.t,
        )

    def _sweep_asset(self, k: int, cross_k: float) -> None:
        gen = self._streams[k]
        perm = gen.permutation(self._sites)
        uniforms = gen.random(self._sites)
        self._sums[k] = _sweep_sites(
            self._spins[k],
            self._nbr,
            perm,
            uniforms,
            self.params.j,
            self.params.alpha,
            self.params.beta,
            cross_k,
            self._sums[k],
            self._sites,
        )

    def _sweep_block(self, assets: np.ndarray, cross: np.ndarray) -> None:
        for k in assets:
            self._sweep_asset(int(k), float(cross[k]))

    def sweep(self) -> np.ndarray:
        """One full update of every lattice; returns (M_after - M_before)/2."""
        mags = self._sums / float(self._sites)
        self._mag_snapshot = mags
        cross = self._gamma_cols @ mags
        if self._pool is None:
            self._sweep_block(np.arange(self.params.n_assets), cross)
        else:
            futures = [
                self._pool.submit(self._sweep_block, block, cross)
                for block in self._blocks
            ]
            for future in futures:
                future.result()
        self.t += 1
        new_mags = self._sums / float(self._sites)
        return (new_mags - mags) / 2.0

    def run(self, progress=None) -> ReturnPanel:
        """Thermalize, then record `collect_sweeps` sweeps of returns."""
        therm = self.params.therm_sweeps
        collect = self.params.collect_sweeps
        for step in range(therm):
            self.sweep()
            if progress is not None and (step + 1) % 200 == 0:
                progress("thermalize", step + 1, therm)
        panel = np.empty((self.params.n_assets, collect))
        for step in range(collect):
            panel[:, step] = self.sweep()
            if progress is not None and (step + 1) % 200 == 0:
                progress("collect", step + 1, collect)
        return ReturnPanel(panel)


def run_simulation(
    params: ModelParams,
    gamma: CouplingMatrix | np.ndarray,
    threads: int = 1,
    progress=None,
) -> ReturnPanel:
    """Run a full simulation and return the N x collect_sweeps panel."""
    with MarketSimulation(params, gamma, threads=threads) as sim:
        return sim.run(progress=progress)
