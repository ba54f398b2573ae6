"""Independent oracles used by the test suite.

These stay deliberately separate from the library code paths they check:
the Jacobi rotation eigensolver never touches LAPACK, the AR(1) generator
has closed-form autocorrelation, and the rank correlation is computed from
first principles.
"""

import numpy as np
from scipy.signal import lfilter


def jacobi_eigenvalues(matrix, tol=1e-13, max_sweeps=200):
    """Classical Jacobi rotations with largest-off-diagonal pivoting.

    Good to ~1e-14 for the small symmetric matrices used in tests.
    Returns eigenvalues sorted descending.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    for _ in range(max_sweeps * n * n):
        off = np.abs(a - np.diag(np.diag(a)))
        p, q = np.unravel_index(np.argmax(off), off.shape)
        if off[p, q] <= tol:
            break
        apq = a[p, q]
        tau = (a[q, q] - a[p, p]) / (2.0 * apq)
        if tau >= 0.0:
            t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
        else:
            t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
        c = 1.0 / np.sqrt(1.0 + t * t)
        s = t * c
        rotation = np.eye(n)
        rotation[p, p] = c
        rotation[q, q] = c
        rotation[p, q] = s
        rotation[q, p] = -s
        a = rotation.T @ a @ rotation
        a = 0.5 * (a + a.T)
    return np.sort(np.diag(a))[::-1]


def ar1_series(phi, t_len, seed, burn=1000):
    """AR(1) process x_t = phi x_{t-1} + eps_t with known acf phi**lag."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(t_len + burn)
    series = lfilter([1.0], [1.0, -phi], noise)
    return series[burn:]


def spearman(x, y):
    """Rank correlation from first principles (continuous data, no ties)."""
    rank_x = np.argsort(np.argsort(x)).astype(float)
    rank_y = np.argsort(np.argsort(y)).astype(float)
    rank_x -= rank_x.mean()
    rank_y -= rank_y.mean()
    return float((rank_x @ rank_y) / np.sqrt((rank_x @ rank_x) * (rank_y @ rank_y)))


def random_symmetric_unit_diag(n, rng, scale=0.45):
    """Random symmetric matrix with unit diagonal (not necessarily PSD)."""
    a = rng.uniform(-scale, scale, size=(n, n))
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, 1.0)
    return a
