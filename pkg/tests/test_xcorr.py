import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinmarket.series import ReturnPanel
from spinmarket.xcorr import (
    CorrelationMatrix,
    WindowSpec,
    rolling_correlations,
    window_ends,
)


def check_matrix_invariants(matrix: CorrelationMatrix):
    entries = matrix.entries
    n = matrix.n
    assert np.abs(entries - entries.T).max() <= 1e-12
    assert np.abs(np.diag(entries) - 1.0).max() <= 1e-12
    assert entries.min() >= -1.0 - 1e-12
    assert entries.max() <= 1.0 + 1e-12
    eigenvalues = np.linalg.eigvalsh(entries)
    assert eigenvalues.min() >= -1e-8 * n
    assert abs(eigenvalues.sum() - n) <= 1e-8


class TestWindowSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"window": 0},
            {"stride": 0},
            {"mode": "squared"},
            {"normalization": "none"},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            WindowSpec(**kwargs)

    def test_defaults_match_shipped_protocol(self):
        spec = WindowSpec()
        assert spec.window == 400
        assert spec.stride == 400
        assert spec.mode == "return"
        assert spec.normalization == "window"


class TestWindowEnds:
    def test_partition_count(self):
        # stride == window partitions the series
        assert window_ends(1000, 200, 200) == [200, 400, 600, 800, 1000]

    def test_general_count_formula(self):
        for t_len, window, stride in [(1000, 400, 100), (999, 400, 250), (400, 400, 1)]:
            ends = window_ends(t_len, window, stride)
            assert len(ends) == (t_len - window) // stride + 1

    def test_too_short(self):
        assert window_ends(100, 200, 200) == []


class TestRollingCorrelations:
    def test_identical_assets_fully_correlated(self, rng):
        row = rng.uniform(-0.5, 0.5, 300)
        panel = ReturnPanel(np.vstack([row, row]))
        [matrix] = rolling_correlations(panel, WindowSpec(window=300, stride=300))
        assert matrix.entries[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_negated_asset_anticorrelated(self, rng):
        row = rng.uniform(-0.5, 0.5, 300)
        panel = ReturnPanel(np.vstack([row, -row]))
        [matrix] = rolling_correlations(panel, WindowSpec(window=300, stride=300))
        assert matrix.entries[0, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_independent_gaussians_stay_inside_three_sigma(self):
        # |C_kj| < 3 / sqrt(400) = 0.15 holds with probability ~0.997
        rng = np.random.default_rng(414)
        panel = ReturnPanel(np.clip(rng.standard_normal((2, 400)) * 0.05, -1, 1))
        [matrix] = rolling_correlations(panel, WindowSpec(window=400, stride=400))
        assert abs(matrix.entries[0, 1]) < 0.15

    def test_window_longer_than_series_rejected(self):
        panel = ReturnPanel(np.zeros((2, 100)) + 0.1)
        with pytest.raises(ValueError):
            rolling_correlations(panel, WindowSpec(window=200, stride=200))

    def test_invariants_on_random_panels(self, rng):
        values = rng.uniform(-0.8, 0.8, size=(6, 500))
        panel = ReturnPanel(values)
        for mode in ("return", "absolute"):
            matrices = rolling_correlations(
                panel, WindowSpec(window=100, stride=50, mode=mode)
            )
            assert len(matrices) == 9
            for matrix in matrices:
                check_matrix_invariants(matrix)

    def test_window_end_stamps(self, rng):
        panel = ReturnPanel(rng.uniform(-0.5, 0.5, size=(2, 500)))
        matrices = rolling_correlations(panel, WindowSpec(window=200, stride=100))
        assert [m.window_end for m in matrices] == [200, 300, 400, 500]

    def test_absolute_mode_equals_explicit_transform(self, rng):
        values = rng.uniform(-0.5, 0.5, size=(3, 200))
        direct = rolling_correlations(
            ReturnPanel(values), WindowSpec(window=200, stride=200, mode="absolute")
        )
        via_abs = rolling_correlations(
            ReturnPanel(np.abs(values)), WindowSpec(window=200, stride=200)
        )
        assert np.array_equal(direct[0].entries, via_abs[0].entries)

    def test_degenerate_window_flagged_and_neutralized(self, rng):
        values = rng.uniform(-0.5, 0.5, size=(3, 200))
        values[1, :100] = 0.25  # constant inside the first window only
        matrices = rolling_correlations(
            ReturnPanel(values), WindowSpec(window=100, stride=100)
        )
        first, second = matrices
        assert first.degenerate_assets == (1,)
        assert second.degenerate_assets == ()
        assert np.all(first.entries[1, [0, 2]] == 0.0)
        assert np.all(first.entries[[0, 2], 1] == 0.0)
        assert first.entries[1, 1] == 1.0
        check_matrix_invariants(first)

    def test_permutation_equivariance(self, rng):
        values = rng.uniform(-0.5, 0.5, size=(5, 240))
        spec = WindowSpec(window=120, stride=120)
        base = rolling_correlations(ReturnPanel(values), spec)
        order = np.array([3, 0, 4, 1, 2])
        permuted = rolling_correlations(ReturnPanel(values[order]), spec)
        for b, p in zip(base, permuted):
            assert np.array_equal(p.entries, b.entries[np.ix_(order, order)])

    @given(st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=20)
    def test_symmetry_is_exact(self, seed):
        rng = np.random.default_rng(seed)
        values = rng.uniform(-0.9, 0.9, size=(4, 64))
        [matrix] = rolling_correlations(
            ReturnPanel(values), WindowSpec(window=64, stride=64)
        )
        assert np.array_equal(matrix.entries, matrix.entries.T)


class TestGlobalNormalization:
    def test_matches_literal_composition(self, rng):
        values = rng.uniform(-0.5, 0.5, size=(3, 400))
        spec = WindowSpec(window=100, stride=100, normalization="global")
        matrices = rolling_correlations(ReturnPanel(values), spec)
        normalized = (values - values.mean(axis=1, keepdims=True)) / values.std(
            axis=1, keepdims=True
        )
        for matrix in matrices:
            end = matrix.window_end
            block = normalized[:, end - 100 : end]
            expected = block @ block.T / 100
            expected = 0.5 * (expected + expected.T)
            assert np.allclose(matrix.entries, expected, atol=1e-13)

    def test_globally_constant_asset_flagged_everywhere(self, rng):
        values = rng.uniform(-0.5, 0.5, size=(3, 200))
        values[2] = 0.125
        spec = WindowSpec(window=100, stride=100, normalization="global")
        matrices = rolling_correlations(ReturnPanel(values), spec)
        for matrix in matrices:
            assert matrix.degenerate_assets == (2,)
            assert matrix.entries[2, 2] == 1.0
