import numpy as np
import pytest

from spinmarket.io import (
    fmt,
    read_csv,
    read_matrix_csv,
    read_panel_csv,
    sha256_file,
    write_flat_text,
    write_json_atomic,
    write_matrix_csv,
    write_panel_csv,
    write_rows_atomic,
)
from spinmarket.series import ReturnPanel


class TestFloatFormat:
    @pytest.mark.parametrize(
        "value",
        [0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 1e-300, -1e300, 0.05000000000000001],
    )
    def test_round_trip_exact(self, value):
        assert float(fmt(value)) == value

    def test_random_round_trip(self, rng):
        for value in rng.uniform(-1, 1, 200):
            assert float(fmt(value)) == value


class TestRowsAtomic:
    def test_header_and_lf_endings(self, tmp_path):
        path = tmp_path / "data.csv"
        write_rows_atomic(path, ["a", "b"], [(1, 0.5), (2, -0.25)])
        raw = path.read_bytes()
        assert raw == b"a,b\n1,0.5\n2,-0.25\n"

    def test_partial_marker_on_failure(self, tmp_path):
        path = tmp_path / "data.csv"

        def exploding_rows():
            yield (1, 2.0)
            raise RuntimeError("interrupted")

        with pytest.raises(RuntimeError):
            write_rows_atomic(path, ["a", "b"], exploding_rows())
        assert not path.exists()
        assert (tmp_path / "data.csv.partial").exists()

    def test_success_removes_partial(self, tmp_path):
        path = tmp_path / "data.csv"
        write_rows_atomic(path, ["x"], [(1,)])
        assert path.exists()
        assert not (tmp_path / "data.csv.partial").exists()


class TestPanelRoundTrip:
    def test_bit_exact(self, tmp_path, rng):
        panel = ReturnPanel(rng.uniform(-1, 1, size=(5, 40)))
        path = tmp_path / "panel.csv"
        write_panel_csv(path, panel)
        loaded = read_panel_csv(path)
        assert np.array_equal(loaded.values, panel.values)

    def test_header_and_time_column(self, tmp_path):
        panel = ReturnPanel(np.array([[0.5, -0.5], [0.25, 0.125]]))
        path = tmp_path / "panel.csv"
        write_panel_csv(path, panel)
        header, rows = read_csv(path)
        assert header == ["t", "a0", "a1"]
        assert [row[0] for row in rows] == ["1", "2"]

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text("t,a0\n")
        with pytest.raises(ValueError):
            read_panel_csv(path)


class TestMatrixRoundTrip:
    def test_bit_exact(self, tmp_path, rng):
        matrix = rng.standard_normal((6, 6))
        path = tmp_path / "matrix.csv"
        write_matrix_csv(path, matrix)
        assert np.array_equal(read_matrix_csv(path), matrix)


class TestSummaries:
    def test_json_atomic(self, tmp_path):
        path = tmp_path / "doc.json"
        write_json_atomic(path, {"b": 1, "a": [1, 2]})
        assert path.read_text() == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'

    def test_flat_text(self, tmp_path):
        path = tmp_path / "doc.txt"
        write_flat_text(path, {"b": 2, "a": 0.5})
        assert path.read_text() == "a = 0.5\nb = 2\n"

    def test_sha256(self, tmp_path):
        path = tmp_path / "blob"
        path.write_bytes(b"abc")
        assert sha256_file(path) == (
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        )
