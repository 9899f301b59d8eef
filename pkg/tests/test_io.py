import numpy as np
import pytest

from noisyknn import AccuracyCurve
from noisyknn.io import (
    FEATURE_MAGIC,
    LABEL_MAGIC,
    read_curve_csv,
    read_features,
    read_labels,
    read_matrix_csv,
    read_softmax_csv,
    write_curve_csv,
    write_features,
    write_labels,
)


class TestFeatureFiles:
    def test_binary_roundtrip(self, tmp_path):
        arr = np.random.default_rng(0).standard_normal((13, 7)).astype(np.float32)
        path = tmp_path / "f.bin"
        write_features(path, arr)
        assert path.read_bytes()[:4] == FEATURE_MAGIC
        back = read_features(path)
        np.testing.assert_array_equal(back, arr.astype(np.float64))

    def test_csv_autodetect(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("1.5,2.0\n3.25,-4.0\n")
        np.testing.assert_array_equal(read_features(path), [[1.5, 2.0], [3.25, -4.0]])

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(FEATURE_MAGIC + np.array([2, 2], dtype="<u4").tobytes() + b"\x00" * 4)
        with pytest.raises(ValueError, match="truncated"):
            read_features(path)


class TestLabelFiles:
    def test_binary_roundtrip(self, tmp_path):
        labels = np.array([0, 3, 1, 2, 2])
        path = tmp_path / "l.bin"
        write_labels(path, labels)
        assert path.read_bytes()[:4] == LABEL_MAGIC
        np.testing.assert_array_equal(read_labels(path), labels)

    def test_csv_autodetect(self, tmp_path):
        path = tmp_path / "l.csv"
        path.write_text("0\n2\n1\n")
        np.testing.assert_array_equal(read_labels(path), [0, 2, 1])


class TestMatrixCsv:
    def test_valid(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.9,0.1\n0.2,0.8\n")
        m = read_matrix_csv(path)
        np.testing.assert_allclose(m.rows, [[0.9, 0.1], [0.2, 0.8]])

    def test_bad_row_named(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1.0,0.0\n0.45,0.45\n")
        with pytest.raises(ValueError, match="row 1"):
            read_matrix_csv(path)

    def test_non_numeric_row_named(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1.0,0.0\noops,0.5\n")
        with pytest.raises(ValueError, match="row 1"):
            read_matrix_csv(path)


class TestCurveCsv:
    def test_roundtrip_with_header(self, tmp_path):
        curve = AccuracyCurve(
            [0.0, 0.5], [1.0, 0.75], kind="empirical", k=3, noise="uniform",
            stds=[0.0, 0.01],
        )
        path = tmp_path / "c.csv"
        write_curve_csv(path, curve, {"command": "knn-eval", "seed": 42})
        text = path.read_text()
        assert "# command=knn-eval" in text
        assert "# seed=42" in text
        assert "gamma,accuracy,std" in text
        rows, config = read_curve_csv(path)
        np.testing.assert_allclose(rows, [[0.0, 1.0, 0.0], [0.5, 0.75, 0.01]])
        assert config["seed"] == "42"

    def test_twelve_significant_digits(self, tmp_path):
        curve = AccuracyCurve([0.2], [0.123456789012345], kind="analytic", k=1, noise="uniform")
        path = tmp_path / "c.csv"
        write_curve_csv(path, curve)
        assert "0.2,0.123456789012" in path.read_text()


def test_softmax_csv(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("0.9,0.1\n0.3,0.7\n")
    np.testing.assert_allclose(read_softmax_csv(path), [[0.9, 0.1], [0.3, 0.7]])
