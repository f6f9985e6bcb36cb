import numpy as np
import pytest

from mwkmeans import DataError, DataMatrix, read_csv, load_csv, standardize_range, write_csv
from mwkmeans.dataset import ensure_standardized


def column(values):
    return DataMatrix(np.asarray(values, dtype=float)[:, None])


class TestDataMatrix:
    def test_basic_shape(self):
        d = DataMatrix([[1.0, 2.0], [3.0, 4.0]])
        assert d.n_entities == 2
        assert d.n_features == 2
        assert not d.standardized

    def test_rejects_nan_with_location(self):
        with pytest.raises(DataError, match="row 1, feature 0"):
            DataMatrix([[1.0, 2.0], [np.nan, 4.0]])

    def test_rejects_inf(self):
        with pytest.raises(DataError):
            DataMatrix([[1.0], [np.inf]])

    def test_rejects_single_entity(self):
        with pytest.raises(DataError):
            DataMatrix([[1.0, 2.0]])

    def test_values_are_read_only(self):
        d = DataMatrix([[1.0], [2.0]])
        with pytest.raises(ValueError):
            d.values[0, 0] = 9.0


class TestStandardizeRange:
    def test_simple_column(self):
        out = standardize_range(column([0.0, 2.0, 4.0]))
        assert np.allclose(out.values.ravel(), [-0.5, 0.0, 0.5])
        assert out.standardized

    def test_hand_worked_column(self):
        # mean 3, range 4
        out = standardize_range(column([1.0, 2.0, 4.0, 5.0]))
        assert np.allclose(out.values.ravel(), [-0.5, -0.25, 0.25, 0.5])

    def test_constant_column_maps_to_zero_with_warning(self):
        with pytest.warns(UserWarning, match="constant"):
            out = standardize_range(column([5.0, 5.0, 5.0]))
        assert np.all(out.values == 0.0)

    def test_rejects_already_standardized(self):
        out = standardize_range(column([0.0, 1.0]))
        with pytest.raises(DataError):
            standardize_range(out)

    def test_mean_zero_range_one(self):
        rng = np.random.default_rng(0)
        out = standardize_range(DataMatrix(rng.normal(3.0, 10.0, size=(40, 5))))
        assert np.abs(out.values.mean(axis=0)).max() < 1e-9
        ranges = out.values.max(axis=0) - out.values.min(axis=0)
        assert np.abs(ranges - 1.0).max() < 1e-9

    def test_idempotent_in_effect(self):
        # the affine map applied to its own output is the identity
        rng = np.random.default_rng(1)
        out = standardize_range(DataMatrix(rng.uniform(-4, 9, size=(25, 3))))
        again = standardize_range(DataMatrix(out.values.copy()))
        assert np.allclose(again.values, out.values, atol=1e-12)

    def test_preserves_within_feature_ordering(self):
        rng = np.random.default_rng(2)
        raw = rng.normal(size=(30, 4))
        out = standardize_range(DataMatrix(raw))
        for v in range(4):
            assert np.array_equal(np.argsort(raw[:, v]), np.argsort(out.values[:, v]))

    def test_ensure_standardized_passthrough(self):
        out = standardize_range(column([0.0, 1.0, 3.0]))
        assert ensure_standardized(out) is out
        raw = column([0.0, 1.0, 3.0])
        assert ensure_standardized(raw).standardized


class TestCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        data = DataMatrix(rng.normal(size=(17, 4)) * 1e3)
        path = tmp_path / "data.csv"
        write_csv(data, path)
        back = read_csv(path)
        assert np.array_equal(back.values, data.values)

    def test_label_column_split_off(self, tmp_path):
        path = tmp_path / "labeled.csv"
        path.write_text("f0,f1,label\n0.5,1.5,0\n2.5,3.5,1\n4.5,5.5,1\n")
        data, labels = load_csv(path)
        assert data.n_features == 2
        assert labels.tolist() == [0, 1, 1]

    def test_no_header(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("1,2\n3,4\n")
        data, labels = load_csv(path, has_header=False)
        assert labels is None
        assert data.values.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("f0,f1\n1,2\n3\n")
        with pytest.raises(DataError, match="ragged row 1"):
            read_csv(path)

    def test_parse_failure_reports_position(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f0,f1\n1,2\n3,oops\n")
        with pytest.raises(DataError, match="row 1, column 1"):
            read_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DataError):
            read_csv(path)
