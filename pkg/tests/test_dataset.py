import math

import numpy as np
import pytest

import localcascade as lc
from localcascade.dataset import DatasetError, split_indices
from localcascade.evaluation import export_csv


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoadCsv:
    def test_iris_shape(self, iris):
        assert iris.rows == 150
        assert iris.width == 4
        assert iris.n_classes == 3
        assert len(iris.labels) == 150

    def test_single_row_regression(self, tmp_path):
        ds = lc.load_csv(write(tmp_path, "a,b,y\n1,2,0\n"), "y", lc.REGRESSION)
        assert ds.rows == 1
        assert ds.labels.tolist() == [0.0]
        assert ds.feature_names == ["a", "b"]

    def test_missing_token_becomes_missing(self, tmp_path):
        ds = lc.load_csv(write(tmp_path, "a,y\nNA,1\n2,0\n"), "y")
        assert math.isnan(ds.features[0, 0])
        assert not math.isnan(ds.features[1, 0])
        assert ds.n_classes == 2

    def test_class_order_is_first_appearance(self, tmp_path):
        ds = lc.load_csv(write(tmp_path, "x,y\n1,b\n2,a\n3,b\n"), "y")
        assert ds.class_names == ["b", "a"]
        assert ds.labels.tolist() == [0, 1, 0]

    def test_label_column_any_position(self, tmp_path):
        ds = lc.load_csv(write(tmp_path, "y,a,b\n0,1,2\n1,3,4\n"), "y")
        assert ds.feature_names == ["a", "b"]
        assert ds.features[1].tolist() == [3.0, 4.0]

    def test_missing_file(self):
        with pytest.raises(DatasetError, match="no such file"):
            lc.load_csv("/nonexistent/nope.csv", "y")

    def test_absent_label_column(self, tmp_path):
        with pytest.raises(DatasetError, match="label column"):
            lc.load_csv(write(tmp_path, "a,b\n1,2\n"), "y")

    def test_non_numeric_cell(self, tmp_path):
        with pytest.raises(DatasetError, match="non-numeric"):
            lc.load_csv(write(tmp_path, "a,y\nfoo,0\n1,1\n"), "y")

    def test_missing_label_cell(self, tmp_path):
        with pytest.raises(DatasetError, match="missing label"):
            lc.load_csv(write(tmp_path, "a,y\n1,\n2,0\n"), "y")

    def test_single_class_rejected(self, tmp_path):
        with pytest.raises(DatasetError, match="distinct labels"):
            lc.load_csv(write(tmp_path, "a,y\n1,z\n2,z\n"), "y")

    def test_ragged_row_rejected(self, tmp_path):
        with pytest.raises(DatasetError, match="expected 2 cells"):
            lc.load_csv(write(tmp_path, "a,y\n1,2,3\n"), "y")

    def test_missing_tokens_are_case_sensitive(self, tmp_path):
        with pytest.raises(DatasetError, match="non-numeric"):
            lc.load_csv(write(tmp_path, "a,y\nna,0\n1,1\n"), "y")


class TestTrainTestSplit:
    def test_iris_sizes(self, iris):
        train, test = lc.train_test_split(iris, 0.25, 0, stratified=True)
        assert (train.rows, test.rows) == (112, 38)

    def test_stratified_counts_floor_or_ceil(self, iris):
        for seed in range(5):
            _, test = lc.train_test_split(iris, 0.25, seed, stratified=True)
            for c in range(3):
                n_c = int((test.labels == c).sum())
                assert n_c in (math.floor(50 * 0.25), math.ceil(50 * 0.25))

    def test_two_rows(self, tmp_path):
        ds = lc.Dataset(np.array([[0.0], [1.0]]), [0.0, 1.0], ["x"], lc.REGRESSION)
        train, test = lc.train_test_split(ds, 0.5, 7)
        assert train.rows == 1 and test.rows == 1
        assert train.features[0, 0] != test.features[0, 0]

    def test_partition_disjoint_and_complete(self, iris):
        train_idx, test_idx = split_indices(iris.labels, 0.25, 3, True)
        merged = np.sort(np.concatenate([train_idx, test_idx]))
        assert merged.tolist() == list(range(iris.rows))

    def test_deterministic(self, iris):
        a = split_indices(iris.labels, 0.25, 42, True)
        b = split_indices(iris.labels, 0.25, 42, True)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_bad_fraction(self, iris):
        for frac in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(DatasetError):
                lc.train_test_split(iris, frac, 0, stratified=True)

    def test_stratified_regression_rejected(self):
        ds = lc.Dataset(np.zeros((4, 1)), [1.0, 2.0, 3.0, 4.0], ["x"], lc.REGRESSION)
        with pytest.raises(DatasetError, match="stratified"):
            lc.train_test_split(ds, 0.5, 0, stratified=True)


class TestBootstrap:
    def test_single_row(self):
        ds = lc.Dataset(np.array([[1.0]]), [0.5], ["x"], lc.REGRESSION)
        sample, idx = lc.bootstrap_sample(ds, 123)
        assert idx.tolist() == [0]
        assert sample.rows == 1

    def test_distinct_fraction(self):
        n = 10_000
        ds = lc.Dataset(np.zeros((n, 1)), np.zeros(n), ["x"], lc.REGRESSION)
        for seed in range(25):
            _, idx = lc.bootstrap_sample(ds, seed)
            frac = len(np.unique(idx)) / n
            assert 0.61 <= frac <= 0.655, (seed, frac)

    def test_deterministic_and_row_content(self, iris):
        s1, idx1 = lc.bootstrap_sample(iris, 9)
        s2, idx2 = lc.bootstrap_sample(iris, 9)
        assert np.array_equal(idx1, idx2)
        assert np.array_equal(s1.features, s2.features)
        assert np.array_equal(s1.features, iris.features[idx1])
        assert np.array_equal(s1.labels, iris.labels[idx1])
        assert s1.class_names == iris.class_names

    def test_empty_rejected(self):
        ds = lc.Dataset(np.zeros((1, 1)), [0.0], ["x"], lc.REGRESSION)
        ds = ds.subset([])  # zero rows, schema kept
        with pytest.raises(DatasetError):
            lc.bootstrap_sample(ds, 0)


class TestKFold:
    def test_six_rows_three_folds(self):
        folds = lc.kfold_indices([0, 1, 0, 1, 0, 1], 3, 0, stratified=True)
        assert len(folds) == 3
        assert sorted(len(f) for f in folds) == [2, 2, 2]
        merged = np.sort(np.concatenate(folds))
        assert merged.tolist() == list(range(6))

    def test_seven_rows_three_folds_sizes(self):
        folds = lc.kfold_indices(list(range(7)), 3, 1)
        assert sorted(len(f) for f in folds) == [2, 2, 3]

    def test_stratified_spreads_classes(self):
        labels = [0] * 9 + [1] * 3
        folds = lc.kfold_indices(labels, 3, 5, stratified=True)
        labels = np.asarray(labels)
        for f in folds:
            assert (labels[f] == 1).sum() == 1
            assert (labels[f] == 0).sum() == 3

    def test_deterministic(self):
        a = lc.kfold_indices(list(range(10)), 3, 11)
        b = lc.kfold_indices(list(range(10)), 3, 11)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_bad_k(self):
        with pytest.raises(DatasetError):
            lc.kfold_indices([0, 1, 0], 1, 0)
        with pytest.raises(DatasetError):
            lc.kfold_indices([0, 1, 0], 4, 0)


class TestRoundTrip:
    def test_csv_round_trip_preserves_cells(self, tmp_path):
        text = "a,b,y\n1.5,NA,u\n,2.25,v\n-3.125,0.1,u\n"
        first = lc.load_csv(write(tmp_path, text), "y")
        out = tmp_path / "back.csv"
        export_csv(first, out)
        again = lc.load_csv(str(out), "y")
        assert again.feature_names == first.feature_names
        assert np.array_equal(first.features, again.features, equal_nan=True)
        assert [first.class_names[i] for i in first.labels] == [
            again.class_names[i] for i in again.labels
        ]

    def test_iris_round_trip(self, iris, tmp_path):
        out = tmp_path / "iris_back.csv"
        export_csv(iris, out)
        again = lc.load_csv(str(out), "species")
        assert np.array_equal(iris.features, again.features, equal_nan=True)
        assert again.class_names == iris.class_names
        assert np.array_equal(iris.labels, again.labels)


class TestDatasetInvariants:
    def test_labels_length_checked(self):
        with pytest.raises(DatasetError):
            lc.Dataset(np.zeros((3, 1)), [0.0, 1.0], ["x"], lc.REGRESSION)

    def test_class_index_range_checked(self):
        with pytest.raises(DatasetError):
            lc.Dataset(np.zeros((2, 1)), [0, 5], ["x"], lc.CLASSIFICATION, ["a", "b"])

    def test_features_immutable(self, iris):
        with pytest.raises(ValueError):
            iris.features[0, 0] = 99.0
