import json

import numpy as np
import pytest

from localcascade.evaluation import (
    BenchReport,
    BenchRow,
    accuracy,
    format_report,
    load_manifest,
    mean_squared_error,
    min_rank_table,
    report_to_csv,
    run_benchmark,
    table_report_from_csv,
    wins_ties,
)

# Published reference block: 10 datasets x (RF, XGB, LCE) accuracy percentages.
REFERENCE_BLOCK = [
    [97.4, 97.4, 97.4],  # Iris
    [97.8, 95.6, 97.8],  # Wine
    [97.2, 97.2, 98.6],  # Breast Cancer
    [76.1, 78.6, 79.0],  # Steel Plates Faults
    [97.6, 96.6, 97.6],  # Wireless Indoor Localization
    [98.9, 99.8, 99.8],  # Shill Bidding
    [89.3, 88.8, 89.4],  # Shoppers Purchasing Intention
    [98.7, 100.0, 100.0],  # Nursery
    [88.4, 88.1, 88.6],  # MAGIC Gamma Telescope
    [99.3, 99.8, 99.8],  # Avila
]


class TestAccuracy:
    def test_identical(self):
        assert accuracy([1, 2, 3], [1, 2, 3]) == 100.0

    def test_thirty_seven_of_thirty_eight(self):
        y = np.zeros(38)
        p = np.zeros(38)
        p[0] = 1
        assert accuracy(y, p) == 97.4

    def test_disjoint(self):
        assert accuracy([0, 0], [1, 1]) == 0.0

    def test_rounding_half_away(self):
        # 37/40 = 92.5 exactly
        y = np.zeros(40)
        p = np.zeros(40)
        p[:3] = 1
        assert accuracy(y, p) == 92.5

    def test_errors(self):
        with pytest.raises(ValueError):
            accuracy([1], [1, 2])
        with pytest.raises(ValueError):
            accuracy([], [])

    def test_mse(self):
        assert mean_squared_error([0.0, 2.0], [0.0, 0.0]) == 2.0


class TestRankStatistics:
    def test_reference_block_average_ranks_exact(self):
        assert min_rank_table(REFERENCE_BLOCK) == [2.1, 2.0, 1.0]

    def test_reference_block_wins_ties_exact(self):
        assert wins_ties(REFERENCE_BLOCK) == [3, 4, 10]

    def test_all_tied(self):
        assert min_rank_table([[50.0, 50.0], [10.0, 10.0]]) == [1.0, 1.0]

    def test_two_methods_ordered(self):
        assert min_rank_table([[90.0, 80.0]]) == [1.0, 2.0]

    def test_dominated_method_has_zero_wins(self):
        assert wins_ties([[90.0, 80.0], [70.0, 60.0]]) == [2, 0]

    def test_rank_bounds_random_tables(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            rows = rng.integers(0, 1000, size=(int(rng.integers(1, 8)), int(rng.integers(2, 6))))
            rows = (rows / 10.0).tolist()
            ranks = min_rank_table(rows)
            assert all(1.0 <= r <= len(rows[0]) for r in ranks)

    def test_strictly_best_everywhere_rank_one(self):
        rows = [[99.0, 10.0, 20.0], [98.0, 50.0, 60.0]]
        assert min_rank_table(rows)[0] == 1.0

    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            min_rank_table([[1.0, 2.0], [1.0]])
        with pytest.raises(ValueError):
            wins_ties([[1.0, 2.0], [1.0]])
        with pytest.raises(ValueError):
            min_rank_table([])
        with pytest.raises(ValueError):
            min_rank_table([[1.0]])


def tiny_manifest(tmp_path, iris_path):
    manifest = {
        "seed": 0,
        "k": 3,
        "test_fraction": 0.25,
        "grid": {"n_estimators": [2], "max_depth": [1]},
        "datasets": [
            {"name": "Iris", "path": iris_path, "label": "species", "task": "classification"}
        ],
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return str(path)


class TestBenchmark:
    def test_structure_all_modes(self, tmp_path):
        from conftest import data_path

        manifest = load_manifest(tiny_manifest(tmp_path, data_path("iris.csv")))
        report = run_benchmark(manifest, ("lce", "bagged_trees", "gbt"), parallelism=2)
        assert report.methods == ["lce", "bagged_trees", "gbt"]
        assert len(report.rows) == 1
        row = report.rows[0]
        assert (row.samples, row.dimensions, row.classes) == (150, 4, 3)
        assert len(row.accuracies) == 3
        assert all(0.0 <= a <= 100.0 for a in row.accuracies)
        assert len(report.average_ranks) == 3
        assert len(report.wins) == 3

    def test_deterministic_per_manifest_seed(self, tmp_path):
        from conftest import data_path

        manifest = load_manifest(tiny_manifest(tmp_path, data_path("iris.csv")))
        a = run_benchmark(manifest, ("lce",), parallelism=2)
        b = run_benchmark(manifest, ("lce",), parallelism=1)
        assert a.rows[0].accuracies == b.rows[0].accuracies
        assert a.rows[0].chosen == b.rows[0].chosen

    def test_manifest_errors(self, tmp_path):
        with pytest.raises(ValueError, match="manifest"):
            load_manifest(tmp_path / "nope.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ValueError, match="JSON"):
            load_manifest(bad)
        empty = tmp_path / "empty.json"
        empty.write_text(json.dumps({"datasets": []}))
        with pytest.raises(ValueError, match="no datasets"):
            load_manifest(empty)

    def test_relative_paths_resolve_against_manifest(self, tmp_path):
        (tmp_path / "d.csv").write_text("x,y\n1,a\n2,b\n")
        m = tmp_path / "m.json"
        m.write_text(json.dumps({"datasets": [{"name": "d", "path": "d.csv", "label": "y"}]}))
        manifest = load_manifest(m)
        assert manifest["datasets"][0]["path"] == str(tmp_path / "d.csv")


class TestReportRendering:
    def report(self):
        rows = [
            BenchRow("Iris", 150, 4, 3, [97.4, 97.4, 97.4], [{}, {}, {}]),
            BenchRow("Wine", 178, 13, 3, [97.8, 95.6, 97.8], [{}, {}, {}]),
        ]
        return BenchReport(methods=["rf", "xgb", "lce"], rows=rows)

    def test_text_table(self):
        text = format_report(self.report())
        assert "Iris" in text and "Average Rank" in text and "Wins/Ties" in text
        assert "97.4" in text

    def test_csv(self):
        csv = report_to_csv(self.report())
        lines = csv.strip().split("\n")
        assert lines[0] == "dataset,samples,dimensions,classes,rf,xgb,lce"
        assert lines[1].startswith("Iris,150,4,3,")
        assert lines[-2].startswith("average_rank")
        assert lines[-1].startswith("wins_ties")

    def test_from_table_round_trip(self, tmp_path):
        path = tmp_path / "table.csv"
        lines = ["dataset,rf,xgb,lce"]
        names = ["D%d" % i for i in range(10)]
        for name, row in zip(names, REFERENCE_BLOCK):
            lines.append(name + "," + ",".join(str(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
        report = table_report_from_csv(path)
        assert report.methods == ["rf", "xgb", "lce"]
        assert report.average_ranks == [2.1, 2.0, 1.0]
        assert report.wins == [3, 4, 10]
