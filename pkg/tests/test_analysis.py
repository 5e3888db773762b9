import math

import numpy as np
import pytest

from uqsup import (
    MI,
    SM,
    PreconditionError,
    SweepGrid,
    UndefinedMetricError,
    accuracy_objective,
    calibrated_evaluation,
    gaussian_cluster_records,
    neighborhood_stats,
    rank_order,
    sample_size_sweep,
    sensitivity_correlation,
    stack_grids,
    truncate_samples,
)
from builders import make_dataset


class TestSweepGrid:
    def test_holds_values_and_axes(self):
        g = SweepGrid([1, 2], [10, 20, 30], [[1.0, 2.0, 3.0],
                                             [4.0, 5.0, 6.0]])
        assert g.axis1 == (1, 2)
        assert g.axis2 == (10, 20, 30)
        assert g.values.shape == (2, 3)

    def test_values_read_only(self):
        g = SweepGrid([1], [10], [[1.0]])
        with pytest.raises(ValueError):
            g.values[0, 0] = 9.0

    def test_axes_strictly_increasing(self):
        with pytest.raises(ValueError):
            SweepGrid([2, 1], [10], [[1.0], [2.0]])
        with pytest.raises(ValueError):
            SweepGrid([1], [10, 10], [[1.0, 2.0]])

    def test_shape_must_match_axes(self):
        with pytest.raises(ValueError):
            SweepGrid([1], [10, 20], [[1.0]])


class TestRankOrder:
    def test_single_group_frozen(self):
        results = [("A", "g", 3.0), ("B", "g", 1.0), ("C", "g", 2.0),
                   ("D", "g", 2.0)]
        table = rank_order(results)
        assert table.ranks[("A", "g")] == 1.0
        assert table.ranks[("B", "g")] == 4.0
        assert table.ranks[("C", "g")] == 2.5
        assert table.ranks[("D", "g")] == 2.5

    def test_rank_sum_identity(self):
        results = [(q, "g", s) for q, s in
                   zip("ABCDE", [0.5, 0.9, 0.1, 0.7, 0.3])]
        table = rank_order(results)
        total = sum(table.ranks[(q, "g")] for q in "ABCDE")
        assert total == pytest.approx(15.0)

    def test_average_over_groups(self):
        results = [("A", "g1", 1.0), ("B", "g1", 2.0),
                   ("A", "g2", 2.0), ("B", "g2", 1.0)]
        table = rank_order(results)
        assert table.average_rank["A"] == pytest.approx(1.5)
        assert table.average_rank["B"] == pytest.approx(1.5)
        assert table.counts["A"] == 2

    def test_tuple_group_keys(self):
        results = [("A", (0.1, "ood"), 1.0), ("B", (0.1, "ood"), 2.0)]
        table = rank_order(results)
        assert table.ranks[("B", (0.1, "ood"))] == 1.0

    def test_duplicate_cell_rejected(self):
        with pytest.raises(PreconditionError):
            rank_order([("A", "g", 1.0), ("A", "g", 2.0)])


class TestTruncateSamples:
    def test_prefix_kept(self, sampled_dataset):
        t = truncate_samples(sampled_dataset, 2)
        assert all(r.num_samples == 2 for r in t)
        np.testing.assert_array_equal(
            t.records[0].outputs, sampled_dataset.records[0].outputs[:2])

    def test_size_bounds(self, sampled_dataset):
        with pytest.raises(PreconditionError):
            truncate_samples(sampled_dataset, 0)
        with pytest.raises(PreconditionError):
            truncate_samples(sampled_dataset, 6)

    def test_identity_at_full_size(self, sampled_dataset):
        t = truncate_samples(sampled_dataset, 5)
        np.testing.assert_array_equal(
            t.records[0].outputs, sampled_dataset.records[0].outputs)


class TestCalibratedEvaluation:
    def test_pipeline_produces_plausible_report(self):
        d = gaussian_cluster_records(600, classes=3, samples=1, noise=1.5,
                                     seed=3)
        report, config = calibrated_evaluation(d, SM, 0.1)
        assert config.quantifier == SM
        assert config.epsilon == 0.1
        assert config.achieved_fpr >= 0.1
        assert 0.0 < report.acceptance_rate <= 1.0
        assert report.supervised_objective >= report.unsupervised_objective

    def test_needs_validation_and_test(self):
        d = make_dataset([[[0.6, 0.4]]], labels=[0], splits=["test"])
        with pytest.raises(PreconditionError):
            calibrated_evaluation(d, SM, 0.1)


class TestSampleSizeSweep:
    @pytest.fixture()
    def dataset(self):
        return gaussian_cluster_records(300, classes=3, samples=8,
                                        noise=1.5, seed=5)

    def test_matches_truncated_pipeline(self, dataset):
        obj = accuracy_objective()
        result = sample_size_sweep(dataset, MI, 0.1, [3, 8])
        for size in (3, 8):
            report, _ = calibrated_evaluation(
                truncate_samples(dataset, size), MI, 0.1, obj=obj)
            assert result[size] == (report.supervised_objective,
                                    report.acceptance_rate,
                                    report.s_beta[1.0])

    def test_workers_do_not_change_results(self, dataset):
        a = sample_size_sweep(dataset, MI, 0.1, [2, 4, 6], workers=1)
        b = sample_size_sweep(dataset, MI, 0.1, [2, 4, 6], workers=3)
        assert a == b

    def test_size_validation(self, dataset):
        with pytest.raises(PreconditionError):
            sample_size_sweep(dataset, MI, 0.1, [1, 4])
        with pytest.raises(PreconditionError):
            sample_size_sweep(dataset, MI, 0.1, [4, 9])


class TestNeighborhoodStats:
    def test_constant_grid_zero_std(self):
        g = SweepGrid([1, 2, 3], [1, 2, 3], np.full((3, 3), 0.7))
        mean, std = neighborhood_stats(g, window=3)
        np.testing.assert_allclose(mean.values, 0.7)
        np.testing.assert_allclose(std.values, 0.0)

    def test_corner_uses_truncated_window(self):
        values = np.arange(9, dtype=float).reshape(3, 3)
        g = SweepGrid([0, 1, 2], [0, 1, 2], values)
        mean, std = neighborhood_stats(g, window=3)
        # top-left corner sees cells {0, 1, 3, 4}
        assert mean.values[0, 0] == pytest.approx(2.0)
        assert std.values[0, 0] == pytest.approx(np.std([0, 1, 3, 4]))
        # center sees all nine cells
        assert mean.values[1, 1] == pytest.approx(4.0)

    def test_nan_holes_excluded(self):
        values = np.array([[1.0, np.nan, 2.0],
                           [3.0, 5.0, 4.0],
                           [6.0, 7.0, 8.0]])
        g = SweepGrid([0, 1, 2], [0, 1, 2], values)
        mean, std = neighborhood_stats(g, window=3)
        # top-left window covers {1, nan, 3, 5}: the hole drops out
        assert mean.values[0, 0] == pytest.approx(3.0)

    def test_window_validation(self):
        g = SweepGrid([0, 1], [0, 1], np.ones((2, 2)))
        with pytest.raises(PreconditionError):
            neighborhood_stats(g, window=4)
        with pytest.raises(PreconditionError):
            neighborhood_stats(g, window=1)
        with pytest.raises(PreconditionError):
            neighborhood_stats(g, window=3)

    def test_metadata_tagged(self):
        g = SweepGrid([0, 1, 2], [0, 1, 2], np.ones((3, 3)))
        mean, std = neighborhood_stats(g, window=3)
        assert mean.metadata["stat"] == "mean"
        assert std.metadata["stat"] == "std"


class TestSensitivityCorrelation:
    def test_perfect_negative_line(self):
        mean = np.linspace(0.1, 0.9, 25).reshape(5, 5)
        std = 0.5 - 0.4 * mean
        r, p = sensitivity_correlation(mean, std)
        assert r == pytest.approx(-1.0, abs=1e-9)
        assert p == 0.0

    def test_perfect_positive_line(self):
        mean = np.linspace(0.1, 0.9, 9).reshape(3, 3)
        r, p = sensitivity_correlation(mean, 2.0 * mean + 1.0)
        assert r == pytest.approx(1.0, abs=1e-9)
        assert p == 0.0

    def test_accepts_grids(self):
        mean = SweepGrid([0, 1], [0, 1], [[0.1, 0.2], [0.3, 0.4]])
        std = SweepGrid([0, 1], [0, 1], [[0.4, 0.3], [0.2, 0.1]])
        r, p = sensitivity_correlation(mean, std)
        assert r == pytest.approx(-1.0, abs=1e-9)

    def test_nan_cells_pairwise_excluded(self):
        mean = np.array([[0.1, 0.2], [0.3, np.nan]])
        std = np.array([[0.4, 0.3], [0.2, 0.5]])
        r, _ = sensitivity_correlation(mean, std)
        assert r == pytest.approx(-1.0, abs=1e-9)

    def test_zero_variance_undefined(self):
        mean = np.full((2, 2), 0.5)
        std = np.array([[0.1, 0.2], [0.3, 0.4]])
        with pytest.raises(UndefinedMetricError):
            sensitivity_correlation(mean, std)

    def test_too_few_cells(self):
        with pytest.raises(PreconditionError):
            sensitivity_correlation(np.array([[0.1, 0.2]]),
                                    np.array([[0.3, 0.4]]))

    def test_shape_mismatch(self):
        with pytest.raises(PreconditionError):
            sensitivity_correlation(np.ones((2, 2)), np.ones((2, 3)))

    def test_p_value_two_sided(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(4, 4))
        y = -x + 0.6 * rng.normal(size=(4, 4))
        r, p = sensitivity_correlation(x, y)
        assert -1.0 < r < 0.0
        assert 0.0 < p < 1.0


class TestStackGrids:
    def test_rows_sorted_by_axis1(self):
        g2 = SweepGrid([2], [5, 6], [[3.0, 4.0]])
        g1 = SweepGrid([1], [5, 6], [[1.0, 2.0]])
        stacked = stack_grids([g2, g1])
        assert stacked.axis1 == (1, 2)
        np.testing.assert_allclose(stacked.values,
                                   [[1.0, 2.0], [3.0, 4.0]])

    def test_axis2_mismatch(self):
        g1 = SweepGrid([1], [5, 6], [[1.0, 2.0]])
        g2 = SweepGrid([2], [5, 7], [[3.0, 4.0]])
        with pytest.raises(PreconditionError):
            stack_grids([g1, g2])

    def test_duplicate_axis1(self):
        g1 = SweepGrid([1], [5], [[1.0]])
        g2 = SweepGrid([1], [5], [[2.0]])
        with pytest.raises(PreconditionError):
            stack_grids([g1, g2])
