import numpy as np
import pytest

from countratio.exceptions import DataError
from countratio.synthetic import (
    TOY_QOI_MODEL,
    simulate_binned_poisson,
    toy_denominator_intensity,
    toy_numerator_intensity,
    toy_qoi_problem,
    toy_ratio,
    toy_ratio_problem,
)


class TestIntensityFunctions:
    def test_values_at_center(self):
        assert toy_numerator_intensity(0.0) == pytest.approx(10.0)
        assert toy_denominator_intensity(0.0) == pytest.approx(18.0)
        assert toy_ratio(0.0) == pytest.approx(10.0 / 18.0)

    def test_values_at_endpoints(self):
        for x in (-1.0, 1.0):
            assert toy_numerator_intensity(x) == pytest.approx(35.0)
            assert toy_denominator_intensity(x) == pytest.approx(10.0)
            assert toy_ratio(x) == pytest.approx(3.5)


class TestSimulateBinnedPoisson:
    def test_zero_intensity_gives_zero_counts(self):
        data = simulate_binned_poisson(np.zeros(5), realizations=3, seed=0)
        assert np.all(data.counts == 0.0)

    def test_mean_matches_intensity(self):
        data = simulate_binned_poisson(np.full(4, 100.0), realizations=10**5, seed=1)
        means = data.counts.mean(axis=1)
        assert np.all(np.abs(means - 100.0) < 3.0 * np.sqrt(100.0 / 10**5))

    def test_deterministic(self):
        a = simulate_binned_poisson(np.array([3.0, 7.0]), realizations=4, seed=9)
        b = simulate_binned_poisson(np.array([3.0, 7.0]), realizations=4, seed=9)
        np.testing.assert_array_equal(a.counts, b.counts)

    def test_rejects_negative_intensity(self):
        with pytest.raises(DataError):
            simulate_binned_poisson(np.array([1.0, -2.0]))


class TestToyProblems:
    def test_bin_structure(self):
        problem = toy_ratio_problem(50, seed=0)
        assert problem.grid.n_bins == 50
        assert problem.grid.centers[0] == pytest.approx(-1.0 + 0.02)
        assert problem.grid.centers[-1] == pytest.approx(1.0 - 0.02)
        np.testing.assert_allclose(problem.grid.widths, 0.04)

    def test_truth_evaluated_at_centers(self):
        problem = toy_ratio_problem(10, seed=0)
        np.testing.assert_allclose(problem.true_ratio, toy_ratio(problem.grid.centers))

    def test_deterministic(self):
        a = toy_ratio_problem(25, seed=3)
        b = toy_ratio_problem(25, seed=3)
        np.testing.assert_array_equal(a.counts_num.counts, b.counts_num.counts)
        np.testing.assert_array_equal(a.counts_denom.counts, b.counts_denom.counts)

    def test_counts_have_poisson_means(self):
        # Pool many seeds at a fixed bin and compare to the intensity there.
        totals = []
        for seed in range(400):
            problem = toy_ratio_problem(10, seed=seed)
            totals.append(problem.counts_num.counts[0, 0])
        lam = toy_numerator_intensity(toy_ratio_problem(10, seed=0).grid.centers[0])
        se = np.sqrt(lam / 400.0)
        assert abs(np.mean(totals) - lam) < 3.0 * se

    def test_qoi_problem_shares_counts(self):
        ratio = toy_ratio_problem(20, seed=7)
        qoi = toy_qoi_problem(20, seed=7)
        np.testing.assert_array_equal(ratio.counts_num.counts, qoi.counts_num.counts)
        np.testing.assert_array_equal(ratio.counts_denom.counts, qoi.counts_denom.counts)

    def test_qoi_truth_and_model_consistency(self):
        problem = toy_qoi_problem(15, seed=2)
        np.testing.assert_allclose(problem.true_qoi, 5.0 * (problem.true_ratio**2 + 2.0))
        # Forward model applied to the truth recovers the ratio.
        np.testing.assert_allclose(
            problem.model.qoi_to_ratio(problem.true_qoi), problem.true_ratio, rtol=1e-12
        )
        assert problem.model == TOY_QOI_MODEL

    def test_qoi_value_at_center(self):
        # Z(0) = 10/18 so T(0) = 5 ((10/18)^2 + 2).
        expected = 5.0 * ((10.0 / 18.0) ** 2 + 2.0)
        assert expected == pytest.approx(11.5432, abs=1e-4)
        problem = toy_qoi_problem(2, seed=0)
        mid = 0.5 * (problem.grid.centers[0] + problem.grid.centers[1])
        assert mid == pytest.approx(0.0)
