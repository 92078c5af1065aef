import numpy as np
import pytest

from countratio.exceptions import DataError, NumericalError
from countratio.kernels import (
    BinGrid,
    KernelMatrix,
    equivalent_kernel,
    wendland_kernel,
)
from countratio.permanental import (
    CountData,
    GammaPosterior,
    log_posterior,
    log_posterior_gradient,
    moment_matched_gamma,
    permprocest,
)


def identity_eq(d, c=1.0, gamma=1.0):
    return equivalent_kernel(KernelMatrix.from_matrix(np.eye(d)), c=c, gamma=gamma)


def random_instance(rng, d):
    a_mat = rng.normal(size=(d, d))
    km = KernelMatrix.from_matrix(a_mat @ a_mat.T + 0.5 * np.eye(d))
    eq = equivalent_kernel(km, c=float(rng.uniform(0.5, 2.0)), gamma=float(rng.uniform(0.5, 2.0)))
    counts = rng.poisson(8.0, size=d).astype(float)
    while True:
        psi = rng.normal(1.0, 0.3, size=d)
        if np.all(np.abs((eq.matrix @ psi)[counts > 0]) > 1e-3):
            return eq, counts, psi


class TestCountData:
    def test_vector_becomes_column(self):
        data = CountData.from_array(np.array([1.0, 2.0, 0.0]))
        assert data.counts.shape == (3, 1)
        assert data.n_realizations == 1

    def test_totals_and_exposures_with_missing(self):
        data = CountData(np.array([[1.0, np.nan], [2.0, 3.0]]))
        np.testing.assert_array_equal(data.totals, [1.0, 5.0])
        np.testing.assert_array_equal(data.exposures, [1.0, 2.0])
        assert not data.is_complete

    def test_rejects_negative(self):
        with pytest.raises(DataError):
            CountData(np.array([[1.0, -1.0]]))

    def test_rejects_empty_column(self):
        with pytest.raises(DataError):
            CountData(np.array([[1.0, np.nan], [2.0, np.nan]]))


class TestLogPosterior:
    def test_hand_computed_value(self):
        # Ktilde = I/2, c = 1, a = (1, 2, 3), psi = (2, 2, 2):
        # f = (1, 1, 1), so 6 log(1/2) - psi.f/2 = 6 log(1/2) - 3.
        eq = identity_eq(3)
        value = log_posterior(np.full(3, 2.0), np.array([1.0, 2.0, 3.0]), eq, c=1.0)
        assert value == pytest.approx(6.0 * np.log(0.5) - 3.0, rel=1e-12)

    def test_zero_counts_pure_quadratic(self):
        eq = identity_eq(4)
        psi = np.array([1.0, -2.0, 0.5, 0.0])
        expected = -0.5 * psi @ (eq.matrix @ psi)
        assert log_posterior(psi, np.zeros(4), eq) == pytest.approx(expected, rel=1e-12)
        assert log_posterior(np.zeros(4), np.zeros(4), eq) == 0.0

    def test_barrier_is_minus_infinity(self):
        eq = identity_eq(3)
        assert log_posterior(np.zeros(3), np.array([1.0, 0.0, 0.0]), eq) == -np.inf

    def test_gradient_zero_counts(self):
        eq = identity_eq(4)
        psi = np.array([0.3, -1.0, 2.0, 0.7])
        np.testing.assert_allclose(
            log_posterior_gradient(psi, np.zeros(4), eq), -(eq.matrix @ psi), rtol=1e-12
        )

    def test_gradient_barrier_raises(self):
        eq = identity_eq(2)
        with pytest.raises(NumericalError):
            log_posterior_gradient(np.zeros(2), np.array([1.0, 0.0]), eq)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            eq, counts, psi = random_instance(rng, 6)
            grad = log_posterior_gradient(psi, counts, eq)
            fd = np.empty(6)
            for i in range(6):
                e = np.zeros(6)
                e[i] = 1e-6 * (1.0 + abs(psi[i]))
                fd[i] = (
                    log_posterior(psi + e, counts, eq) - log_posterior(psi - e, counts, eq)
                ) / (2.0 * e[i])
            assert np.max(np.abs(grad - fd)) / np.max(np.abs(grad)) < 1e-5


class TestMomentMatch:
    def test_worked_example(self):
        gp = moment_matched_gamma(1.0, 0.5, 1.0)
        assert gp.shape == pytest.approx(0.9, rel=1e-12)
        assert gp.rate == pytest.approx(1.2, rel=1e-12)
        assert gp.mean == pytest.approx(0.75, rel=1e-12)
        assert gp.variance == pytest.approx(0.625, rel=1e-12)

    def test_moments_identity_randomized(self):
        rng = np.random.default_rng(10)
        mu = rng.normal(0.0, 3.0, size=50)
        s2 = rng.uniform(0.05, 4.0, size=50)
        c = rng.uniform(0.2, 5.0, size=50)
        for i in range(50):
            gp = moment_matched_gamma(mu[i], s2[i], c[i])
            mean = 0.5 * c[i] * (mu[i] ** 2 + s2[i])
            var = 0.5 * c[i] ** 2 * s2[i] * (2.0 * mu[i] ** 2 + s2[i])
            assert gp.mean == pytest.approx(mean, rel=1e-12)
            assert gp.variance == pytest.approx(var, rel=1e-12)

    def test_against_monte_carlo(self):
        gp = moment_matched_gamma(1.0, 0.5, 1.0)
        f = np.random.default_rng(5).normal(1.0, np.sqrt(0.5), size=10**6)
        lam = 0.5 * f**2
        se_mean = lam.std() / np.sqrt(lam.size)
        m4 = np.mean((lam - lam.mean()) ** 4)
        se_var = np.sqrt((m4 - lam.var() ** 2) / lam.size)
        assert abs(lam.mean() - gp.mean) < 3.0 * se_mean
        assert abs(lam.var() - gp.variance) < 3.0 * se_var


class TestPermprocest:
    def test_dimension_mismatch(self):
        km = wendland_kernel(BinGrid.regular(5), 0.75)
        with pytest.raises(DataError):
            permprocest(np.ones(4), km)

    def test_first_order_condition_at_map(self):
        km = wendland_kernel(BinGrid.regular(20), 0.75)
        counts = np.random.default_rng(0).poisson(15.0, size=20).astype(float)
        fit = permprocest(counts, km)
        assert fit.converged
        grad = log_posterior_gradient(fit.psi_hat, counts, fit.eq, fit.c)
        assert np.max(np.abs(grad)) < fit.grad_tol

    def test_map_is_nonnegative_and_structural(self):
        km = wendland_kernel(BinGrid.regular(15), 0.75)
        counts = np.random.default_rng(1).poisson(5.0, size=15).astype(float)
        counts[3] = 0.0
        fit = permprocest(counts, km)
        assert np.all(fit.lambda_hat >= 0.0)
        np.testing.assert_allclose(fit.lambda_hat, 0.5 * fit.c * fit.f_hat**2, rtol=1e-12)

    def test_zero_count_bins_complete(self):
        km = wendland_kernel(BinGrid.regular(30), 0.75)
        counts = np.random.default_rng(2).poisson(0.4, size=30).astype(float)
        assert (counts == 0).sum() > 5
        fit = permprocest(counts, km)
        assert fit.converged
        assert np.all(fit.gamma_post.shape > 0.0)
        assert np.all(fit.gamma_post.rate > 0.0)

    def test_laplace_matches_finite_difference_hessian(self):
        km = wendland_kernel(BinGrid.regular(8), 0.75)
        counts = np.random.default_rng(4).poisson(15.0, size=8) + 1.0
        fit = permprocest(counts, km)
        d, h = 8, 1e-4
        hess = np.zeros((d, d))
        for i in range(d):
            for j in range(d):
                ei = np.zeros(d)
                ej = np.zeros(d)
                ei[i] = h
                ej[j] = h
                hess[i, j] = (
                    log_posterior(fit.psi_hat + ei + ej, counts, fit.eq)
                    - log_posterior(fit.psi_hat + ei - ej, counts, fit.eq)
                    - log_posterior(fit.psi_hat - ei + ej, counts, fit.eq)
                    + log_posterior(fit.psi_hat - ei - ej, counts, fit.eq)
                ) / (4.0 * h * h)
        hess = 0.5 * (hess + hess.T)
        # The fitted covariance lives in f-space: sandwich the psi-space
        # inverse Hessian with Ktilde.
        sigma_fd = fit.eq.matrix @ np.linalg.inv(-hess) @ fit.eq.matrix
        err = np.abs(sigma_fd - fit.sigma_hat).max() / np.abs(fit.sigma_hat).max()
        assert err < 1e-4

    def test_constant_intensity_recovery(self):
        km = wendland_kernel(BinGrid.regular(50), 0.75)
        hits = []
        for seed in range(4):
            counts = np.random.default_rng(seed).poisson(20.0, size=50).astype(float)
            fit = permprocest(counts, km)
            sd = np.sqrt(fit.gamma_post.variance)
            hits.append(int(np.sum(np.abs(fit.lambda_hat - 20.0) <= 3.0 * sd)))
        assert np.mean(hits) >= 47.0

    def test_pooled_realizations_objective_equivalence(self):
        # The exposure folding must reproduce the product likelihood: R
        # identical realizations == totals with an R-scaled quadratic term.
        rng = np.random.default_rng(6)
        km = KernelMatrix.from_matrix(random_spd_local(6, rng))
        counts = rng.poisson(10.0, size=6).astype(float)
        stacked = np.column_stack([counts, counts])
        fit = permprocest(stacked, km, g=1.3, c=0.8)
        eq = fit.eq
        k_inv = np.linalg.inv(km.matrix)
        for _ in range(5):
            psi = rng.normal(1.0, 0.2, size=6)
            f = eq.matrix @ psi
            if np.any(f[2.0 * counts > 0] == 0.0):
                continue
            manual = float(
                np.sum(2.0 * counts * np.log(0.5 * 0.8 * f**2))
                - 2.0 * 0.5 * 0.8 * f @ f
                - 0.5 * 1.3 * f @ k_inv @ f
            )
            value = log_posterior(psi, 2.0 * counts, eq, c=0.8)
            assert value == pytest.approx(manual, rel=1e-9)

    def test_identical_realizations_match_scaled_exposure(self):
        km = wendland_kernel(BinGrid.regular(12), 0.75)
        counts = np.random.default_rng(7).poisson(12.0, size=12).astype(float)
        stacked = np.column_stack([counts, counts])
        fit2 = permprocest(stacked, km, c=1.0)
        fit_scaled = permprocest(2.0 * counts, km, c=2.0)
        np.testing.assert_allclose(fit2.lambda_hat, 0.5 * fit_scaled.lambda_hat, rtol=1e-6)

    def test_missing_entries_ragged_exposure(self):
        km = wendland_kernel(BinGrid.regular(10), 0.75)
        rng = np.random.default_rng(8)
        counts = rng.poisson(9.0, size=(10, 3)).astype(float)
        counts[rng.random(size=counts.shape) < 0.3] = np.nan
        if np.any(np.isnan(counts).all(axis=1)):
            counts[np.isnan(counts).all(axis=1), 0] = 1.0
        fit = permprocest(counts, km)
        assert fit.converged
        assert np.all(np.isfinite(fit.lambda_hat))
        assert np.all(fit.lambda_hat >= 0.0)

    def test_non_convergence_is_flagged_not_raised(self):
        km = wendland_kernel(BinGrid.regular(25), 0.75)
        counts = np.random.default_rng(9).poisson(25.0, size=25).astype(float)
        fit = permprocest(counts, km, maxiter=1)
        assert not fit.converged
        assert fit.iterations == 1


def random_spd_local(d, rng):
    a = rng.normal(size=(d, d))
    return a @ a.T + 0.5 * np.eye(d)


class TestGammaPosterior:
    def test_validation(self):
        with pytest.raises(DataError):
            GammaPosterior(shape=np.array([1.0, -1.0]), rate=np.array([1.0, 1.0]))

    def test_moments(self):
        gp = GammaPosterior(shape=np.array([4.0]), rate=np.array([2.0]))
        assert gp.mean[0] == 2.0
        assert gp.variance[0] == 1.0
