import numpy as np
import pytest

from countratio.exceptions import DataError, NumericalError, ParameterError
from countratio.kernels import (
    BinGrid,
    KernelMatrix,
    equivalent_kernel,
    weighted_equivalent_kernel,
    wendland_kernel,
)


def random_spd(d, seed=0, ridge=0.1):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d))
    return a @ a.T + ridge * np.eye(d)


class TestBinGrid:
    def test_regular_grid(self):
        grid = BinGrid.regular(4, -1.0, 1.0)
        np.testing.assert_allclose(grid.centers, [-0.75, -0.25, 0.25, 0.75])
        np.testing.assert_allclose(grid.widths, 0.5)

    def test_rejects_duplicate_centers(self):
        with pytest.raises(DataError):
            BinGrid(centers=np.array([0.0, 0.0, 1.0]), widths=np.ones(3))

    def test_rejects_single_bin(self):
        with pytest.raises(DataError):
            BinGrid.regular(1)

    def test_rejects_bad_widths(self):
        with pytest.raises(DataError):
            BinGrid(centers=np.array([0.0, 1.0]), widths=np.array([1.0, 0.0]))


class TestWendland:
    def test_diagonal_is_variance(self):
        km = wendland_kernel(BinGrid.regular(10), 0.75, variance=2.5)
        np.testing.assert_allclose(np.diag(km.matrix), 2.5)

    def test_zero_at_support_boundary(self):
        km = wendland_kernel(np.array([0.0, 0.75]), 0.75)
        assert km.matrix[0, 1] == 0.0

    def test_distant_points_give_identity(self):
        # All pairwise distances (1 and 2) exceed the support width.
        km = wendland_kernel(np.array([-1.0, 0.0, 1.0]), 0.75)
        np.testing.assert_allclose(km.matrix, np.eye(3))

    def test_closed_form_value(self):
        rho = 2.0
        km = wendland_kernel(np.array([0.0, 0.5]), rho, variance=1.0)
        r = 0.5
        expected = (1 - r / rho) ** 4 * (4 * r / rho + 1)
        assert km.matrix[0, 1] == pytest.approx(expected, rel=1e-14)

    def test_two_dimensional_centers(self):
        centers = np.array([[0.0, 0.0], [0.3, 0.4], [5.0, 5.0]])
        km = wendland_kernel(centers, 1.0)
        # |c2 - c1| = 0.5, |c3 - .| > 1 so those entries vanish.
        assert km.matrix[0, 1] > 0.0
        assert km.matrix[0, 2] == 0.0

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            wendland_kernel(np.array([0.0, 1.0]), 0.0)
        with pytest.raises(ParameterError):
            wendland_kernel(np.array([0.0, 1.0]), 1.0, variance=-1.0)


class TestKernelMatrix:
    def test_rejects_asymmetric(self):
        m = np.eye(3)
        m[0, 1] = 1e-6
        with pytest.raises(DataError):
            KernelMatrix.from_matrix(m)

    def test_rejects_indefinite(self):
        with pytest.raises(DataError):
            KernelMatrix.from_matrix(np.diag([1.0, -0.5]))

    def test_eigendecomposition_reconstructs(self):
        km = KernelMatrix.from_matrix(random_spd(6, seed=3))
        recon = (km.eigenvectors * km.eigenvalues) @ km.eigenvectors.T
        assert np.abs(recon - km.matrix).max() < 1e-8 * np.abs(km.matrix).max()
        assert np.all(np.diff(km.eigenvalues) <= 0.0)


class TestEquivalentKernel:
    def test_identity_kernel(self):
        km = KernelMatrix.from_matrix(np.eye(4))
        np.testing.assert_allclose(equivalent_kernel(km, 1.0, 1.0).matrix, 0.5 * np.eye(4))
        np.testing.assert_allclose(equivalent_kernel(km, 2.0, 3.0).matrix, 0.2 * np.eye(4))

    def test_inverse_identity(self):
        km = KernelMatrix.from_matrix(random_spd(5, seed=1))
        c, gamma = 1.0, 1.0
        eq = equivalent_kernel(km, c, gamma)
        lhs = (c * np.eye(5) + gamma * np.linalg.inv(km.matrix)) @ eq.matrix
        assert np.abs(lhs - np.eye(5)).max() < 1e-8

    def test_matrix_times_inverse(self):
        km = KernelMatrix.from_matrix(random_spd(7, seed=2))
        eq = equivalent_kernel(km, 1.3, 0.7)
        assert np.abs(eq.matrix @ eq.inverse - np.eye(7)).max() < 1e-8

    def test_joint_scaling_invariance(self):
        # (K, gamma) -> (s K, s gamma) leaves the equivalent kernel unchanged.
        km = KernelMatrix.from_matrix(random_spd(5, seed=4))
        s = 7.5
        km_scaled = KernelMatrix.from_matrix(s * km.matrix)
        eq = equivalent_kernel(km, c=2.0, gamma=1.5)
        eq_scaled = equivalent_kernel(km_scaled, c=2.0, gamma=s * 1.5)
        np.testing.assert_allclose(eq.matrix, eq_scaled.matrix, atol=1e-12)

    def test_eigenvalue_range(self):
        km = KernelMatrix.from_matrix(random_spd(6, seed=5))
        c = 2.0
        eq = equivalent_kernel(km, c=c, gamma=1.0)
        vals = np.linalg.eigvalsh(eq.matrix)
        assert np.all(vals > 0.0)
        assert np.all(vals < 1.0 / c)

    def test_rank_deficient_kernel_floored(self):
        v = np.arange(1.0, 5.0)
        km = KernelMatrix.from_matrix(np.outer(v, v))
        eq = equivalent_kernel(km, 1.0, 1.0)
        assert eq.n_floored == 3
        assert np.all(np.linalg.eigvalsh(eq.matrix) > 0.0)

    def test_degenerate_kernel_rejected(self):
        km = KernelMatrix.from_matrix(np.zeros((3, 3)))
        with pytest.raises(NumericalError):
            equivalent_kernel(km, 1.0, 1.0)

    def test_parameter_validation(self):
        km = KernelMatrix.from_matrix(np.eye(3))
        with pytest.raises(ParameterError):
            equivalent_kernel(km, c=0.0)
        with pytest.raises(ParameterError):
            equivalent_kernel(km, gamma=-1.0)


class TestWeightedEquivalentKernel:
    def test_matches_uniform_case(self):
        km = KernelMatrix.from_matrix(random_spd(5, seed=6))
        uniform = equivalent_kernel(km, c=3.0, gamma=1.2)
        weighted = weighted_equivalent_kernel(km, c=np.full(5, 3.0), gamma=1.2)
        np.testing.assert_allclose(weighted.matrix, uniform.matrix, atol=1e-10)
        np.testing.assert_allclose(weighted.inverse, uniform.inverse, atol=1e-8)

    def test_direct_inverse(self):
        km = KernelMatrix.from_matrix(random_spd(5, seed=7))
        c = np.array([0.0, 1.0, 2.0, 3.0, 0.5])
        eq = weighted_equivalent_kernel(km, c=c, gamma=0.8)
        direct = np.linalg.inv(np.diag(c) + 0.8 * np.linalg.inv(km.matrix))
        np.testing.assert_allclose(eq.matrix, direct, atol=1e-10)
