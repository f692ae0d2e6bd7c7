import numpy as np
import pytest

from cfardetect.detectors import mf_statistic, nmf_statistic, scm, tyler
from cfardetect.errors import ConvergenceError
from cfardetect.linalg import cholesky, toeplitz
from cfardetect.sim import (
    COMPOUND, Scenario, draw_complex_gaussian, steering_vector, substream,
    synthesize_sample,
)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


class TestMfStatistic:
    def test_matched_input_identity_covariance(self):
        p = steering_vector(2, 16)
        assert np.isclose(mf_statistic(p, np.eye(16), p), 16.0)

    def test_orthogonal_input(self):
        p = steering_vector(0, 16)
        z = steering_vector(1, 16)  # DFT vectors are orthogonal
        assert mf_statistic(z, np.eye(16), p) < 1e-24

    def test_scalar_covariance_halves(self):
        p = steering_vector(3, 16)
        assert np.isclose(mf_statistic(p, 2.0 * np.eye(16), p), 8.0)

    def test_phase_invariance(self):
        rng = np.random.default_rng(0)
        sigma = toeplitz(0.5, 8) + np.eye(8)
        p = steering_vector(2, 8)
        z = random_complex(rng, 8)
        base = mf_statistic(z, sigma, p)
        for theta in (0.3, 1.7, 5.0):
            assert np.isclose(mf_statistic(np.exp(1j * theta) * z, sigma, p), base)

    def test_exponential_null_distribution(self):
        # under H0 with the true total covariance the statistic is Exp(1)
        scn = Scenario()
        sigma = scn.total_covariance()
        p = steering_vector(5, scn.m)
        rng = substream(11, 1, 0)
        z = draw_complex_gaussian(sigma, 100_000, rng)
        si_p = np.linalg.solve(sigma, p)
        stats = np.abs(z @ si_p.conj()) ** 2 / np.vdot(p, si_p).real
        # spot check the vectorized evaluation against the scalar operation
        assert np.isclose(stats[0], mf_statistic(z[0], sigma, p))
        xs = np.sort(stats)
        ecdf = np.arange(1, len(xs) + 1) / len(xs)
        ks = np.max(np.abs(ecdf - (1.0 - np.exp(-xs))))
        assert ks < 0.01


class TestNmfStatistic:
    def test_collinear_gives_one(self):
        p = steering_vector(4, 16)
        sigma = toeplitz(0.3, 16) + np.eye(16)
        for beta in (1.0, -2.5, 0.1 + 3j):
            assert np.isclose(nmf_statistic(beta * p, sigma, p), 1.0)

    def test_orthogonal_gives_zero(self):
        p = steering_vector(0, 16)
        z = steering_vector(4, 16)
        assert nmf_statistic(z, np.eye(16), p) < 1e-24

    def test_invariance_to_scalings(self):
        rng = np.random.default_rng(1)
        sigma = toeplitz(0.5, 8) + np.eye(8)
        p = steering_vector(1, 8)
        z = random_complex(rng, 8)
        base = nmf_statistic(z, sigma, p)
        assert abs(nmf_statistic((2 - 1j) * z, sigma, p) - base) < 1e-12
        assert abs(nmf_statistic(z, 3.7 * sigma, p) - base) < 1e-12

    def test_rejects_zero_cell(self):
        with pytest.raises(ValueError):
            nmf_statistic(np.zeros(4), np.eye(4), np.ones(4))

    def test_beta_null_tail(self):
        # under Gaussian H0 with the true covariance the statistic is
        # Beta(1, m-1): P(s > lam) = (1 - lam)^(m-1)
        scn = Scenario()
        sigma = scn.total_covariance()
        m = scn.m
        p = steering_vector(3, m)
        rng = substream(12, 1, 0)
        z = draw_complex_gaussian(sigma, 100_000, rng)
        si_p = np.linalg.solve(sigma, p)
        si_z = np.linalg.solve(sigma, z.T).T  # row i holds sigma^{-1} z_i
        num = np.abs(z @ si_p.conj()) ** 2
        den = np.vdot(p, si_p).real * np.einsum("ij,ij->i", z.conj(), si_z).real
        stats = num / den
        assert np.isclose(stats[0], nmf_statistic(z[0], sigma, p))
        lam = 1.0 - 0.01 ** (1.0 / (m - 1))  # analytic Pfa = 0.01 threshold
        assert abs(np.mean(stats > lam) - 0.01) < 0.003


class TestScm:
    def test_rank_one(self):
        z = np.array([1 + 1j, 2.0])
        block = np.column_stack([z] * 5)
        est = scm(block, diagonal_loading=1e-9)
        assert np.allclose(est.matrix - 1e-9 * np.eye(2), np.outer(z, z.conj()))

    def test_consistency(self):
        sigma = toeplitz(0.5, 4)
        rng = substream(13, 1, 0)
        z = draw_complex_gaussian(sigma, 10_000, rng).T
        est = scm(z)
        err = np.linalg.norm(est.matrix - sigma) / np.linalg.norm(sigma)
        assert err < 0.05
        assert est.estimator_tag == "scm"
        assert est.k_used == 10_000

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            scm(np.zeros((4, 0)))

    def test_rejects_singular_without_loading(self):
        rng = np.random.default_rng(2)
        with pytest.raises(ValueError):
            scm(random_complex(rng, 8, 4))


class TestTyler:
    def test_dimension_one_forced_by_trace(self):
        z = np.array([[1.0, -2.0, 3.0, 0.5]])
        est = tyler(z)
        assert np.allclose(est.matrix, [[1.0]])

    def test_per_column_scale_invariance(self):
        rng = np.random.default_rng(3)
        z = random_complex(rng, 6, 40)
        scales = rng.uniform(0.01, 100.0, size=40)
        a = tyler(z).matrix
        b = tyler(z * scales[None, :]).matrix
        assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-7

    def test_consistency_on_compound_data(self):
        sigma = toeplitz(0.5, 4)
        chol = cholesky(sigma)
        rng = substream(14, 1, 0)
        g = draw_complex_gaussian(sigma, 1000, rng, chol=chol).T
        tau = rng.gamma(1.0, 1.0, size=1000)
        z = np.sqrt(tau)[None, :] * g
        est = tyler(z)
        target = sigma * (4.0 / np.trace(sigma).real)
        err = np.linalg.norm(est.matrix - target) / np.linalg.norm(target)
        assert err < 0.1

    def test_trace_normalization(self):
        rng = np.random.default_rng(4)
        est = tyler(random_complex(rng, 8, 30))
        assert abs(np.trace(est.matrix).real - 8.0) < 1e-9 * 8.0

    def test_residuals_decrease_near_convergence(self):
        scn = Scenario()
        s = synthesize_sample(scn, False, rng=substream(15, 1, 0))
        est = tyler(s.secondary)
        tail = est.residuals[-10:]
        assert all(a >= b for a, b in zip(tail, tail[1:]))

    def test_rejects_zero_column(self):
        z = np.ones((2, 5), dtype=complex)
        z[:, 3] = 0.0
        with pytest.raises(ValueError):
            tyler(z)

    def test_rejects_too_few_columns(self):
        with pytest.raises(ValueError):
            tyler(np.ones((4, 4), dtype=complex))

    def test_convergence_error_carries_residual(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ConvergenceError) as exc_info:
            tyler(random_complex(rng, 6, 40), max_iter=2)
        assert exc_info.value.residual is not None

    def test_fixed_point_on_compound_secondary(self):
        scn = Scenario(clutter_family=COMPOUND)
        s = synthesize_sample(scn, False, rng=substream(16, 1, 0))
        est = tyler(s.secondary, tol=1e-8)
        assert est.residuals[-1] < 1e-8
        assert est.iterations <= 100
