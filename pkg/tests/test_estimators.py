"""One-step HOSVD, HOOI, bias brackets and the matrix estimators."""

import numpy as np
import pytest

from app.errors import ParameterError
from app.services.estimators import (
    TargetRanks,
    hooi_refine,
    hosvd_factors,
    hosvd_truncate,
    matrix_bias,
    one_step_hosvd,
    one_step_hosvd_batch,
    sample_cov_truncated,
    sample_covariance,
    truncated_svd_estimate,
    tucker_bias_bracket,
)
from app.services.linalg import random_orthonormal, sin_theta
from app.services.rng import generator, standard_normal
from app.services.synth import NoiseSpec, TensorSignalSpec, gen_noise_tensor, gen_tensor_signal
from app.services.tensor import TuckerDecomposition, tucker_rank, tucker_reconstruct


def _low_rank_tensor(dims, ranks, i=0):
    gen = generator(77, "low-rank", i)
    core = standard_normal(gen, tuple(ranks))
    factors = tuple(random_orthonormal(p, r, gen) for p, r in zip(dims, ranks))
    return tucker_reconstruct(TuckerDecomposition(core, factors))


class TestTargetRanks:
    def test_parse_single(self):
        assert TargetRanks.parse("4") == TargetRanks(4, 4, 4)

    def test_parse_triple(self):
        assert TargetRanks.parse("2,3,4").as_tuple() == (2, 3, 4)

    @pytest.mark.parametrize("text", ["", "a", "1,2", "1,2,3,4", "0"])
    def test_parse_rejects(self, text):
        with pytest.raises(ParameterError):
            TargetRanks.parse(text)

    def test_rank_above_dimension(self):
        with pytest.raises(ParameterError):
            TargetRanks(3, 2, 2).validate((2, 4, 4))

    def test_valid(self):
        TargetRanks(4, 2, 2).validate((6, 6, 6))

    @pytest.mark.parametrize("ranks, dims", [((5, 2, 2), (6, 6, 6)), ((2, 2, 5), (2, 2, 5)), ((3, 1, 1), (4, 4, 4))])
    def test_only_dimensions_bound_ranks(self, ranks, dims):
        TargetRanks(*ranks).validate(dims)


class TestOneStepHOSVD:
    def test_exact_recovery(self):
        """100 noiseless instances of exact Tucker rank are returned unchanged."""
        for i in range(100):
            dims = (4 + i % 3, 5 + i % 2, 4 + (i // 3) % 3)
            ranks = (1 + i % 3, 1 + (i // 3) % 3, 1 + (i // 9) % 3)
            r1, r2, r3 = ranks
            # only ranks a Tucker tensor can actually have
            if r1 > r2 * r3 or r2 > r1 * r3 or r3 > r1 * r2:
                continue
            X = _low_rank_tensor(dims, ranks, i)
            result = one_step_hosvd(X, ranks)
            assert np.linalg.norm(result.estimate - X) <= 1e-10 * np.linalg.norm(X)

    def test_full_rank_is_identity(self, gaussian):
        Y = gaussian("full", 3, 4, 5)
        np.testing.assert_array_equal(one_step_hosvd(Y, (3, 4, 5)).estimate, Y)

    def test_full_rank_beyond_other_ranks(self, gaussian):
        Y = gaussian("full-2x2x5", 2, 2, 5)
        result = one_step_hosvd(Y, (2, 2, 5))
        np.testing.assert_array_equal(result.estimate, Y)
        for U, p in zip(result.refined_factors, Y.shape):
            np.testing.assert_array_equal(U.basis, np.eye(p))

    def test_single_full_mode_uses_identity(self, gaussian):
        result = one_step_hosvd(gaussian("full-mode", 2, 3, 5), (2, 1, 2))
        np.testing.assert_array_equal(result.refined_factors[0].basis, np.eye(2))
        assert all(a <= b for a, b in zip(tucker_rank(result.estimate, 1e-8), (2, 1, 2)))

    def test_rank_above_compressed_columns_keeps_factor(self, gaussian):
        result = one_step_hosvd(gaussian("wide-rank", 4, 4, 4), (3, 1, 1))
        np.testing.assert_array_equal(result.refined_factors[0].basis, result.initial_factors[0].basis)
        assert result.decomposition.ranks == (3, 1, 1)

    def test_rank_above_unfolding_columns_is_completed(self, gaussian):
        Y = gaussian("completed", 1, 2, 5)
        result = one_step_hosvd(Y, (1, 2, 3))
        assert result.initial_factors[2].basis.shape == (5, 3)
        np.testing.assert_allclose(result.estimate, Y, rtol=0, atol=1e-12)

    def test_matches_straight_line_computation(self, gaussian):
        """Three unfolding SVDs, then one Kronecker-compressed SVD per mode."""
        Y = gaussian("straight-line", 4, 4, 4)

        def unfold(X, k):
            return np.moveaxis(X, k, 0).reshape(X.shape[k], -1)

        def top(M, r):
            return np.linalg.svd(M)[0][:, :r]

        U = [top(unfold(Y, k), 2) for k in range(3)]
        V = [
            top(unfold(Y, 0) @ np.kron(U[1], U[2]), 2),
            top(unfold(Y, 1) @ np.kron(U[0], U[2]), 2),
            top(unfold(Y, 2) @ np.kron(U[0], U[1]), 2),
        ]
        P = [V_k @ V_k.T for V_k in V]
        expected = np.einsum("ia,jb,kc,abc->ijk", P[0], P[1], P[2], Y)

        result = one_step_hosvd(Y, (2, 2, 2))
        np.testing.assert_allclose(result.estimate, expected, rtol=0, atol=1e-9)
        for U_hat, P_k in zip(result.refined_factors, P):
            np.testing.assert_allclose(U_hat.projector(), P_k, rtol=0, atol=1e-9)

    @pytest.mark.parametrize("dims, ranks", [((6, 5, 4), (3, 2, 2)), ((2, 2, 5), (2, 2, 5)), ((4, 4, 4), (3, 1, 1))])
    def test_decomposition_reconstructs_estimate(self, gaussian, dims, ranks):
        result = one_step_hosvd(gaussian("reconstruct", *dims), ranks)
        np.testing.assert_allclose(tucker_reconstruct(result.decomposition), result.estimate, rtol=0, atol=1e-10)

    def test_estimates_never_grow(self, gaussian):
        for i in range(20):
            Y = gaussian("contract", 5, 6, 4, replicate=i)
            ranks = (1 + i % 5, 1 + i % 3, 1 + i % 4)
            assert np.linalg.norm(one_step_hosvd(Y, ranks).estimate) <= np.linalg.norm(Y) + 1e-12
            M = gaussian("contract-m", 7, 5, replicate=i)
            assert np.linalg.norm(truncated_svd_estimate(M, 1 + i % 5)) <= np.linalg.norm(M) + 1e-12

    @pytest.mark.parametrize("ranks", [(1, 1, 1), (2, 2, 2), (3, 2, 3), (2, 3, 4)])
    def test_rerun_is_idempotent(self, gaussian, ranks):
        estimate = one_step_hosvd(gaussian("rerun", 6, 5, 4), ranks).estimate
        assert all(a <= b for a, b in zip(tucker_rank(estimate, 1e-8), ranks))
        again = one_step_hosvd(estimate, ranks).estimate
        assert np.linalg.norm(again - estimate) <= 1e-9 * np.linalg.norm(estimate)

    def test_factor_shapes(self, gaussian):
        result = one_step_hosvd(gaussian("shapes", 6, 5, 4), (3, 2, 2))
        assert [U.basis.shape for U in result.refined_factors] == [(6, 3), (5, 2), (4, 2)]
        assert result.decomposition.ranks == (3, 2, 2)
        assert tucker_rank(result.estimate, 1e-9) == (3, 2, 2)

    def test_invalid_ranks(self, gaussian):
        with pytest.raises(ParameterError):
            one_step_hosvd(gaussian("bad", 3, 3, 3), (4, 1, 1))

    def test_recovers_subspaces_at_high_snr(self):
        spec = TensorSignalSpec(p=20, s=3, lam=10.0, beta=0.8, seed=4)
        X = gen_tensor_signal(spec)
        Y = X + gen_noise_tensor(X.shape, NoiseSpec(kappa=1.0, seed=4))
        result = one_step_hosvd(Y, (3, 3, 3))
        truth = hosvd_factors(X, (3, 3, 3))
        for U_hat, U in zip(result.refined_factors, truth):
            assert sin_theta(U_hat, U).spectral < 0.2
        assert np.linalg.norm(result.estimate - X) < np.linalg.norm(Y - X)

    def test_batch_preserves_order(self, gaussian):
        items = [(gaussian("batch", 4, 4, 4, replicate=i), (1 + i % 2,) * 3) for i in range(6)]
        serial = one_step_hosvd_batch(items)
        parallel = one_step_hosvd_batch(items, max_workers=3)
        for a, b, (Y, ranks) in zip(serial, parallel, items):
            np.testing.assert_array_equal(a.estimate, b.estimate)
            np.testing.assert_array_equal(a.estimate, one_step_hosvd(Y, ranks).estimate)


class TestBiasBracket:
    def test_low_rank_signal_has_zero_bias(self):
        X = _low_rank_tensor((5, 5, 5), (2, 2, 2))
        bracket = tucker_bias_bracket(X, (2, 2, 2))
        assert bracket.lower <= 1e-9 * np.linalg.norm(X)
        assert bracket.upper <= 1e-9 * np.linalg.norm(X)

    def test_ordering_on_random_tensors(self, gaussian):
        for i in range(20):
            X = gaussian("bracket", 5, 4, 6, replicate=i)
            ranks = (2, 2, 1 + i % 4)
            bracket = tucker_bias_bracket(X, ranks)
            assert 0 <= bracket.lower <= bracket.upper
            estimate, _ = hosvd_truncate(X, ranks)
            assert bracket.upper == pytest.approx(np.linalg.norm(X - estimate))

    def test_lower_nonincreasing_in_each_rank(self, gaussian):
        X = gaussian("bracket-mono", 5, 4, 6)
        for mode in range(3):
            lowers = []
            for r in range(1, X.shape[mode] + 1):
                ranks = [2, 2, 2]
                ranks[mode] = r
                lowers.append(tucker_bias_bracket(X, ranks).lower)
            assert all(b <= a for a, b in zip(lowers, lowers[1:]))

    def test_full_rank_beyond_other_ranks(self, gaussian):
        X = gaussian("bracket-full", 2, 2, 5)
        bracket = tucker_bias_bracket(X, (2, 2, 5))
        assert bracket.lower == 0.0
        assert bracket.upper <= 1e-12 * np.linalg.norm(X)
        estimate, _ = hosvd_truncate(X, (2, 2, 5))
        np.testing.assert_allclose(estimate, X, rtol=0, atol=1e-12)

    def test_rank_above_other_ranks(self, gaussian):
        bracket = tucker_bias_bracket(gaussian("bracket-wide", 4, 4, 4), (3, 1, 1))
        assert 0 <= bracket.lower <= bracket.upper

    def test_hooi_stays_inside_bracket(self, gaussian):
        X = gaussian("hooi", 6, 6, 6)
        bracket = tucker_bias_bracket(X, (2, 2, 2))
        result = hooi_refine(X, (2, 2, 2), max_iters=10)
        assert bracket.lower - 1e-9 <= result.achieved_error <= bracket.upper + 1e-9
        assert result.history[0] == pytest.approx(bracket.upper)


class TestHOOI:
    def test_history_nonincreasing(self, gaussian):
        result = hooi_refine(gaussian("hooi-hist", 7, 6, 5), (3, 2, 2), max_iters=25)
        assert len(result.history) >= 1
        assert all(b <= a for a, b in zip(result.history, result.history[1:]))
        assert result.achieved_error == result.history[-1]

    def test_single_iteration_is_hosvd(self, gaussian):
        X = gaussian("hooi-one", 5, 5, 5)
        result = hooi_refine(X, (2, 2, 2), max_iters=1)
        estimate, _ = hosvd_truncate(X, (2, 2, 2))
        assert result.history == [pytest.approx(np.linalg.norm(X - estimate))]

    def test_exact_low_rank_input(self):
        X = _low_rank_tensor((6, 5, 4), (2, 2, 2), 3)
        assert hooi_refine(X, (2, 2, 2)).achieved_error <= 1e-10

    def test_rejects_zero_iterations(self, gaussian):
        with pytest.raises(ParameterError):
            hooi_refine(gaussian("hooi-zero", 3, 3, 3), (1, 1, 1), max_iters=0)


class TestMatrixEstimators:
    def test_truncated_estimate_diagonal(self):
        np.testing.assert_allclose(
            truncated_svd_estimate(np.diag([3.0, 2.0, 1.0]), 1), np.diag([3.0, 0.0, 0.0]), atol=1e-12
        )

    def test_matrix_bias_example(self):
        bracket = matrix_bias([3.0, 2.0, 1.0], 1)
        assert bracket.is_exact
        assert bracket.lower == pytest.approx(np.sqrt(5.0))

    def test_matrix_bias_full_rank(self):
        assert matrix_bias([3.0, 2.0, 1.0], 3).lower == 0.0

    @pytest.mark.parametrize("sigma", [[1.0, 2.0], [1.0, -0.5], [[1.0]]])
    def test_matrix_bias_rejects(self, sigma):
        with pytest.raises(ParameterError):
            matrix_bias(sigma, 1)

    def test_sample_covariance(self):
        Z = np.array([[1.0, 0.0], [0.0, 2.0]])
        np.testing.assert_allclose(sample_covariance(Z), np.diag([0.5, 2.0]))

    def test_sample_cov_full_rank_exact(self, gaussian):
        Z = gaussian("cov", 40, 5)
        estimate, cov = sample_cov_truncated(Z, 5)
        np.testing.assert_array_equal(estimate, cov)
        np.testing.assert_allclose(cov, Z.T @ Z / 40, atol=1e-12)

    def test_sample_cov_concentrates(self, gaussian):
        for i in range(20):
            _, cov = sample_cov_truncated(gaussian("cov-lln", 10_000, 5, replicate=i), 5)
            assert np.linalg.norm(cov - np.eye(5), 2) <= 0.15

    def test_sample_cov_truncated_is_symmetric_low_rank(self, gaussian):
        estimate, _ = sample_cov_truncated(gaussian("cov-low", 50, 6), 2)
        np.testing.assert_allclose(estimate, estimate.T, atol=0)
        assert np.linalg.matrix_rank(estimate, tol=1e-9) == 2

    def test_sample_cov_rank_range(self, gaussian):
        with pytest.raises(ParameterError):
            sample_cov_truncated(gaussian("cov-bad", 10, 3), 4)
