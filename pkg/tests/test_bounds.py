"""Bound evaluators and the operator-norm concentration check."""

import math

import numpy as np
import pytest

from app.errors import ParameterError
from app.services.bounds import (
    THM2_CONSTANT,
    bound_report,
    corollary_rates,
    empirical_constant,
    matrix_bound_report,
    monte_carlo_opnorm,
    sin_theta_bound_unbalanced,
    snr_condition,
    thm1_variance_term,
    thm2_bound,
)
from app.services.estimators import one_step_hosvd
from app.services.linalg import operator_norm, singular_values, tail_norm, truncated_svd
from app.services.synth import (
    MatrixSignalSpec,
    NoiseSpec,
    TensorSignalSpec,
    gen_matrix_signal,
    gen_noise_matrix,
    gen_noise_tensor,
    gen_tensor_signal,
)


class TestVarianceTerm:
    def test_example(self):
        assert thm1_variance_term(1.0, (10, 10, 10), (2, 2, 2)) == pytest.approx(math.sqrt(68))

    @pytest.mark.parametrize("p", [1, 7, 30])
    def test_rank_one(self, p):
        assert thm1_variance_term(1.0, (p, p, p), (1, 1, 1)) == pytest.approx(math.sqrt(3 * p + 1))

    def test_homogeneous_in_kappa(self):
        assert thm1_variance_term(2.0, (5, 6, 7), (1, 2, 3)) == 2 * thm1_variance_term(1.0, (5, 6, 7), (1, 2, 3))

    def test_symmetric_under_mode_permutation(self):
        base = thm1_variance_term(1.3, (5, 6, 7), (1, 2, 3))
        assert thm1_variance_term(1.3, (7, 5, 6), (3, 1, 2)) == pytest.approx(base)

    @pytest.mark.parametrize("args", [(0.0, (2, 2, 2), (1, 1, 1)), (1.0, (2, 2), (1, 1, 1)), (1.0, (2, 2, 2), (0, 1, 1))])
    def test_rejects(self, args):
        with pytest.raises(ParameterError):
            thm1_variance_term(*args)


class TestSNRCondition:
    def test_example(self):
        spectra = [[100.0] * 10] * 3
        result = snr_condition(spectra, (10, 10, 10), 1.0, 1.0, (20, 20, 20))
        assert result.threshold == pytest.approx(math.sqrt(80000) + 600)
        assert result.margins == pytest.approx((9117.157,) * 3, abs=1e-3)
        assert result.holds

    def test_zero_gap(self):
        result = snr_condition([[2.0, 2.0, 1.0]] * 3, (1, 1, 1), 1.0, 1.0, (3, 3, 3))
        assert result.margins[0] == pytest.approx(-result.threshold)
        assert not result.holds

    def test_noiseless_limit(self):
        result = snr_condition([[3.0, 1.0]] * 3, (1, 1, 1), 0.0, 1.0, (2, 2, 2))
        assert all(m > 0 for m in result.margins)

    def test_monotone(self):
        spectra = [[10.0, 4.0, 1.0]] * 3
        margin = lambda kappa, c_gap: min(snr_condition(spectra, (1, 1, 1), kappa, c_gap, (3, 3, 3)).margins)
        assert margin(1.0, 1.0) >= margin(2.0, 1.0)
        assert margin(1.0, 1.0) >= margin(1.0, 2.0)
        wider = min(snr_condition([[12.0, 4.0, 1.0]] * 3, (1, 1, 1), 1.0, 1.0, (3, 3, 3)).margins)
        assert wider >= margin(1.0, 1.0)

    def test_rejects_increasing_spectrum(self):
        with pytest.raises(ParameterError):
            snr_condition([[1.0, 2.0]] * 3, (1, 1, 1), 1.0, 1.0, (2, 2, 2))


class TestThm2Bound:
    def test_unit(self):
        assert thm2_bound(1, 1.0, 0.0) == pytest.approx(3.41421, abs=1e-5)

    def test_noiseless(self):
        assert thm2_bound(3, 0.0, 2.0) == pytest.approx(THM2_CONSTANT * 2.0)

    def test_example(self):
        assert thm2_bound(4, 2.0, 3.0) == pytest.approx(23.8995, abs=1e-4)

    def test_holds_on_random_trials(self):
        """The deterministic matrix bound holds for every realized noise draw."""
        for i in range(30):
            spec = MatrixSignalSpec(m=30, n=10, lam=1.0 + i % 5, seed=i)
            X = gen_matrix_signal(spec)
            Z = gen_noise_matrix(X.shape, NoiseSpec(seed=i))
            r = 1 + i % 10
            error = np.linalg.norm(truncated_svd(X + Z, r).reconstruct() - X)
            bound = thm2_bound(r, operator_norm(Z), tail_norm(singular_values(X), r))
            assert error <= bound


class TestCorollaryRates:
    def test_iid(self):
        assert corollary_rates("iid-subgaussian", kappa=1.0, r=4, m=8, n=8) == pytest.approx(8.0)

    def test_subgaussian_matrix_shares_rate(self):
        args = dict(kappa=1.5, r=3, m=10, n=4)
        assert corollary_rates("subgaussian-matrix", **args) == corollary_rates("iid-subgaussian", **args)

    def test_covariance_square(self):
        assert corollary_rates("covariance", kappa=1.0, r=1, n=5, N=5) == pytest.approx(2.0)

    def test_covariance_example(self):
        assert corollary_rates("covariance", kappa=2.0, r=4, n=100, N=400) == pytest.approx(6.0)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            corollary_rates("heavy-tailed", kappa=1.0, r=1, m=1, n=1)

    def test_missing_parameter(self):
        with pytest.raises(ParameterError):
            corollary_rates("covariance", kappa=1.0, r=1, n=5)


class TestSinThetaBound:
    def test_unit(self):
        assert sin_theta_bound_unbalanced([1.0], 1, 1.0, 1, 1) == pytest.approx(2.0)

    def test_example(self):
        assert sin_theta_bound_unbalanced([10.0], 1, 1.0, 400, 100) == pytest.approx(5.0)

    def test_infinite_gap(self):
        assert sin_theta_bound_unbalanced([math.inf, 1.0], 1, 1.0, 4, 4) == 0.0

    def test_zero_gap(self):
        with pytest.raises(ParameterError):
            sin_theta_bound_unbalanced([2.0, 2.0], 1, 1.0, 4, 4)


class TestBoundReport:
    def test_tensor_report(self):
        X = gen_tensor_signal(TensorSignalSpec(p=10, s=4, lam=1.0, seed=1))
        report = bound_report(X, 1.0, (2, 2, 2))
        assert report.variance_term == pytest.approx(math.sqrt(68))
        assert 0 <= report.bias.lower <= report.bias.upper
        assert report.total_upper(2.0) == pytest.approx(2 * (report.variance_term + report.bias.upper))
        assert report.to_dict()["dims"] == [10, 10, 10]

    def test_total_upper_nondecreasing(self):
        report = bound_report(gen_tensor_signal(TensorSignalSpec(p=6, s=3, lam=1.0, seed=2)), 1.0, (1, 1, 1))
        assert report.total_upper(1.0) <= report.total_upper(1.5) <= report.total_upper(10.0)
        with pytest.raises(ParameterError):
            report.total_upper(0.5)

    def test_exact_rank_has_zero_bias(self):
        X = gen_tensor_signal(TensorSignalSpec(p=8, s=3, lam=2.0, seed=3))
        report = bound_report(X, 1.0, (3, 3, 3))
        assert report.bias.upper <= 1e-9 * np.linalg.norm(X)

    def test_matrix_report(self):
        X = gen_matrix_signal(MatrixSignalSpec(m=50, n=10, lam=10.0, seed=4))
        report = matrix_bound_report(X, 1.0, 4)
        assert report.bias.is_exact
        assert report.bias.lower == pytest.approx(tail_norm(singular_values(X), 4))
        assert report.variance_term == pytest.approx(math.sqrt(4 * 60))

    def test_tensor_error_within_small_constant(self):
        """The one-step estimate stays within C·(variance + bias) for a modest C."""
        errors, variances, biases = [], [], []
        for i in range(5):
            X = gen_tensor_signal(TensorSignalSpec(p=15, s=5, lam=10.0, seed=i))
            Y = X + gen_noise_tensor(X.shape, NoiseSpec(seed=i))
            report = bound_report(X, 1.0, (3, 3, 3))
            errors.append(np.linalg.norm(one_step_hosvd(Y, (3, 3, 3)).estimate - X))
            variances.append(report.variance_term)
            biases.append(report.bias.upper)
        assert empirical_constant(errors, variances, biases) <= 10.0


class TestEmpiricalConstant:
    def test_max_ratio(self):
        assert empirical_constant([1.0, 3.0], [1.0, 1.0], [0.0, 0.5]) == pytest.approx(2.0)

    def test_rejects_mismatch(self):
        with pytest.raises(ParameterError):
            empirical_constant([1.0], [1.0, 2.0], [0.0, 0.0])

    def test_rejects_zero_scale(self):
        with pytest.raises(ParameterError):
            empirical_constant([1.0], [0.0], [0.0])


class TestOpnormConcentration:
    def test_quantile_bound(self):
        summary = monte_carlo_opnorm(200, 200, 1.0, 100, seed=8)
        assert summary.q99 <= 1.5
        assert summary.minimum <= summary.median <= summary.q99 <= summary.maximum

    def test_kappa_homogeneity(self):
        a = monte_carlo_opnorm(20, 30, 1.0, 10, seed=3)
        b = monte_carlo_opnorm(20, 30, 2.0, 10, seed=3)
        np.testing.assert_allclose(a.values, b.values, rtol=1e-12)

    def test_parallel_matches_serial(self):
        a = monte_carlo_opnorm(15, 10, 1.0, 12, seed=5)
        b = monte_carlo_opnorm(15, 10, 1.0, 12, seed=5, max_workers=4)
        np.testing.assert_array_equal(a.values, b.values)

    def test_rejects_zero_trials(self):
        with pytest.raises(ParameterError):
            monte_carlo_opnorm(2, 2, 1.0, 0, seed=0)

    @pytest.mark.slow
    def test_scalar_median(self):
        summary = monte_carlo_opnorm(1, 1, 1.0, 100_000, seed=1)
        assert 0.30 <= summary.median <= 0.38
