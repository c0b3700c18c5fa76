"""Special-function kernels against independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bfoutage.specfun import (
    CapabilityError,
    ConvergenceError,
    SeriesTolerance,
    bessel_j0,
    expansion_coeffs,
    lemma1_identity,
    noncentral_chi2_cdf,
    regularized_lower_gamma,
)


def j0_power_series(x: float) -> float:
    # sum_k (-x^2/4)^k / (k!)^2, summed to machine convergence
    term, total, k = 1.0, 1.0, 0
    z = -x * x / 4.0
    while abs(term) > 1e-20:
        k += 1
        term *= z / (k * k)
        total += term
    return total


class TestBesselJ0:
    def test_at_zero(self):
        assert bessel_j0(0.0) == 1.0

    def test_series_oracle_at_one(self):
        oracle = j0_power_series(1.0)
        assert oracle == pytest.approx(0.765197686557967, abs=1e-14)
        assert bessel_j0(1.0) == pytest.approx(oracle, abs=1e-12)

    def test_first_zero_by_bisection_on_series(self):
        lo, hi = 2.0, 3.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if j0_power_series(mid) > 0:
                lo = mid
            else:
                hi = mid
        root = 0.5 * (lo + hi)
        assert root == pytest.approx(2.404825557695773, abs=1e-12)
        assert abs(bessel_j0(root)) < 1e-9

    def test_series_oracle_on_grid(self):
        for x in np.linspace(-10.0, 10.0, 41):
            assert bessel_j0(x) == pytest.approx(j0_power_series(x), abs=1e-12)

    def test_rejects_nonfinite(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                bessel_j0(bad)


class TestRegularizedLowerGamma:
    def test_shape_one_closed_form(self):
        for x in (0.5, 1.0, 2.0):
            assert regularized_lower_gamma(1, x) == pytest.approx(-math.expm1(-x), abs=1e-14)

    def test_zero_argument(self):
        for k in (1, 3, 9):
            assert regularized_lower_gamma(k, 0.0) == 0.0

    def test_quadrature_oracle(self):
        oracle = quad(lambda t: t * math.exp(-t), 0.0, 1.0)[0] / math.factorial(1)
        assert oracle == pytest.approx(0.264241117657115, abs=1e-12)
        assert regularized_lower_gamma(2, 1.0) == pytest.approx(oracle, abs=1e-12)

    def test_quadrature_oracle_more_shapes(self):
        for k, x in [(3, 2.5), (5, 4.0), (8, 12.0)]:
            oracle = quad(lambda t: t ** (k - 1) * math.exp(-t), 0.0, x)[0] / math.factorial(k - 1)
            assert regularized_lower_gamma(k, x) == pytest.approx(oracle, rel=1e-10)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            regularized_lower_gamma(0, 1.0)
        with pytest.raises(ValueError):
            regularized_lower_gamma(2, -0.5)

    @given(
        k=st.integers(min_value=1, max_value=30),
        x=st.floats(min_value=0.0, max_value=100.0),
        dx=st.floats(min_value=0.0, max_value=10.0),
    )
    @settings(max_examples=200)
    def test_monotone_and_bounded(self, k, x, dx):
        lo = regularized_lower_gamma(k, x)
        hi = regularized_lower_gamma(k, x + dx)
        assert 0.0 <= lo <= 1.0
        assert hi >= lo - 1e-15

    def test_limit_to_one(self):
        assert regularized_lower_gamma(4, 200.0) == pytest.approx(1.0, abs=1e-12)


class TestNoncentralChi2Cdf:
    def test_central_case_half(self):
        assert noncentral_chi2_cdf(1, 0.0, math.log(2.0)) == pytest.approx(0.5, abs=1e-14)

    def test_zero_argument(self):
        assert noncentral_chi2_cdf(3, 2.5, 0.0) == 0.0

    def test_central_reduction_exact(self):
        for d in range(1, 11):
            for beta in (0.3, 1.0, 5.0, 20.0):
                assert noncentral_chi2_cdf(d, 0.0, beta) == regularized_lower_gamma(d, beta)

    def test_sampling_oracle(self):
        # |sqrt(2*2) + sqrt(2) z|^2 < 3 with z standard complex Gaussian
        gen = np.random.Generator(np.random.Philox(key=1234))
        n = 1_000_000
        z = gen.standard_normal((n, 2))
        stat = (2.0 + z[:, 0]) ** 2 + z[:, 1] ** 2
        p_emp = float(np.mean(stat < 3.0))
        se = math.sqrt(p_emp * (1 - p_emp) / n)
        assert noncentral_chi2_cdf(1, 2.0, 1.5) == pytest.approx(p_emp, abs=3 * se)

    def test_large_noncentrality_mode_start(self):
        # exp(-delta) underflows; mode-started expansion must still work
        val = noncentral_chi2_cdf(1, 800.0, 820.0)
        assert 0.0 < val < 1.0

    def test_convergence_error_carries_partial_sum(self):
        with pytest.raises(ConvergenceError) as exc:
            noncentral_chi2_cdf(1, 50.0, 30.0, SeriesTolerance(rel_tol=1e-12, max_terms=3))
        assert 0.0 <= exc.value.partial_sum <= 1.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            noncentral_chi2_cdf(0, 1.0, 1.0)
        with pytest.raises(ValueError):
            noncentral_chi2_cdf(1, -1.0, 1.0)
        with pytest.raises(ValueError):
            noncentral_chi2_cdf(1, 1.0, -1.0)

    @given(
        d=st.integers(min_value=1, max_value=6),
        delta=st.floats(min_value=0.0, max_value=50.0),
        beta=st.floats(min_value=0.0, max_value=40.0),
        db=st.floats(min_value=0.0, max_value=5.0),
    )
    @settings(max_examples=150)
    def test_probability_and_monotone_in_argument(self, d, delta, beta, db):
        lo = noncentral_chi2_cdf(d, delta, beta)
        hi = noncentral_chi2_cdf(d, delta, beta + db)
        assert 0.0 <= lo <= 1.0
        assert hi >= lo - 1e-10


class TestExpansionCoeffs:
    def test_zeroth_power(self):
        for n_r in (1, 2, 5):
            assert expansion_coeffs(n_r, 0) == [1.0]

    def test_known_squares(self):
        assert expansion_coeffs(2, 2) == pytest.approx([1.0, 2.0, 1.0], abs=0)
        assert expansion_coeffs(3, 2) == pytest.approx([1.0, 2.0, 2.0, 1.0, 0.25], abs=0)

    def test_brute_force_convolution_oracle(self):
        for n_r in range(1, 6):
            base = np.array([1.0 / math.factorial(l) for l in range(n_r)])
            brute = np.array([1.0])
            for k in range(0, 9):
                got = np.array(expansion_coeffs(n_r, k))
                assert got == pytest.approx(brute, abs=1e-12)
                brute = np.convolve(brute, base)

    def test_pointwise_power_identity(self):
        for n_r in range(2, 6):
            for k in range(0, 9):
                coeffs = expansion_coeffs(n_r, k)
                for x in (0.1, 1.0, 3.0):
                    direct = sum(x ** l / math.factorial(l) for l in range(n_r)) ** k
                    via = sum(c * x ** m for m, c in enumerate(coeffs))
                    assert via == pytest.approx(direct, rel=1e-12)

    def test_leading_coefficient_is_one(self):
        assert expansion_coeffs(4, 7)[0] == 1.0

    def test_degree_cap(self):
        with pytest.raises(CapabilityError):
            expansion_coeffs(10, 40)


class TestLemma1Identity:
    def test_collapsed_case(self):
        assert lemma1_identity(2, 2, 1) == (1, 1)

    def test_given_case(self):
        assert lemma1_identity(5, 2, 3) == (56, 56)

    def test_enumerated_case(self):
        lhs, rhs = lemma1_identity(10, 4, 6)
        assert lhs == rhs == math.comb(16, 10)

    def test_exhaustive(self):
        for m in range(1, 13):
            for n in range(1, m + 1):
                for k in range(1, 13):
                    lhs, rhs = lemma1_identity(m, n, k)
                    assert lhs == rhs

    def test_domain_error(self):
        with pytest.raises(ValueError):
            lemma1_identity(2, 3, 1)


def test_series_tolerance_validation():
    with pytest.raises(ValueError):
        SeriesTolerance(rel_tol=0.0)
    with pytest.raises(ValueError):
        SeriesTolerance(max_terms=0)
