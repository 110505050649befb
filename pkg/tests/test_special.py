import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from frackap.errors import DomainError, UnsupportedCaseError
from frackap.special import (Z_SWITCH, BesselIndex, KernelSpec, _j_large, _j_series, gamma_fn,
                             j_norm, j_norm_derivative, jj_product, modified_K, sphere_measure)


def series_oracle(alpha, z, terms=200):
    # direct summation in exact-ish arithmetic via math.lgamma
    total = 0.0
    for k in range(terms):
        lg = (math.lgamma(alpha + 1) - math.lgamma(k + 1) - math.lgamma(k + alpha + 1)
              + 2 * k * math.log(z / 2))
        total += (-1) ** k * math.exp(lg)
    return total


class TestIndex:
    def test_derived(self):
        idx = BesselIndex((1.0, 2.0))
        assert idx.n == 2 and idx.size == 3.0 and idx.d == 5.0
        assert idx.alphas == (0.0, 0.5)

    def test_mixed_rejected(self):
        with pytest.raises(UnsupportedCaseError):
            BesselIndex((0.0, 1.0))

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            BesselIndex((-0.5,))

    @pytest.mark.parametrize("g", [0.0, 2.0, -1.0, 2.5])
    def test_gamma_range(self, g):
        with pytest.raises(DomainError):
            KernelSpec(g, BesselIndex.laplace(1))


@pytest.mark.parametrize("x, want", [(0.5, math.sqrt(math.pi)), (1.0, 1.0), (5.0, 24.0)])
def test_gamma_fn(x, want):
    assert gamma_fn(x) == pytest.approx(want, rel=1e-12)


def test_gamma_fn_domain():
    with pytest.raises(DomainError):
        gamma_fn(0.0)


class TestJNorm:
    def test_cosine_case(self):
        assert j_norm(-0.5, 1.0) == pytest.approx(math.cos(1.0), abs=1e-14)

    @pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.3, 1.0, 4.2])
    def test_origin(self, alpha):
        assert j_norm(alpha, 0.0) == 1.0

    def test_half_order(self):
        z = np.linspace(0.1, 30, 50)
        np.testing.assert_allclose(j_norm(0.5, z), np.sin(z) / z, atol=1e-13)
        assert abs(j_norm(0.5, math.pi)) < 1e-15

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.3, 3.0])
    def test_series_oracle(self, alpha):
        for z in (0.3, 2.0, 6.5, 12.0):
            assert j_norm(alpha, z) == pytest.approx(series_oracle(alpha, z), abs=1e-10)

    def test_branches_agree_at_switch(self):
        for alpha in (0.1, 0.7, 1.5, 2.3, 6.0):
            z = np.array([Z_SWITCH])
            assert abs(_j_series(alpha, z)[0] - _j_large(alpha, z)[0]) < 1e-9

    @given(st.floats(-0.5, 10.0), st.floats(-200.0, 200.0))
    def test_bounded(self, alpha, z):
        assert abs(j_norm(alpha, z)) <= 1.0 + 1e-12

    @given(st.floats(-0.5, 10.0), st.floats(0.0, 200.0))
    def test_even(self, alpha, z):
        assert j_norm(alpha, z) == j_norm(alpha, -z)


class TestDerivative:
    def test_origin(self):
        assert j_norm_derivative(1.2, 0.0) == 0.0

    def test_cosine_case(self):
        h = 1e-5
        fd = (j_norm(-0.5, 1 + h) - j_norm(-0.5, 1 - h)) / (2 * h)
        assert j_norm_derivative(-0.5, 1.0) == pytest.approx(fd, abs=1e-8)
        assert j_norm_derivative(-0.5, 1.0) == pytest.approx(-math.sin(1.0), abs=1e-13)

    def test_restatement(self):
        assert j_norm_derivative(0.0, 0.5) == pytest.approx(-0.25 * j_norm(1.0, 0.5), rel=1e-15)

    @given(st.floats(-0.5, 5.0), st.floats(-50.0, 50.0))
    def test_matches_fd(self, alpha, z):
        h = 1e-5
        fd = (j_norm(alpha, z + h) - j_norm(alpha, z - h)) / (2 * h)
        assert abs(fd - j_norm_derivative(alpha, z)) < 1e-7


class TestModifiedK:
    @staticmethod
    def integral_oracle(nu, x):
        val, _ = integrate.quad(lambda t: math.exp(nu * t - x * math.cosh(t)) / 2
                                + math.exp(-nu * t - x * math.cosh(t)) / 2, 0, 12.0,
                                epsabs=0, epsrel=1e-13)
        return val

    @pytest.mark.parametrize("x", [1.0, 2.0])
    def test_half(self, x):
        want = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
        assert modified_K(0.5, x) == pytest.approx(want, rel=1e-10)
        assert modified_K(0.5, x) == pytest.approx(self.integral_oracle(0.5, x), rel=1e-10)

    def test_even_order(self):
        assert modified_K(-0.3, 1.5) == modified_K(0.3, 1.5)

    @pytest.mark.parametrize("nu, x", [(0.0, 0.1), (2.7, 3.0), (12.0, 40.0)])
    def test_integral(self, nu, x):
        assert modified_K(nu, x) == pytest.approx(self.integral_oracle(nu, x), rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            modified_K(0.5, 0.0)


class TestSphere:
    def test_circle(self):
        assert sphere_measure(BesselIndex.laplace(2)) == pytest.approx(2 * math.pi)

    def test_one_axis(self):
        assert sphere_measure(BesselIndex((1.0,))) == pytest.approx(1.0)

    def test_quarter_circle(self):
        want, _ = integrate.quad(lambda p: math.cos(p) * math.sin(p), 0, math.pi / 2)
        assert sphere_measure(BesselIndex((1.0, 1.0))) == pytest.approx(want, rel=1e-12)

    def test_laplace_3d(self):
        assert sphere_measure(BesselIndex.laplace(3)) == pytest.approx(4 * math.pi)


class TestProduct:
    def test_zero_frequency(self):
        idx = BesselIndex((1.0, 2.5))
        assert jj_product(idx, np.array([0.7, 3.0]), np.zeros(2)) == 1.0

    def test_single_axis(self):
        assert jj_product(BesselIndex((1.0,)), np.array([1.0]), np.array([1.0])) == pytest.approx(
            0.7651976865579666, abs=1e-13)

    def test_factorizes(self):
        got = jj_product(BesselIndex((1.0, 1.0)), np.array([1.0, 2.0]), np.array([3.0, 0.5]))
        assert got == pytest.approx(j_norm(0.0, 3.0) * j_norm(0.0, 1.0), rel=1e-14)

    def test_laplace_rejected(self):
        with pytest.raises(UnsupportedCaseError):
            jj_product(BesselIndex.laplace(1), np.array([1.0]), np.array([1.0]))
