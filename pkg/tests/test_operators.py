import math

import numpy as np
import pytest

from frackap import hankel
from frackap.errors import DomainError, NonConvergenceError, StepTooLargeError
from frackap.hankel import RadialProfile, gaussian_profile
from frackap.operators import (OperatorConfig, calibrated_constant, frac_laplace_integral,
                               frac_laplace_spectral, heat_operator_apply, laplace_bessel_apply,
                               multiplier_moment, spherical_difference)
from frackap.special import BesselIndex, KernelSpec, gamma_fn, j_norm, sphere_measure
from frackap.translate import bessel_translate_1d

L1, B1 = BesselIndex.laplace(1), BesselIndex((1.0,))
gauss_pts = lambda p: np.exp(-0.5 * np.sum(np.asarray(p) ** 2, axis=-1))


def gaussian_pair(index, rho):
    nu = index.nu
    return sphere_measure(index) * 2 ** nu * gamma_fn(nu + 1) * np.exp(-0.5 * rho ** 2)


class TestLaplaceBessel:
    def test_square_laplace(self):
        assert laplace_bessel_apply(L1, lambda p: p[..., 0] ** 2, np.array([0.7])) == \
            pytest.approx(2.0, abs=1e-6)

    def test_square_bessel(self):
        assert laplace_bessel_apply(B1, lambda p: p[..., 0] ** 2, np.array([0.7])) == \
            pytest.approx(4.0, abs=1e-6)

    def test_eigenfunction(self):
        f = lambda p: j_norm(0.0, 2.0 * p[..., 0])
        got = laplace_bessel_apply(B1, f, np.array([1.3]))
        assert got == pytest.approx(-4.0 * j_norm(0.0, 2.6), abs=1e-5)

    def test_step_guard(self):
        with pytest.raises(StepTooLargeError):
            laplace_bessel_apply(B1, gauss_pts, np.array([5e-4]))

    def test_even_reflection(self):
        # Delta_a exp(-x^2/2) = (x^2 - 1 - a) exp(-x^2/2) down to the origin
        idx = BesselIndex((2.0,))
        x = np.array([[1e-4], [0.3], [1.1]])
        got = laplace_bessel_apply(idx, gauss_pts, x, even=True)
        np.testing.assert_allclose(got, (x[:, 0] ** 2 - 3) * np.exp(-x[:, 0] ** 2 / 2),
                                   atol=1e-5)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            OperatorConfig(fd_step=0.0)
        with pytest.raises(DomainError):
            OperatorConfig(sphere_quadrature_order=2)

    def test_translation_commutes(self):
        idx = BesselIndex((2.0,))
        al = idx.alphas[0]
        lap = lambda s: (s ** 2 - 3) * np.exp(-s ** 2 / 2)
        f = lambda s: np.exp(-np.asarray(s) ** 2 / 2)
        y = 0.8
        moved = lambda p: bessel_translate_1d(al, f, p[..., 0], y)
        for x in (0.5, 1.2, 2.0):
            lhs = bessel_translate_1d(al, lap, x, y)
            rhs = laplace_bessel_apply(idx, moved, np.array([x]))
            assert lhs == pytest.approx(rhs, abs=1e-4)

    @pytest.mark.parametrize("index", [L1, BesselIndex.laplace(3), B1, BesselIndex((2.5,))],
                             ids=str)
    def test_diagonalization(self, index):
        # radial reduction: Delta_a g(|x|) = g'' + (d - 1)/r g'
        d = index.d
        lap = RadialProfile(lambda r: -(r ** 2 - d) * np.exp(-r ** 2 / 2),
                            hankel.exponential(0.45, 2.0))
        rho = np.linspace(0, 8, 17)
        got = hankel.radial_transform(index, lap, rho)
        np.testing.assert_allclose(got, rho ** 2 * gaussian_pair(index, rho), atol=1e-5)

    def test_diagonalization_stencil(self):
        # same identity through the finite-difference operator itself
        idx = BesselIndex((1.0,))
        lap = RadialProfile(
            lambda r: -laplace_bessel_apply(idx, gauss_pts, np.asarray(r)[..., None], even=True),
            hankel.exponential(0.45, 2.0))
        rho = np.array([0.0, 1.0, 2.0, 4.0])
        # stencil rounding noise (~1e-11) sets the attainable quadrature tolerance
        got = hankel.radial_transform(idx, lap, rho, rtol=1e-8)
        np.testing.assert_allclose(got, rho ** 2 * gaussian_pair(idx, rho), atol=1e-5)


class TestSphericalDifference:
    def test_constant(self):
        for idx in (L1, B1, BesselIndex((1.0, 2.0)), BesselIndex.laplace(2)):
            f = lambda p: np.full(np.shape(p)[:-1], 3.0)
            assert abs(spherical_difference(idx, f, np.full(idx.n, 0.6), 0.9)) < 1e-13

    def test_square(self):
        got = spherical_difference(L1, lambda p: p[..., 0] ** 2, np.array([1.7]), 0.4)
        assert got == pytest.approx(-0.16, abs=1e-14)

    def test_midpoint_form(self):
        f = lambda p: np.sin(p[..., 0]) + p[..., 0] ** 3
        x, r = 0.9, 0.35
        want = float(f(np.array([x])) - 0.5 * (f(np.array([x + r])) + f(np.array([x - r]))))
        assert spherical_difference(L1, f, np.array([x]), r) == pytest.approx(want, abs=1e-14)

    @pytest.mark.parametrize("index, r", [(BesselIndex.laplace(3), 0.7), (B1, 1.5)], ids=str)
    def test_multiplier(self, index, r):
        def prof(s):
            s = np.atleast_1d(s)
            pts = np.zeros(s.shape + (index.n,))
            pts[..., 0] = s
            return spherical_difference(index, gauss_pts, pts, r)
        diff = RadialProfile(prof, hankel.exponential(0.2, 2.0))
        rho = 2.0
        got = hankel.radial_transform(index, diff, rho, rtol=1e-10)
        want = (1 - j_norm(index.d / 2 - 1, r * rho)) * gaussian_pair(index, rho)
        assert got == pytest.approx(want, abs=1e-5)

    def test_radius_domain(self):
        with pytest.raises(DomainError):
            spherical_difference(L1, gauss_pts, np.array([1.0]), 0.0)


class TestSpectral:
    spec = KernelSpec(1.5, L1)

    def test_multiplier_round_trip(self):
        spectrum = RadialProfile(lambda q: np.exp(-q ** 2), hankel.exponential(1.0, 2.0))
        f = RadialProfile(lambda r: np.exp(-r ** 2 / 4) / (2 * math.sqrt(math.pi)),
                          hankel.exponential(0.2, 2.0))
        out = RadialProfile(lambda r: frac_laplace_spectral(self.spec, f, r, spectrum),
                            hankel.power(-(self.spec.d + self.spec.gamma)))
        rho = np.array([0.5, 1.0, 2.0])
        got = hankel.radial_transform(L1, out, rho, rtol=1e-10)
        np.testing.assert_allclose(got, rho ** 1.5 * np.exp(-rho ** 2), atol=1e-6)

    def test_small_gamma(self):
        val = frac_laplace_spectral(KernelSpec(1e-3, B1), gaussian_profile(), 1.0)
        assert val == pytest.approx(math.exp(-0.5), rel=1e-2)

    def test_linear(self):
        f, g = gaussian_profile(), gaussian_profile(0.7, 2.0)
        both = RadialProfile(lambda r: f(r) + g(r), hankel.exponential(0.5, 2.0))
        r = np.array([0.0, 0.8, 2.0])
        lhs = frac_laplace_spectral(self.spec, both, r)
        rhs = frac_laplace_spectral(self.spec, f, r) + frac_laplace_spectral(self.spec, g, r)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


class TestIntegral:
    def test_constant(self):
        f = lambda p: np.full(np.shape(p)[:-1], 2.0)
        assert frac_laplace_integral(B1, 0.5, f, np.array([1.0]), constant=1.0) == 0.0

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    def test_matches_spectral(self, x):
        spec = KernelSpec(0.5, B1)
        a = frac_laplace_integral(B1, 0.5, gauss_pts, np.array([x]))
        b = frac_laplace_spectral(spec, gaussian_profile(), x)
        assert a == pytest.approx(b, rel=1e-3)

    def test_scaling(self):
        lam, g, x = 2.0, 0.5, 0.6
        f2 = lambda p: gauss_pts(lam * np.asarray(p))
        a = frac_laplace_integral(B1, g, f2, np.array([x]))
        b = lam ** g * frac_laplace_integral(B1, g, gauss_pts, np.array([lam * x]))
        assert a == pytest.approx(b, rel=1e-3)

    @pytest.mark.parametrize("index", [L1, B1, BesselIndex((0.5, 1.5))], ids=str)
    def test_calibrated_constant_closed_form(self, index):
        # |S| C int s^(-1-g)(1 - j_nu(s)) ds = 1 fixes C
        g = 1.2
        want = 1.0 / (sphere_measure(index) * multiplier_moment(index.nu, g))
        assert calibrated_constant(index, g) == pytest.approx(want, rel=1e-4)

    def test_rough_function_rejected(self):
        f = lambda p: np.abs(np.asarray(p)[..., 0] - 1.0)
        with pytest.raises(NonConvergenceError):
            frac_laplace_integral(L1, 0.5, f, np.array([1.0]))


class TestHeatOperator:
    spec = KernelSpec(1.5, B1)

    def _u(self, shift=0.0):
        idx, g = self.spec.index, self.spec.gamma
        spectrum = lambda t: RadialProfile(lambda q: np.exp(-(t + shift) * q ** g - q ** 2 / 2),
                                           hankel.exponential(0.5, 2.0))

        def u(p, t):
            r = np.sqrt(np.sum(np.asarray(p) ** 2, axis=-1))
            return hankel.inverse_radial_transform(idx, spectrum(t), r)
        return u, spectrum

    def test_fundamental_solution(self):
        u, spectrum = self._u()
        t = 0.5

        def frac(f, x):
            return frac_laplace_spectral(self.spec, None, np.linalg.norm(x), spectrum(t))
        val = heat_operator_apply(self.spec, u, np.array([1.0]), t, frac=frac)
        assert abs(val) < 1e-3

    def test_time_independent(self):
        f = lambda p, t: gauss_pts(p)
        x = np.array([1.0])
        val = heat_operator_apply(self.spec, f, x, 1.0)
        assert val == pytest.approx(frac_laplace_integral(B1, 1.5, gauss_pts, x), abs=1e-12)

    def test_boundary(self):
        with pytest.raises(StepTooLargeError):
            heat_operator_apply(self.spec, lambda p, t: gauss_pts(p), np.array([1.0]), 5e-4)
