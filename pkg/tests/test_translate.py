import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from frackap.errors import DomainError, ShapeError, UnsupportedCaseError
from frackap.special import BesselIndex, j_norm
from frackap.translate import (GridFunction, SpaceTimeGridFunction, axis_rule, bessel_convolve,
                               bessel_translate_1d, convolve_radial_1d, midpoint_translate_1d,
                               mixed_convolve, translate_nd)

gauss = lambda x: np.exp(-np.asarray(x) ** 2 / 2)


class TestTranslate1D:
    @pytest.mark.parametrize("alpha", [-0.3, 0.0, 0.5, 2.0])
    def test_constant(self, alpha):
        x = np.linspace(0, 5, 11)
        np.testing.assert_allclose(bessel_translate_1d(alpha, np.ones_like, x, 1.7), 1.0,
                                   atol=1e-13)

    def test_zero_shift(self):
        x = np.linspace(0, 4, 9)
        np.testing.assert_allclose(bessel_translate_1d(0.7, gauss, x, 0.0), gauss(x), atol=1e-14)

    @pytest.mark.parametrize("alpha", [-0.2, 0.0, 1.5])
    def test_product_formula(self, alpha):
        lam, t = 1.3, 0.8
        x = np.linspace(0, 6, 13)
        f = lambda s: j_norm(alpha, lam * s)
        got = bessel_translate_1d(alpha, f, x, t)
        np.testing.assert_allclose(got, j_norm(alpha, lam * x) * j_norm(alpha, lam * t),
                                   atol=1e-9)

    @given(st.floats(-0.4, 3.0), st.floats(0, 5), st.floats(0, 5))
    def test_symmetric(self, alpha, x, t):
        assert abs(bessel_translate_1d(alpha, gauss, x, t)
                   - bessel_translate_1d(alpha, gauss, t, x)) < 1e-9

    @given(st.floats(-0.4, 3.0), st.floats(0, 6), st.floats(0, 6))
    def test_positive(self, alpha, x, t):
        f = lambda s: np.exp(-np.asarray(s)) * (1 + np.cos(3 * np.asarray(s)))
        assert bessel_translate_1d(alpha, f, x, t) >= -1e-14

    @pytest.mark.parametrize("alpha", [0.0, 0.8])
    def test_commute(self, alpha):
        y, z = 0.7, 1.9
        Ty = lambda s: bessel_translate_1d(alpha, gauss, s, y)
        Tz = lambda s: bessel_translate_1d(alpha, gauss, s, z)
        x = np.array([0.0, 0.4, 1.3, 2.2, 3.5])
        a = bessel_translate_1d(alpha, Ty, x, z)
        b = bessel_translate_1d(alpha, Tz, x, y)
        np.testing.assert_allclose(a, b, atol=1e-8)

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_translate_1d(-0.5, gauss, 1.0, 1.0)

    def test_midpoint_gated(self):
        with pytest.raises(UnsupportedCaseError):
            midpoint_translate_1d(gauss, 1.0, 0.5)
        assert midpoint_translate_1d(gauss, 1.0, 0.5, allow=True) == pytest.approx(
            0.5 * (gauss(1.5) + gauss(0.5)))


class TestTranslateND:
    def test_zero_shift(self):
        idx = BesselIndex((1.0, 2.0))
        f = lambda p: np.exp(-np.sum(p ** 2, axis=-1))
        x = np.array([0.3, 1.1])
        assert translate_nd(idx, f, x, np.zeros(2)) == pytest.approx(float(f(x)), rel=1e-13)

    def test_laplace_shift(self):
        f = lambda p: p[..., 0] ** 2
        assert translate_nd(BesselIndex.laplace(1), f, np.array([3.0]), np.array([1.0])) == 4.0

    def test_constant(self):
        f = lambda p: np.ones(p.shape[:-1])
        got = translate_nd(BesselIndex((1.0, 1.0)), f, np.array([0.5, 2.0]), np.array([1.0, 0.3]))
        assert got == pytest.approx(1.0, abs=1e-13)

    def test_separable(self):
        idx = BesselIndex((1.0, 3.0))
        f = lambda p: np.exp(-p[..., 0] ** 2 / 2) * np.exp(-p[..., 1] ** 2 / 2)
        x, y = np.array([0.4, 1.2]), np.array([0.9, 0.5])
        want = (bessel_translate_1d(0.0, gauss, 0.4, 0.9) * bessel_translate_1d(1.0, gauss, 1.2, 0.5))
        assert translate_nd(idx, f, x, y) == pytest.approx(want, rel=1e-10)

    def test_shape(self):
        with pytest.raises(ShapeError):
            translate_nd(BesselIndex((1.0,)), gauss, np.array([1.0, 2.0]), np.array([1.0, 2.0]))


class TestConvolve:
    def test_axis_rule_moments(self):
        for a in (0.0, 0.4, 2.0):
            x, w = axis_rule(3.0, 64, a)
            assert np.sum(w * x ** 2) == pytest.approx(3.0 ** (a + 3) / (a + 3), rel=1e-12)

    def test_gaussian_line(self):
        idx = BesselIndex.laplace(1)
        f = GridFunction.radial(idx, gauss, 12.0, 96)
        got = bessel_convolve(idx, f, f, out_points=np.array([[0.0]]))
        oracle, _ = integrate.quad(lambda s: math.exp(-s * s), -np.inf, np.inf)
        assert got[0] == pytest.approx(oracle, rel=1e-9)
        assert got[0] == pytest.approx(math.sqrt(math.pi), rel=1e-9)

    def test_spike_identity(self):
        idx = BesselIndex((1.0,))
        f = GridFunction.radial(idx, gauss, 10.0, 64)
        eps = 0.02
        spike = GridFunction.radial(idx, lambda r: np.exp(-r ** 2 / (2 * eps ** 2)) / eps ** 2,
                                    10.0, 96, grading=1.6)
        pts = np.array([[0.5], [1.0], [2.0]])
        got = bessel_convolve(idx, f, spike, out_points=pts)
        np.testing.assert_allclose(got, gauss(pts[:, 0]), rtol=2e-3)

    def test_constant_translates(self):
        idx = BesselIndex((1.0,))
        one = GridFunction.radial(idx, lambda r: np.ones_like(r), 30.0, 64)
        g = GridFunction.radial(idx, lambda r: np.exp(-r), 30.0, 64)
        got = bessel_convolve(idx, one, g, out_points=np.array([[0.1]]))
        assert got[0] == pytest.approx(g.integrate(), rel=1e-8)

    def test_commutative_and_width_law(self):
        f = lambda x: np.exp(-x ** 2 / 2)
        g = lambda x: np.exp(-x ** 2 / 8)
        r = np.array([0.0, 1.0, 3.0])
        fg = convolve_radial_1d(0.0, f, g, r, 40.0)
        gf = convolve_radial_1d(0.0, g, f, r, 40.0)
        np.testing.assert_allclose(fg, gf, atol=1e-10)
        # alpha = 0: s^2 exp(-s^2 rho^2 / 2) transforms multiply, so widths add in quadrature
        np.testing.assert_allclose(fg, 4 / 5 * np.exp(-r ** 2 / 10), atol=1e-10)

    def test_associative(self):
        idx = BesselIndex((1.0,))
        mk = lambda s: GridFunction.radial(idx, lambda r: np.exp(-r ** 2 / (2 * s * s)), 14.0, 48)
        f, g, h = mk(1.0), mk(0.7), mk(1.3)
        left = bessel_convolve(idx, bessel_convolve(idx, f, g), h)
        right = bessel_convolve(idx, f, bessel_convolve(idx, g, h))
        assert np.max(np.abs(left.values - right.values)) < 1e-4

    def test_incompatible(self):
        idx = BesselIndex((1.0,))
        a = GridFunction.radial(idx, gauss, 5.0, 16)
        b = GridFunction.radial(idx, gauss, 5.0, 32)
        with pytest.raises(ShapeError):
            bessel_convolve(idx, a, b)


class TestMixed:
    @pytest.fixture
    def setup(self):
        idx = BesselIndex((1.0,))
        grid = GridFunction.radial(idx, gauss, 8.0, 16)
        times = np.linspace(0, 1, 5)
        return idx, grid, times

    def test_zero(self, setup):
        idx, grid, times = setup
        f = SpaceTimeGridFunction(grid, times, np.ones((5, 16)))
        g = SpaceTimeGridFunction(grid, times, np.zeros((5, 16)))
        assert np.all(mixed_convolve(idx, f, g).values == 0)

    def test_causal(self, setup):
        idx, grid, times = setup
        rng = np.random.default_rng(3)
        x = grid.axes[0]
        fv = rng.random((5, 1)) * np.exp(-x ** 2 / 2)
        gv = rng.random((5, 1)) * np.exp(-x ** 2 / 3)
        base = mixed_convolve(idx, SpaceTimeGridFunction(grid, times, fv),
                              SpaceTimeGridFunction(grid, times, gv))
        fv2 = fv.copy()
        fv2[3:] += 5.0
        moved = mixed_convolve(idx, SpaceTimeGridFunction(grid, times, fv2),
                               SpaceTimeGridFunction(grid, times, gv))
        np.testing.assert_array_equal(base.values[:3], moved.values[:3])
        assert np.any(base.values[3:] != moved.values[3:])

    def test_spike_at_origin(self, setup):
        idx, _, _ = setup
        times = np.linspace(0, 1, 5)
        eps = 0.02
        sp = GridFunction.radial(idx, lambda r: np.exp(-r ** 2 / (2 * eps ** 2)) / eps ** 2,
                                 10.0, 96, grading=1.6)
        f = SpaceTimeGridFunction(sp.with_values(sp.values, None), times, np.stack(
            [np.exp(-t) * gauss(sp.axes[0]) for t in times]))
        gv = np.zeros((5, 96))
        gv[0] = sp.values / (times[1] / 2)
        out = mixed_convolve(idx, f, SpaceTimeGridFunction(sp, times, gv))
        k = 2
        want = f.values[k]
        # only the m = k term survives: f(., t_k) *_a spike, trapezoid end weight dt/2
        sel = sp.axes[0] < 4
        np.testing.assert_allclose(out.values[k][sel], want[sel], atol=5e-3)
