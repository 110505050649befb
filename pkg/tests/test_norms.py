import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from frackap.errors import DomainError, UnsupportedCaseError
from frackap.kernels import P_eval, get_table
from frackap.norms import (NormReport, dual_sobolev_norm_p2, lp_norm_space, lp_norm_spacetime,
                           potential_norm, sobolev_norm)
from frackap.special import BesselIndex, KernelSpec, gamma_fn, j_norm, radial_inverse_constant, \
    sphere_measure
from frackap.translate import GridFunction, SpaceTimeGridFunction, axis_rule

L1, B1 = BesselIndex.laplace(1), BesselIndex((1.0,))
radial = lambda h: (lambda p: h(np.sqrt(np.sum(np.asarray(p) ** 2, axis=-1))))


class TestSpace:
    def test_unit_interval(self):
        one = GridFunction.from_callable(B1, lambda p: np.ones(p.shape[:-1]), 1.0, 16)
        assert lp_norm_space(one, 2).value == pytest.approx(1 / math.sqrt(2), rel=1e-14)

    def test_gaussian_line(self):
        f = GridFunction.radial(L1, lambda r: np.exp(-r ** 2 / 2), 12.0, 128)
        assert lp_norm_space(f, 2).value == pytest.approx(math.pi ** 0.25, rel=1e-12)

    def test_homogeneous(self):
        f = GridFunction.radial(B1, lambda r: np.exp(-r), 20.0, 64)
        assert lp_norm_space(f.with_values(2 * f.values), 3).value == 2 * lp_norm_space(f, 3).value

    def test_p_domain(self):
        f = GridFunction.radial(B1, lambda r: np.exp(-r), 20.0, 16)
        with pytest.raises(DomainError):
            lp_norm_space(f, 0.5)

    def test_report_validates(self):
        with pytest.raises(DomainError):
            NormReport(float("nan"))

    @given(arrays(float, 16, elements=st.floats(-10, 10)),
           arrays(float, 16, elements=st.floats(-10, 10)),
           st.floats(-5, 5), st.sampled_from([1.0, 1.5, 2.0, 4.0]))
    def test_axioms(self, u, v, c, p):
        x, w = axis_rule(3.0, 16, 1.0)
        mk = lambda vals: GridFunction(B1, [x], [w], vals)
        nu, nv = lp_norm_space(mk(u), p).value, lp_norm_space(mk(v), p).value
        assert lp_norm_space(mk(u + v), p).value <= nu + nv + 1e-10 * (1 + nu + nv)
        assert lp_norm_space(mk(c * u), p).value == pytest.approx(abs(c) * nu, rel=1e-10,
                                                                  abs=1e-12)


class TestSpacetime:
    def test_separable(self):
        g = GridFunction.radial(B1, lambda r: np.exp(-r ** 2), 10.0, 64)
        t = np.linspace(0, 2, 201)
        h = np.exp(-t)
        u = SpaceTimeGridFunction(g, t, h[:, None] * g.values[None, :])
        p = 3.0
        ht = float(integrate.trapezoid(h ** p, t)) ** (1 / p)
        assert lp_norm_spacetime(u, p).value == pytest.approx(lp_norm_space(g, p).value * ht,
                                                              rel=1e-8)

    def test_zero(self):
        g = GridFunction.radial(B1, lambda r: np.exp(-r ** 2), 10.0, 16)
        u = SpaceTimeGridFunction(g, np.linspace(0, 1, 5), np.zeros((5, 16)))
        assert lp_norm_spacetime(u, 2).value == 0.0

    def test_kernel_column_scaling(self):
        spec = KernelSpec(1.5, B1)
        tab = get_table(spec)
        g, d, p = spec.gamma, spec.d, 2.0
        x, wx = axis_rule(40.0, 512, 1.0, grading=1.1)
        grid = GridFunction(B1, [x], [wx], np.zeros_like(x))
        t0, T = 0.1, 2.0
        tg, tw = np.polynomial.legendre.leggauss(24)
        times = t0 + (T - t0) * (tg + 1) / 2
        vals = np.stack([P_eval(tab, x, t) for t in times])
        u = SpaceTimeGridFunction(grid, times, vals, tweights=tw * (T - t0) / 2)
        # space integral at t = 1 by adaptive quadrature, time integral in closed form
        base, _ = integrate.quad(lambda y: P_eval(tab, y, 1.0) ** p * y, 0, np.inf, limit=400,
                                 epsrel=1e-12)
        q = d * (p - 1) / g
        time = (T ** (1 - q) - t0 ** (1 - q)) / (1 - q)
        assert lp_norm_spacetime(u, p).value == pytest.approx((base * time) ** (1 / p), rel=1e-4)


class TestSobolev:
    def test_order_zero(self):
        f = GridFunction.radial(B1, lambda r: np.exp(-r ** 2), 8.0, 64)
        assert sobolev_norm(f, 0, 2).value == lp_norm_space(f, 2).value

    def test_dominates(self):
        f = GridFunction.radial(B1, lambda r: np.exp(-r ** 2), 8.0, 64)
        assert sobolev_norm(f, 1, 2).value >= lp_norm_space(f, 2).value

    def test_needs_evaluator(self):
        f = GridFunction.radial(B1, lambda r: np.exp(-r ** 2), 8.0, 16)
        with pytest.raises(UnsupportedCaseError):
            sobolev_norm(f.with_values(f.values), 1, 2)

    def test_eigen_scaling(self):
        # j_0(lam x) is a Delta_a eigenfunction; a wide cutoff barely disturbs it
        ratios = []
        for lam in (1.0, 2.0, 4.0):
            h = lambda r, lam=lam: j_norm(0.0, lam * r) * np.exp(-(r / 30.0) ** 2)
            f = GridFunction.from_callable(B1, lambda p: h(p[..., 0]), 120.0, 2048)
            w1 = sobolev_norm(f, 1, 2).value
            ratios.append(w1 / lp_norm_space(f, 2).value / math.sqrt(1 + lam ** 4))
        np.testing.assert_allclose(ratios, 1.0, atol=0.02)


class TestPotential:
    def test_definition(self):
        g = GridFunction.radial(B1, lambda r: np.exp(-r ** 2), 8.0, 32)
        base = lp_norm_space(g, 2).value
        assert potential_norm(g, 2, 2.0).value == base
        assert potential_norm(g, 2, 0.5).value == base
        assert potential_norm(g.with_values(3 * g.values), 2, 2.0).value == pytest.approx(3 * base)

    def test_nu_domain(self):
        g = GridFunction.radial(B1, lambda r: np.exp(-r ** 2), 8.0, 16)
        with pytest.raises(DomainError):
            potential_norm(g, 2, 0.0)


def _spacetime(index, h, x_max, n, times=np.linspace(0, 1, 3)):
    g = GridFunction.radial(index, h, x_max, n)
    vals = np.stack([np.exp(-t) * g.values for t in times])
    return SpaceTimeGridFunction(g, times, vals)


class TestDual:
    def test_low_frequency(self):
        u = _spacetime(L1, lambda r: np.exp(-(r / 20.0) ** 2 / 2), 200.0, 512)
        ratio = dual_sobolev_norm_p2(u).value / lp_norm_spacetime(u, 2).value
        assert ratio == pytest.approx(1.0, abs=1e-3)

    def test_high_frequency(self):
        u = _spacetime(L1, lambda r: np.cos(10 * r) * np.exp(-(r / 5.0) ** 2 / 2), 40.0, 1024)
        ratio = dual_sobolev_norm_p2(u).value / lp_norm_spacetime(u, 2).value
        assert ratio == pytest.approx(1 / math.sqrt(1 + 1e4), rel=0.05)

    @pytest.mark.parametrize("index", [B1, L1], ids=str)
    def test_least_squares_oracle(self, index):
        u = _spacetime(index, lambda r: np.exp(-r ** 2 / 2), 12.0, 512)
        got = dual_sobolev_norm_p2(u).value
        rho = np.linspace(0, 40, 8001)
        nu = index.nu
        F = sphere_measure(index) * 2 ** nu * gamma_fn(nu + 1) * np.exp(-rho ** 2 / 2)
        best = np.empty_like(rho)
        for i, (q, fh) in enumerate(zip(rho, F)):
            v, *_ = np.linalg.lstsq(np.array([[1.0, -q * q]]), np.array([fh]), rcond=None)
            best[i] = v @ v
        c = radial_inverse_constant(index)
        slice_sq = integrate.simpson(c * best * rho ** (index.d - 1), x=rho)
        time_sq = float(np.sum(u.time_weights * np.exp(-2 * u.times)))
        assert got == pytest.approx(math.sqrt(slice_sq * time_sq), rel=1e-6)

    def test_nonradial_rejected(self):
        g = GridFunction.from_callable(L1, lambda p: np.exp(-(p[..., 0] - 1) ** 2), 8.0, 32)
        u = SpaceTimeGridFunction(g, np.linspace(0, 1, 3), np.stack([g.values] * 3))
        with pytest.raises(UnsupportedCaseError):
            dual_sobolev_norm_p2(u)

    @given(st.lists(st.tuples(st.floats(0.2, 3.0), st.floats(-2, 2)), min_size=1, max_size=3))
    def test_below_l2(self, terms):
        h = lambda r: sum(c * np.exp(-(r / s) ** 2 / 2) for s, c in terms)
        u = _spacetime(B1, h, 20.0, 96)
        assert dual_sobolev_norm_p2(u).value <= lp_norm_spacetime(u, 2).value * (1 + 1e-9) + 1e-12
