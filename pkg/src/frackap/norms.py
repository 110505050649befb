"""Weighted Lebesgue, mixed space-time, Sobolev, Bessel-potential and dual norms.

All norms act on :class:`~frackap.translate.GridFunction` samples whose
weights already carry the factor ``x^a``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import hankel
from .errors import DomainError, UnsupportedCaseError
from .operators import DEFAULT, laplace_bessel_power
from .special import radial_inverse_constant
from .translate import GridFunction, SpaceTimeGridFunction


@dataclass(frozen=True)
class NormReport:
    """A norm value with rough error indicators.

    ``quadrature_error_estimate`` compares two quadrature rules;
    ``truncation_tail_estimate`` bounds what lies outside the grid.
    """

    value: float
    quadrature_error_estimate: float = 0.0
    truncation_tail_estimate: float = 0.0
    label: str = "L^p_a"

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise DomainError(f"norm value must be finite and >= 0, got {self.value}")
        for e in (self.quadrature_error_estimate, self.truncation_tail_estimate):
            if not e >= 0:
                raise DomainError("error estimates must be nonnegative")

    def __float__(self):
        return float(self.value)


def _check_p(p):
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")


def _outer_layer(shape):
    # mask of grid nodes in the outermost 8 along any axis (one panel)
    mask = np.zeros(shape, dtype=bool)
    for ax, m in enumerate(shape):
        sl = [slice(None)] * len(shape)
        sl[ax] = slice(max(m - 8, 0), m)
        mask[tuple(sl)] = True
    return mask


def _weighted_power_sum(values, weights, p):
    return float(np.sum(np.abs(values) ** p * weights))


def _trapezoid_weights(grid):
    # low-order companion rule on the same nodes, used for the error indicator
    ws = []
    for ax, a in zip(grid.axes, grid.index.a):
        w = np.zeros_like(ax)
        dx = np.diff(ax)
        w[:-1] += dx / 2.0
        w[1:] += dx / 2.0
        w = w * np.abs(ax) ** a
        if not grid.index.is_laplace:
            w[0] += ax[0] ** (a + 1.0) / (a + 1.0)
        ws.append(w)
    out = ws[0]
    for extra in ws[1:]:
        out = np.multiply.outer(out, extra)
    return out


def lp_norm_space(f, p, index=None):
    """``||f||_{p,a} = (int |f|^p x^a dx)^(1/p)`` on the grid of ``f``."""
    _check_p(p)
    if index is not None and index != f.index:
        raise DomainError("grid function belongs to a different index")
    s = _weighted_power_sum(f.values, f.cell_weights, p)
    low = _weighted_power_sum(f.values, _trapezoid_weights(f), p)
    tail = _weighted_power_sum(f.values[_outer_layer(f.values.shape)],
                               f.cell_weights[_outer_layer(f.values.shape)], p)
    v = s ** (1.0 / p)
    return NormReport(v, abs(v - low ** (1.0 / p)), tail ** (1.0 / p))


def lp_norm_spacetime(u, p, index=None, time_decay_exponent=None):
    """``||u||_{p,A} = (int_0^inf int |u|^p x^a dx dt)^(1/p)``.

    ``time_decay_exponent`` q declares ``||u(., t)||_p^p ~ t^(-q)`` past the
    last time node; the tail integral then enters the truncation estimate.
    """
    _check_p(p)
    if index is not None and index != u.grid.index:
        raise DomainError("space-time function belongs to a different index")
    w = u.grid.cell_weights
    slices = np.array([_weighted_power_sum(v, w, p) for v in u.values])
    total = float(np.sum(slices * u.time_weights))
    tail = 0.0
    if time_decay_exponent is not None and time_decay_exponent > 1:
        T = u.times[-1]
        tail = slices[-1] * T / (time_decay_exponent - 1.0)
    v = total ** (1.0 / p)
    # time-rule indicator: drop every other interior node
    half = slices[::2]
    th = u.times[::2]
    low = float(integrate.trapezoid(half, th)) if len(th) > 1 else total
    return NormReport(v, abs(v - max(low, 0.0) ** (1.0 / p)), tail ** (1.0 / p),
                      label="L^p_A")


def sobolev_norm(f, m, p, index=None, cfg=DEFAULT):
    """``(sum_{k<=m} ||Delta_a^k f||_{p,a}^p)^(1/p)`` with iterated finite differences.

    ``f`` must carry an exact evaluator (``f.func``), taken even in each
    coordinate in the Bessel case.
    """
    _check_p(p)
    if m < 0:
        raise DomainError("m must be >= 0")
    idx = f.index if index is None else index
    if m > 0 and f.func is None:
        raise UnsupportedCaseError("sobolev_norm needs a grid function with a callable back-end")
    pts = f.points
    total, q_err, t_err = 0.0, 0.0, 0.0
    for k in range(m + 1):
        vals = f.values if k == 0 else laplace_bessel_power(idx, f.func, k, cfg, even=True)(pts)
        rep = lp_norm_space(f.with_values(np.asarray(vals)), p)
        total += rep.value ** p
        q_err += rep.quadrature_error_estimate
        t_err += rep.truncation_tail_estimate
    return NormReport(total ** (1.0 / p), q_err, t_err, label=f"W^({m},{p})_Delta_a")


def potential_norm(g, p, nu, index=None):
    """Norm of ``f = G_{a,nu} *_a g`` in the Bessel-potential space, i.e. ``||g||_{p,a}``."""
    if nu <= 0:
        raise DomainError("potential order nu must be positive")
    rep = lp_norm_space(g, p, index)
    return NormReport(rep.value, rep.quadrature_error_estimate, rep.truncation_tail_estimate,
                      label=f"L^p_(a,{nu:g})")


def dual_weight(rho):
    """Spectral weight ``1 / (1 + rho^4)`` of the p = 2 dual norm with m = 1."""
    rho = np.asarray(rho, dtype=float)
    return 1.0 / (1.0 + rho ** 4)


def _slice_profile(grid, values):
    idx = grid.index
    if idx.n == 1:
        x, v = grid.axes[0], values
        if idx.is_laplace:
            if not np.allclose(v, v[::-1], rtol=1e-8, atol=1e-14 * np.max(np.abs(v)) + 1e-300):
                raise UnsupportedCaseError("slice is not even, hence not radial")
            keep = x >= 0
            x, v = x[keep], v[keep]
        if x[0] > 0:
            x, v = np.concatenate([[0.0], x]), np.concatenate([[v[0]], v])
        return hankel.RadialProfile(nodes=x, values=v, decay=hankel.compact(x[-1]))
    sl = grid.with_values(values)
    if sl.func is None:
        raise UnsupportedCaseError("radial check for n >= 2 needs an exact evaluator")
    rng = np.random.default_rng(0)
    probe = rng.uniform(0.1, 0.5 * grid.axes[0][-1], size=(16, idx.n))
    if not idx.is_laplace:
        probe = np.abs(probe)
    e1 = np.zeros(idx.n)
    e1[0] = 1.0
    r = np.linalg.norm(probe, axis=-1)
    if not np.allclose(sl.func(probe), sl.func(r[:, None] * e1), rtol=1e-8, atol=1e-14):
        raise UnsupportedCaseError("slice is not radial")
    rr = np.linspace(0.0, grid.axes[0][-1], 2049)
    return hankel.RadialProfile(nodes=rr, values=sl.func(rr[:, None] * e1),
                                decay=hankel.compact(rr[-1]))


def _slice_transform(grid, values, rho):
    idx = grid.index
    if idx.n == 1:
        _slice_profile(grid, values)  # radiality check
        # the grid's own rule, with j_alpha (cos in the Laplace case) as kernel
        x = np.abs(grid.axes[0])
        al = idx.alphas[0]
        return hankel._apply(al, rho, x, values * grid.weights[0])
    prof = _slice_profile(grid, values)
    return hankel.radial_transform(idx, prof, rho, rtol=1e-9)


def dual_sobolev_norm_p2(u, index=None, rho_max=64.0, n_rho=1024):
    """p = 2 dual Sobolev norm with m = 1 of radial slices, evaluated spectrally.

    For each slice ``(int |u_t^(rho)|^2 / (1 + rho^4) dmu(rho))^(1/2)``
    where ``dmu = c rho^(d-1) d rho`` is the Plancherel measure; slices are
    combined in L^2 over time with the time weights of ``u``.
    """
    idx = u.grid.index if index is None else index
    c = radial_inverse_constant(idx)
    g, gw = np.polynomial.legendre.leggauss(16)
    br = np.linspace(0.0, rho_max, n_rho // 16 + 1)
    lo, hi = br[:-1, None], br[1:, None]
    rho = (0.5 * (lo + hi) + 0.5 * (hi - lo) * g).ravel()
    wr = (0.5 * (hi - lo) * gw).ravel() * c * rho ** (idx.d - 1.0)
    slices, tails = [], []
    for vals in u.values:
        if not np.any(vals):
            slices.append(0.0)
            tails.append(0.0)
            continue
        F = _slice_transform(u.grid, vals, rho)
        slices.append(float(np.sum(wr * F ** 2 * dual_weight(rho))))
        top = np.max(np.abs(F[rho > rho_max / 2.0]) ** 2)
        # rho^(d-1-4) tail; for d >= 4 the transform's own decay is assumed to dominate
        expo = idx.d - 4.0
        tails.append(c * top * (rho_max ** expo / -expo if expo < 0 else rho_max ** (idx.d - 3.0)))
    slices = np.array(slices)
    total = float(np.sum(slices * u.time_weights))
    tail = float(np.sum(np.array(tails) * u.time_weights))
    return NormReport(np.sqrt(total), 0.0, np.sqrt(max(tail, 0.0)), label="W^(-1,2)_Delta_a,A")
