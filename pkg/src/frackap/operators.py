"""Bessel-Laplace operator, spherical differences and the fractional operator.

Functions ``f`` are vectorised callables taking points with the coordinate on
the last axis. Radial profiles (one variable) are used for the spectral form.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import special as sp

from . import hankel
from .errors import DomainError, NonConvergenceError, StepTooLargeError, UnsupportedCaseError
from .special import BesselIndex, KernelSpec, j_norm, sphere_measure
from .translate import SpaceTimeGridFunction, bessel_translate_1d


@dataclass(frozen=True)
class OperatorConfig:
    fd_step: float = 1e-3
    eta_split: float = 1.0
    sphere_quadrature_order: int = 32
    richardson: bool = True

    def __post_init__(self):
        if self.fd_step <= 0 or self.eta_split <= 0:
            raise DomainError("fd_step and eta_split must be positive")
        if self.sphere_quadrature_order < 4:
            raise DomainError("sphere quadrature order must be >= 4")


DEFAULT = OperatorConfig()


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape[-1] != n:
        raise DomainError(f"points need {n} coordinates on the last axis")
    return x


def _lb_fixed(index, f, x, h, even):
    total = 0.0
    f0 = f(x)
    for i, ai in enumerate(index.a):
        e = np.zeros(index.n)
        e[i] = h
        fp, fm = f(x + e), f(np.abs(x - e) if even else x - e)
        total = total + (fp - 2.0 * f0 + fm) / (h * h)
        if ai:
            total = total + ai / x[..., i] * (fp - fm) / (2.0 * h)
    return total


def laplace_bessel_apply(index, f, x, cfg=DEFAULT, even=False):
    """``Delta_a f(x) = sum_i (d_ii + (a_i / x_i) d_i) f`` by central differences.

    With ``cfg.richardson`` two step sizes are combined to cancel the h^2 term.
    ``even=True`` declares ``f`` even in every coordinate (the natural class
    on the orthant); stencils then reflect through ``x_i = 0`` and points
    closer than ``fd_step`` to the boundary are allowed.
    """
    x = _as_points(x, index.n)
    h = cfg.fd_step
    bessel = not index.is_laplace
    if bessel and not even and np.any(x <= h):
        raise StepTooLargeError(f"x_i <= fd_step ({h}) on a Bessel axis")
    even = even and bessel
    out = _lb_fixed(index, f, x, h, even)
    if cfg.richardson:
        out = (4.0 * _lb_fixed(index, f, x, h / 2.0, even) - out) / 3.0
    return out if np.ndim(out) else float(out)


def laplace_bessel_power(index, f, k, cfg=DEFAULT, even=False):
    """Callable for ``Delta_a^k f`` (nested finite differences)."""
    g = f
    for _ in range(k):
        g = (lambda inner: lambda p: laplace_bessel_apply(index, inner, p, cfg, even))(g)
    return g


# -- spherical difference ----------------------------------------------------------

@lru_cache(maxsize=32)
def _sphere_rule(a, order):
    """Directions on S_(+)^{n-1} and weights normalised to sum 1 (weight Theta^a)."""
    n = len(a)
    if n == 1:
        if a[0] == 0.0:
            return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
        return np.array([[1.0]]), np.array([1.0])
    if n == 2 and a[0] == 0.0:
        phi = 2.0 * np.pi * np.arange(order) / order
        return np.stack([np.cos(phi), np.sin(phi)], -1), np.full(order, 1.0 / order)
    if n == 2:
        # v = sin^2 phi turns cos^a1 sin^a2 d phi into a Jacobi weight on [0, 1]
        u, w = sp.roots_jacobi(order, (a[0] - 1) / 2.0, (a[1] - 1) / 2.0)
        v = (1.0 + u) / 2.0
        dirs = np.stack([np.sqrt(1.0 - v), np.sqrt(v)], -1)
        return dirs, w / w.sum()
    if n == 3 and all(v == 0.0 for v in a):
        c, wc = np.polynomial.legendre.leggauss(order)
        phi = 2.0 * np.pi * np.arange(2 * order) / (2 * order)
        s = np.sqrt(1.0 - c * c)
        dirs = np.stack([np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)),
                         np.outer(c, np.ones_like(phi))], -1).reshape(-1, 3)
        w = np.outer(wc, np.ones_like(phi)).ravel()
        return dirs, w / w.sum()
    raise UnsupportedCaseError("sphere quadrature implemented for n <= 2, and n = 3 Laplace")


def _translate_point(index, f, x, y, order):
    # T^y_a f(x); x (..., n) and y broadcast against each other
    if index.is_laplace:
        return f(x - y)
    if index.n == 1:
        g = lambda r: f(r[..., None])
        return bessel_translate_1d(index.alphas[0], g, x[..., 0], y[..., 0])
    from .translate import translate_nd
    return translate_nd(index, f, x, y, n_nodes=order)


def spherical_difference(index, f, x, r, cfg=DEFAULT):
    """Sphere-averaged difference ``f(x) - mean_Theta T^{r Theta}_a f(x)``.

    ``r`` may be an array; the result then has shape ``r.shape + x.shape[:-1]``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radius must be positive")
    x = _as_points(x, index.n)
    dirs, w = _sphere_rule(tuple(index.a), cfg.sphere_quadrature_order)
    rr = r.reshape(r.shape + (1,) * x.ndim)
    mean = 0.0
    for d_, wk in zip(dirs, w):
        mean = mean + wk * _translate_point(index, f, x, rr * d_, cfg.sphere_quadrature_order)
    out = f(x) - mean
    return out if np.ndim(out) else float(out)


# -- fractional operator -----------------------------------------------------------

def transform_of(index, profile, probe_max=1e4, rtol=1e-12, n_nodes=4097):
    """Radial transform of ``profile``, tabulated up to where it drops below 1e-14 of its peak."""
    f0 = abs(hankel.radial_transform(index, profile, 0.0, rtol))
    R = 1.0
    while R < probe_max:
        tail = np.abs(hankel.radial_transform(index, profile, np.array([R, 1.5 * R, 2 * R]), rtol))
        # 1e-14 sits just above the quadrature noise floor
        if np.all(tail < 1e-14 * max(f0, 1e-300)):
            break
        R *= 2.0
    q = np.linspace(0.0, 2.0 * R, n_nodes)
    vals = hankel.radial_transform(index, profile, q, rtol)
    return hankel.RadialProfile(nodes=q, values=vals, decay=hankel.compact(2.0 * R))


def frac_laplace_spectral(spec, profile, r, spectrum=None, rtol=1e-12):
    """``(-Delta_a)^(gamma/2)`` of a radial function as the inverse transform of ``rho^gamma f^``.

    ``spectrum`` may supply the transform of ``profile`` directly.
    """
    idx = spec.index
    spectrum = transform_of(idx, profile) if spectrum is None else spectrum
    g = spec.gamma
    mult = hankel.RadialProfile(lambda q: q ** g * spectrum(q), spectrum.decay)
    return hankel.inverse_radial_transform(idx, mult, r, rtol)


def multiplier_moment(nu, gamma):
    """``int_0^inf s^(-1-gamma) (1 - j_nu(s)) ds`` in closed form."""
    return (math.gamma(nu + 1.0) * math.gamma(1.0 - gamma / 2.0)
            / (gamma * 2.0 ** gamma * math.gamma(nu + 1.0 + gamma / 2.0)))


_R_FLOOR = 1e-3


def _panel_nodes(br, order):
    g, w = np.polynomial.legendre.leggauss(order)
    lo, hi = br[:-1, None], br[1:, None]
    return (0.5 * (lo + hi) + 0.5 * (hi - lo) * g).ravel(), (0.5 * (hi - lo) * w).ravel()


def _radial_difference_integral(diff, fx, gamma, eta, order=24):
    # near part: s = r^(2-gamma) gives r^(-1-gamma) dr = r^(-2) ds / (2 - gamma).
    # Delta/r^2 is flat to O(r^2) near 0, so below _R_FLOOR (relative to eta) it
    # is frozen instead of being evaluated in the rounding-noise regime.
    smax = eta ** (2.0 - gamma)
    s, ws = _panel_nodes(np.concatenate([[0.0], smax * 2.0 ** -np.arange(12, 0, -1), [smax]]), order)
    rr = np.maximum(s ** (1.0 / (2.0 - gamma)), _R_FLOOR * eta)
    near = np.tensordot(ws, diff(rr) / rr.reshape(rr.shape + (1,) * np.ndim(fx)) ** 2, axes=1)
    near = near / (2.0 - gamma)
    # far part: geometric panels, then the analytic tail with the difference
    # frozen at its value at the last radius (f(x) for decaying f, 0 for constants)
    br = eta * 2.0 ** np.arange(0, 13)
    rr, wr = _panel_nodes(br, order)
    far = np.tensordot(wr * rr ** (-1.0 - gamma), diff(rr), axes=1)
    last = diff(br[-1:])[0]
    return near + far + last * br[-1] ** (-gamma) / gamma


def frac_laplace_integral(index, gamma, f, x, cfg=DEFAULT, constant=None):
    """Singular-integral form ``C |S| int_0^inf r^(-1-gamma) Delta_{r,s,a} f(x) dr``.

    ``constant`` defaults to the value calibrated against the spectral form
    (:func:`calibrated_constant`).
    """
    if not 0.0 < gamma < 2.0:
        raise DomainError("gamma must lie in (0, 2)")
    x = _as_points(x, index.n)
    fx = f(x)
    diff = lambda rr: np.asarray(spherical_difference(index, f, x, rr, cfg))
    # C^2 check: Delta_{r,s} f / r^2 must settle as r -> 0
    q = [np.abs(diff(np.array([r]))[0]) / r ** 2 for r in (4e-3, 2e-3)]
    if np.any(q[1] > 1.5 * q[0] + 1e-6 * (1.0 + np.abs(fx))):
        raise NonConvergenceError("spherical difference is not O(r^2); f not smooth enough")
    c = calibrated_constant(index, gamma) if constant is None else constant
    val = c * sphere_measure(index) * _radial_difference_integral(diff, fx, gamma, cfg.eta_split)
    return val if np.ndim(val) else float(val)


@lru_cache(maxsize=64)
def calibrated_constant(index, gamma):
    """Constant of the singular-integral form, fitted on a standard Gaussian at ``|x| = 1``."""
    spec = KernelSpec(gamma, index)
    prof = hankel.gaussian_profile()
    ref = frac_laplace_spectral(spec, prof, 1.0)
    point = np.zeros(index.n)
    point[0] = 1.0
    f = lambda p: np.exp(-0.5 * np.sum(np.asarray(p) ** 2, axis=-1))
    raw = frac_laplace_integral(index, gamma, f, point, constant=1.0)
    return float(ref / raw)


def heat_operator_apply(spec, u, x, t, cfg=DEFAULT, frac=None):
    """``((-Delta_a)^(gamma/2) + d/dt) u`` at ``(x, t)``.

    ``u`` is a callable ``u(points, t)`` or a :class:`SpaceTimeGridFunction`
    (then ``t`` must be an interior time node). ``frac(f, x)`` overrides the
    fractional term (default: singular-integral form).
    """
    h = cfg.fd_step
    if isinstance(u, SpaceTimeGridFunction):
        k = int(np.argmin(np.abs(u.times - t)))
        if not np.isclose(u.times[k], t) or k == 0 or k == len(u.times) - 1:
            raise StepTooLargeError("t must be an interior node of the time grid")
        dt_u = (u.values[k + 1] - u.values[k - 1]) / (u.times[k + 1] - u.times[k - 1])
        sl = u.slice(k)
        pts = _as_points(x, spec.index.n)
        dtu = sl.with_values(dt_u)(pts)
        f = sl
    else:
        if t <= h:
            raise StepTooLargeError("t within fd_step of the time boundary")
        f = lambda p: u(p, t)
        dtu = (u(_as_points(x, spec.index.n), t + h) - u(_as_points(x, spec.index.n), t - h)) / (2 * h)
    if frac is None:
        fr = frac_laplace_integral(spec.index, spec.gamma, f, x, cfg)
    else:
        fr = frac(f, x)
    out = fr + dtu
    return out if np.ndim(out) else float(out)
