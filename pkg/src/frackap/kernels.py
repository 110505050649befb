"""Fundamental solution of ``(-Delta_a)^(gamma/2) + d/dt`` and the Bessel potential kernel.

The kernel is defined spectrally, ``P(., t) = I_a^{-1}(exp(-t |xi|^gamma))``,
and evaluated through the radial reduction of :mod:`frackap.hankel`. The
series expansions below are derived from the same definition, so they carry
no separate normalisation.
"""

from dataclasses import dataclass
import math
import os

import numpy as np
from scipy import special as sp
from scipy.interpolate import CubicSpline

from . import hankel
from .errors import DomainError, FrackapError, NonConvergenceError
from .special import BesselIndex, KernelSpec, modified_K, radial_inverse_constant

TABLE_VERSION = "v1"
TABLE_NODES = 512
SERIES_MAX_TERMS = 200
SERIES_RTOL = 1e-12
CANCELLATION_LIMIT = 1e15


def spectral_profile(spec, t):
    """``rho -> exp(-t rho^gamma)`` as a :class:`~frackap.hankel.RadialProfile`."""
    g = spec.gamma
    return hankel.RadialProfile(lambda q: np.exp(-t * q ** g), hankel.exponential(t, g))


RAY_SWITCH = 0.5


def _ray_integral(spec, r, t, rtol, max_refine=4):
    # int exp(-t rho^g) rho^(nu+1) J_nu(r rho) drho as Re of the H^(1) integral, moved to
    # the ray arg(rho) = min(pi/2, pi/(2g)) where H^(1) decays and exp(-t rho^g) stays bounded
    g, nu = spec.gamma, spec.index.nu
    th = min(0.5 * np.pi, 0.5 * np.pi / g)
    e = np.exp(1j * th)
    u_max = 50.0 / math.sin(th)
    rate = t * g * u_max ** max(g - 1.0, 0.0) / r ** g
    h = min(0.5, np.pi / rate)
    prev = None
    for _ in range(max_refine):
        br = np.concatenate([[0.0], h * 2.0 ** -np.arange(40, 0, -1),
                             h * np.arange(1, math.ceil(u_max / h) + 1)])
        vals = []
        for order in (24, 32):
            u, w = hankel._nodes(br, order)
            z = u * e
            f = (np.exp(-t * (u / r) ** g * np.exp(1j * g * th)) * z ** (nu + 1)
                 * sp.hankel1(nu, z) * e).real
            vals.append((np.sum(w * f), np.sum(w * np.abs(f))))
        (coarse, _), (fine, scale) = vals
        if abs(fine - coarse) <= rtol * abs(fine) + 1e-15 * scale:
            return fine / r ** (nu + 2)
        prev = (coarse, fine)
        h /= 2.0
    raise NonConvergenceError("rotated kernel integral did not settle", last_values=prev)


def P_quadrature(spec, r, t, rtol=1e-12):
    """Kernel ``P(r, t)`` by numerical inverse transform of ``exp(-t rho^gamma)``.

    Near the origin (``r t^(-1/gamma) < RAY_SWITCH``) the real-axis Hankel
    integral is used. Further out it cancels badly, so the integral is taken
    along a rotated ray where the Bessel factor decays exponentially.
    """
    if np.any(np.asarray(t) <= 0):
        raise DomainError("P_quadrature needs t > 0")
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    far = r_arr * t ** (-1.0 / spec.gamma) >= RAY_SWITCH
    out = np.empty(len(r_arr))
    if np.any(~far):
        out[~far] = hankel.inverse_radial_transform(spec.index, spectral_profile(spec, t),
                                                    r_arr[~far], rtol)
    nu = spec.index.nu
    c = radial_inverse_constant(spec.index) * math.gamma(nu + 1.0) * 2.0 ** nu
    for i in np.nonzero(far)[0]:
        out[i] = c * r_arr[i] ** -nu * _ray_integral(spec, r_arr[i], t, rtol)
    return float(out[0]) if np.ndim(r) == 0 else out


# -- series ------------------------------------------------------------------

def _large_r_terms(spec, r, t, count):
    # log-magnitudes and signs of the expansion in t / r^gamma (valid for gamma < 1)
    g, d = spec.gamma, spec.d
    m = np.arange(1, count + 1, dtype=float)
    log_mag = (
        m * np.log(t) - sp.gammaln(m + 1) + g * m * np.log(2.0)
        + sp.gammaln((d + g * m) / 2.0) + sp.gammaln(1.0 + g * m / 2.0)
        - (d + g * m) * np.log(r)
    )
    s = np.sin(np.pi * g * m / 2.0)
    sign = (-1.0) ** (m - 1) * np.sign(s)
    with np.errstate(divide="ignore"):
        log_mag = log_mag + np.log(np.abs(s))
    return sign, log_mag


def _large_r_prefactor(spec):
    d = spec.d
    return radial_inverse_constant(spec.index) * math.gamma(d / 2.0) * 2.0 ** (d - 1) / np.pi


def _small_r_terms(spec, r, t, count):
    g, d = spec.gamma, spec.d
    ell = np.arange(count, dtype=float)
    log_mag = (
        sp.gammaln((2 * ell + d) / g) - np.log(g) - sp.gammaln(ell + 1)
        - sp.gammaln(ell + d / 2.0) - ell * np.log(4.0)
        - ((2 * ell + d) / g) * np.log(t)
    )
    with np.errstate(divide="ignore"):
        log_mag = log_mag + 2 * ell * np.log(r)
    sign = (-1.0) ** ell
    return sign, log_mag


def _small_r_prefactor(spec):
    return radial_inverse_constant(spec.index) * math.gamma(spec.d / 2.0)


def poisson_closed_form(spec, r, t):
    """gamma = 1 kernel, ``C t / (t^2 + r^2)^((d+1)/2)``."""
    d = spec.d
    c = (radial_inverse_constant(spec.index) * math.gamma(d / 2.0) * 2.0 ** (d - 1)
         * math.gamma((d + 1) / 2.0) / math.sqrt(math.pi))
    r = np.asarray(r, dtype=float)
    return c * t / (t * t + r * r) ** ((d + 1) / 2.0)


def in_series_region(spec, r, t):
    """Declared working region of the series branch for ``spec.gamma``."""
    g = spec.gamma
    if g == 1.0:
        return True
    if g < 1.0:
        return r > 0 and t / r ** g <= 0.5
    return r * t ** (-1.0 / g) <= 2.0


def _sum_terms(sign, log_mag):
    with np.errstate(over="ignore", invalid="ignore"):
        terms = sign * np.exp(log_mag)
        partial = np.cumsum(terms)
        running_max = np.maximum.accumulate(np.abs(terms))
        return _scan_partial_sums(terms, partial, running_max)


def _scan_partial_sums(terms, partial, running_max):
    for k in range(2, len(partial)):
        s = partial[k]
        if s == 0.0:
            continue
        if not np.isfinite(s) or not running_max[k] <= CANCELLATION_LIMIT * abs(s):
            return s, False
        if (abs(partial[k] - partial[k - 1]) <= SERIES_RTOL * abs(s)
                and abs(partial[k - 1] - partial[k - 2]) <= SERIES_RTOL * abs(s)):
            return s, True
    return partial[-1], False


def P_series(spec, r, t, constant=1.0):
    """Series evaluation of ``P(r, t)``; returns ``(value, converged)``.

    ``converged`` is False outside the declared region, on cancellation or
    when the term budget runs out; callers then fall back to quadrature.
    ``constant`` rescales the leading factor (1 for the exact normalisation).
    """
    if r <= 0 or t <= 0:
        raise DomainError("P_series needs r > 0 and t > 0")
    g = spec.gamma
    if g == 1.0:
        return constant * float(poisson_closed_form(spec, r, t)), True
    if g < 1.0:
        sign, lm = _large_r_terms(spec, r, t, SERIES_MAX_TERMS)
        pref = _large_r_prefactor(spec)
    else:
        sign, lm = _small_r_terms(spec, r, t, SERIES_MAX_TERMS)
        pref = _small_r_prefactor(spec)
    val, ok = _sum_terms(sign, lm)
    return constant * pref * val, bool(ok and in_series_region(spec, r, t))


def calibrate_series_constant(spec, r=1.0, t=1.0):
    """Ratio ``P_quadrature / P_series`` at a reference point (1 when consistent)."""
    val, _ = P_series(spec, r, t)
    return float(P_quadrature(spec, r, t)) / val


def asymptotic_tail(spec, r, t, max_terms=30):
    """Large-r expansion truncated at its smallest term (asymptotic for gamma > 1)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r)
    pref = _large_r_prefactor(spec)
    for i, x in enumerate(r):
        sign, lm = _large_r_terms(spec, x, t, max_terms)
        finite = np.isfinite(lm)
        stop = len(lm)
        for k in range(1, len(lm)):
            if finite[k] and finite[k - 1] and lm[k] > lm[k - 1]:
                stop = k
                break
        terms = np.where(finite[:stop], sign[:stop] * np.exp(lm[:stop]), 0.0)
        out[i] = pref * terms.sum()
    return out


def P_auto(spec, r, t):
    """Series where it converges, quadrature elsewhere; vectorised over ``r``."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r_arr)
    todo = []
    for i, x in enumerate(r_arr):
        if x > 0:
            v, ok = P_series(spec, x, t)
            if ok:
                out[i] = v
                continue
        todo.append(i)
    if todo:
        out[todo] = P_quadrature(spec, r_arr[todo], t)
    return float(out[0]) if np.ndim(r) == 0 else out


# -- tables ------------------------------------------------------------------

def _core_scale(spec):
    # width of the kernel core ~ 1 / (mean of rho under rho^(d-1) exp(-rho^gamma))
    g, d = spec.gamma, spec.d
    mean = math.exp(math.lgamma((d + 1) / g) - math.lgamma(d / g))
    return 0.5 / max(1.0, mean)


def _table_radius(spec):
    g = spec.gamma
    if g < 1.0:
        return 4.0 * 2.0 ** (1.0 / g)
    return 40.0


@dataclass
class KernelTable:
    """Profile ``s -> P(s, 1)`` on 512 nodes uniform in ``asinh(s / s0)``.

    ``s0`` is the core width of the kernel, ``0.5 / max(1, rho_mean)`` with
    ``rho_mean`` the mean of the spectral density ``rho^(d-1) exp(-rho^gamma)``.

    Past the last node the tail law takes over: the convergent large-r
    series for gamma <= 1 and its truncated asymptotic form for gamma > 1.
    """

    spec: KernelSpec
    nodes: np.ndarray
    values: np.ndarray
    accuracy: float = float("nan")

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(self.values <= 0):
            raise FrackapError("kernel table has nonpositive entries")
        self._s0 = _core_scale(self.spec)
        x = np.arcsinh(self.nodes / self._s0)
        self._spline = CubicSpline(x, np.log(self.values))

    @property
    def radius(self):
        return float(self.nodes[-1])

    @property
    def tail_exponent(self):
        """Power-law decay exponent ``d + gamma`` of the profile."""
        return self.spec.d + self.spec.gamma

    def profile(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty_like(s)
        inside = s <= self.radius
        out[inside] = np.exp(self._spline(np.arcsinh(s[inside] / self._s0)))
        if np.any(~inside):
            out[~inside] = tail_law(self.spec, s[~inside])
        return out

    def to_text(self):
        idx = self.spec.index
        head = (f"frackap-table {TABLE_VERSION} gamma={float(self.spec.gamma)!r} n={idx.n} "
                f"a={','.join(repr(float(v)) for v in idx.a)} d={float(idx.d)!r}")
        rows = [f"{float(r)!r},{float(v)!r}" for r, v in zip(self.nodes, self.values)]
        return "\n".join([head] + rows) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        parts = lines[0].split()
        if len(parts) < 2 or parts[0] != "frackap-table":
            raise DomainError("not a frackap kernel table")
        if parts[1] != TABLE_VERSION:
            raise DomainError(f"unsupported table version {parts[1]!r}")
        fields = dict(p.split("=", 1) for p in parts[2:])
        a = tuple(float(v) for v in fields["a"].split(","))
        if len(a) != int(fields["n"]):
            raise DomainError("table header: n does not match a")
        spec = KernelSpec(float(fields["gamma"]), BesselIndex(a))
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        return cls(spec, data[:, 0], data[:, 1])


_TAIL_CHUNK = 20_000


def _large_r_matrix(spec, s, count):
    # rows: points, columns: terms of the large-r expansion at t = 1
    sign, lm0 = _large_r_terms(spec, 1.0, 1.0, count)
    m = np.arange(1, count + 1, dtype=float)
    lm = lm0[None, :] - (spec.d + spec.gamma * m)[None, :] * np.log(s)[:, None]
    return sign, lm


def tail_law(spec, s):
    """Profile ``P(s, 1)`` for large ``s`` from the large-r expansion (vectorised).

    Convergent for gamma < 1 (summed until terms drop below 1e-17 of the
    leading one); for gamma > 1 truncated at the smallest term.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if spec.gamma == 1.0:
        return poisson_closed_form(spec, s, 1.0)
    if s.size > _TAIL_CHUNK:
        return np.concatenate([tail_law(spec, s.ravel()[k:k + _TAIL_CHUNK])
                               for k in range(0, s.size, _TAIL_CHUNK)]).reshape(s.shape)
    sign, lm = _large_r_matrix(spec, s, 60 if spec.gamma < 1.0 else 30)
    finite = np.isfinite(lm)
    if spec.gamma > 1.0:
        grow = np.zeros_like(lm, dtype=bool)
        grow[:, 1:] = finite[:, 1:] & finite[:, :-1] & (lm[:, 1:] > lm[:, :-1])
        stop = np.where(grow.any(axis=1), grow.argmax(axis=1), lm.shape[1])
        finite &= np.arange(lm.shape[1])[None, :] < stop[:, None]
    with np.errstate(under="ignore"):
        terms = np.where(finite, sign[None, :] * np.exp(np.where(finite, lm, -np.inf)), 0.0)
    return _large_r_prefactor(spec) * terms.sum(axis=1)


def build_table(spec, n_nodes=TABLE_NODES, radius=None):
    radius = _table_radius(spec) if radius is None else radius
    s0 = _core_scale(spec)
    x = np.linspace(0.0, np.arcsinh(radius / s0), n_nodes)
    nodes = s0 * np.sinh(x)
    values = P_auto(spec, nodes, 1.0)
    table = KernelTable(spec, nodes, values)
    mid = 0.5 * (nodes[1:] + nodes[:-1])[:: max(1, n_nodes // 32)]
    direct = P_auto(spec, mid, 1.0)
    table.accuracy = float(np.max(np.abs(table.profile(mid) / direct - 1.0)))
    return table


_TABLES = {}


def _table_file(spec, directory):
    a = "_".join(f"{v:g}" for v in spec.index.a)
    return os.path.join(directory, f"table_{TABLE_VERSION}_g{spec.gamma:g}_a{a}.txt")


def get_table(spec):
    """Kernel table for ``spec``, cached in memory and, if ``FRACKAP_TABLE_DIR`` is set, on disk."""
    if spec in _TABLES:
        return _TABLES[spec]
    directory = os.environ.get("FRACKAP_TABLE_DIR")
    table = None
    if directory:
        path = _table_file(spec, directory)
        if os.path.exists(path):
            with open(path) as fh:
                table = KernelTable.from_text(fh.read())
            if table.spec != spec:
                table = None
    if table is None:
        table = build_table(spec)
        if directory:
            os.makedirs(directory, exist_ok=True)
            with open(_table_file(spec, directory), "w") as fh:
                fh.write(table.to_text())
    _TABLES[spec] = table
    return table


def P_eval(table, r, t):
    """``P(r, t) = t^(-d/gamma) P(r t^(-1/gamma), 1)`` from a t = 1 table."""
    if np.any(np.asarray(t) <= 0):
        raise DomainError("P_eval needs t > 0; the kernel vanishes for t <= 0")
    g, d = table.spec.gamma, table.spec.d
    t = np.asarray(t, dtype=float)
    out = t ** (-d / g) * table.profile(np.asarray(r, dtype=float) * t ** (-1.0 / g)).reshape(
        np.broadcast(np.asarray(r), t).shape)
    return float(out) if out.ndim == 0 else out


def kernel_mass(spec, t, table=None):
    """``int P(x, t) x^a dx`` by spatial quadrature plus an analytic series tail."""
    from .special import sphere_measure

    table = build_table(spec) if table is None else table
    g, d = spec.gamma, spec.d
    R = t ** (1.0 / g) * table.radius
    br = np.concatenate([[0.0], np.geomspace(R * 1e-8, R, 400)])
    x, w = hankel._nodes(br, 20)
    head = np.sum(w * P_eval(table, x, t) * x ** (d - 1))
    # tail: integrate the large-r expansion term by term, r^(-d-gamma m) r^(d-1)
    pref = _large_r_prefactor(spec)
    if g == 1.0:
        xs, ws = hankel._nodes(np.concatenate([np.geomspace(R, R * 1e8, 200)]), 20)
        tail = np.sum(ws * poisson_closed_form(spec, xs, t) * xs ** (d - 1))
    else:
        sign, lm = _large_r_terms(spec, R, t, 40 if g < 1 else 12)
        m = np.arange(1, len(lm) + 1)
        fin = np.isfinite(lm)
        tail = pref * np.sum(np.where(fin, sign * np.exp(np.where(fin, lm, 0.0)) * R ** d
                                      / (g * m), 0.0))
    return sphere_measure(spec.index) * (head + tail)


# -- Bessel potential ----------------------------------------------------------

def G_kernel(index, nu, r):
    """Bessel potential kernel whose transform is ``(1 + rho^2)^(-nu/2)``.

    ``c K_{(d-nu)/2}(r) / r^{(d-nu)/2}``; in the Laplace case the constant
    carries an extra ``2^-n`` so that the same multiplier holds.
    """
    if nu <= 0:
        raise DomainError("G_kernel needs nu > 0")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("G_kernel is singular at r = 0")
    n, d = index.n, index.d
    prod = np.prod([math.gamma(al + 1.0) for al in index.alphas])
    c = 2.0 ** ((n - index.size - nu) / 2.0 + 1.0) / (math.gamma(nu / 2.0) * prod)
    if index.is_laplace:
        c /= 2.0 ** n
    m = (d - nu) / 2.0
    out = c * modified_K(m, r) / r ** m
    return float(out) if out.ndim == 0 else out


def G_profile(index, nu=2.0):
    return hankel.RadialProfile(lambda r: G_kernel(index, nu, r), hankel.exponential(1.0))


def mollified_profile(spec, t, nu=2.0):
    """Radial profile of ``P(., t) *_a G_{a,nu}`` via the multiplier ``exp(-t rho^g)/(1+rho^2)^(nu/2)``."""
    if t <= 0:
        raise DomainError("mollified_profile needs t > 0")
    g, idx = spec.gamma, spec.index
    mult = hankel.RadialProfile(
        lambda q: np.exp(-t * q ** g) * (1.0 + q * q) ** (-nu / 2.0), hankel.exponential(t, g)
    )
    # exp(-t rho^g) is not smooth at rho = 0, so the profile has the power
    # tail r^-(d+g) of the kernel itself
    return hankel.RadialProfile(
        lambda r: hankel.inverse_radial_transform(idx, mult, r, rtol=1e-10),
        hankel.power(-(idx.d + g)),
    )


def shift_index(index, i):
    """Index with ``a_i`` raised by 2 (axes counted from 1)."""
    index.require_bessel()
    if not 1 <= i <= index.n:
        raise DomainError(f"axis {i} out of range 1..{index.n}")
    a = list(index.a)
    a[i - 1] += 2.0
    return BesselIndex(tuple(a))
