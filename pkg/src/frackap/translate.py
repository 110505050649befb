"""Bessel (Delsarte) and ordinary translations, and the convolutions built on them.

Grid functions carry their own weighted quadrature: on a Bessel axis the
weights include the factor ``x^a_i`` of the measure ``x^a dx``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import special as sp
from scipy.interpolate import CubicSpline, RegularGridInterpolator
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, NonConvergenceError, ShapeError, UnsupportedCaseError

GJ_START = 32
GJ_TOL = 1e-9


@lru_cache(maxsize=64)
def _gauss_jacobi_cos(alpha, n):
    # nodes u = cos(theta) and weights for (1 - u^2)^(alpha - 1/2), normalised to total 1.
    # Golub-Welsch on the Gegenbauer recurrence (lambda = alpha); the k = 1
    # coefficient is written in cancelled form, scipy's is 0/0 for tiny alpha
    k = np.arange(1, n, dtype=float)
    lam = float(alpha)
    b2 = k * (k + 2 * lam - 1) / (4 * (k + lam) * (k + lam - 1) + (k == 1))
    b2[0] = 1.0 / (2.0 * (1.0 + lam))
    u, vec = eigh_tridiagonal(np.zeros(n), np.sqrt(b2))
    w = vec[0] ** 2
    return u, w / w.sum()


def translation_constant(alpha):
    """``Gamma(alpha+1) / (sqrt(pi) Gamma(alpha+1/2))``."""
    return math.gamma(alpha + 1.0) / (math.sqrt(math.pi) * math.gamma(alpha + 0.5))


def _translate_fixed(alpha, f, x, t, n):
    return _translate_rule(*_gauss_jacobi_cos(alpha, n), f, x, t)


@lru_cache(maxsize=64)
def _graded_theta_rule(alpha, order, levels=30):
    # composite rule in theta for sin(theta)^(2 alpha), panels halving towards 0
    br = np.concatenate([[0.0], np.pi * 2.0 ** -np.arange(levels, 0, -1),
                         np.pi - np.pi * 2.0 ** -np.arange(2, 6), [np.pi]])
    g, gw = np.polynomial.legendre.leggauss(order)
    uj, wj = sp.roots_jacobi(order, 0.0, 2.0 * alpha)
    th, w = [], []
    for k, (lo, hi) in enumerate(zip(br[:-1], br[1:])):
        h = hi - lo
        if k == 0 or k == len(br) - 2:
            # endpoint panel: exact theta^(2 alpha) weight, smooth remainder
            y = h * (1.0 + uj) / 2.0
            wy = wj * (h / 2.0) ** (2.0 * alpha + 1.0)
            node = y if k == 0 else np.pi - y
            th.append(node)
            w.append(wy * (np.sin(node) / y) ** (2.0 * alpha))
        else:
            node = 0.5 * (lo + hi) + 0.5 * h * g
            th.append(node)
            w.append(0.5 * h * gw * np.sin(node) ** (2.0 * alpha))
    th, w = np.concatenate(th), np.concatenate(w)
    return np.cos(th), w / w.sum()


def _translate_rule(u, w, f, x, t):
    x = np.asarray(x, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    arg = np.sqrt(np.maximum(x * x + t * t - 2.0 * x * t * u, 0.0))
    return np.sum(np.asarray(f(arg), dtype=float) * w, axis=-1)


def bessel_translate_1d(alpha, f, x, t, tol=GJ_TOL):
    """Delsarte translation ``T^t_alpha f(x)``, alpha > -1/2.

    The theta integral is done by Gauss-Jacobi quadrature in ``u = cos theta``
    with 32 then 64 nodes. If those disagree (``f`` is sharply peaked near
    ``|x - t|``) a composite rule graded towards ``theta = 0`` is used, at
    two orders; a remaining disagreement raises :class:`NonConvergenceError`.
    """
    if alpha <= -0.5:
        raise DomainError("Bessel translation needs alpha > -1/2")
    x = np.abs(np.asarray(x, dtype=float))
    t = np.abs(np.asarray(t, dtype=float))
    ok = lambda a, b: np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(b)))
    prev = _translate_fixed(alpha, f, x, t, GJ_START)
    cur = _translate_fixed(alpha, f, x, t, 2 * GJ_START)
    if not ok(prev, cur):
        prev = _translate_rule(*_graded_theta_rule(alpha, 12), f, x, t)
        cur = _translate_rule(*_graded_theta_rule(alpha, 20), f, x, t)
        if not ok(prev, cur):
            raise NonConvergenceError("translation quadrature did not settle",
                                      last_values=(prev, cur))
    return cur if cur.ndim else float(cur)


def midpoint_translate_1d(f, x, t, allow=False):
    """Translation for the degenerate weight ``a_i = 0`` inside a Bessel index.

    ``(f(x+t) + f(|x-t|)) / 2``. Such indices are outside the supported
    cases, so this raises unless ``allow`` is set (test use).
    """
    if not allow:
        raise UnsupportedCaseError("a_i = 0 inside a Bessel index is not supported")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return 0.5 * (f(x + t) + f(np.abs(x - t)))


def translate_nd(index, f, x, y, n_nodes=GJ_START):
    """``T^y_a f(x)``: Bessel translation axis by axis, or the shift ``f(x - y)``.

    ``f`` takes arrays with the coordinate on the last axis.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != index.n or y.shape[-1] != index.n:
        raise ShapeError("point dimension does not match the index")
    if index.is_laplace:
        return f(x - y)
    # tensor-product Gauss-Jacobi rule over the n angles
    pts = np.broadcast_to(x, np.broadcast(x, y).shape)[..., None, :].copy()
    weight = np.ones(1)
    for i, al in enumerate(index.alphas):
        u, w = _gauss_jacobi_cos(al, n_nodes)
        xi = x[..., i][..., None, None]
        yi = y[..., i][..., None, None]
        new = np.sqrt(np.maximum(xi * xi + yi * yi - 2.0 * xi * yi * u[None, :], 0.0))
        m = pts.shape[-2]
        pts = np.repeat(pts, len(u), axis=-2)
        pts[..., i] = np.broadcast_to(new, pts.shape[:-2] + (m, len(u))).reshape(pts.shape[:-1])
        weight = np.outer(weight, w).ravel()
    vals = np.asarray(f(pts), dtype=float)
    out = vals @ weight
    return out if np.ndim(out) else float(out)


# -- grids -----------------------------------------------------------------------

def axis_rule(x_max, n_nodes, a=0.0, laplace=False, grading=None):
    """Composite Gauss rule on ``[0, x_max]`` (or ``[-x_max, x_max]``) for ``x^a dx``.

    The first panel uses Gauss-Jacobi with the exact endpoint weight; the
    rest are Gauss-Legendre. ``grading`` > 1 makes panel widths grow
    geometrically by that ratio. Returns ``(nodes, weights)``.
    """
    if n_nodes < 8:
        raise ShapeError("an axis needs at least 8 nodes")
    order = 8
    panels = max(1, n_nodes // order)
    if laplace:
        half = axis_rule(x_max, max(8, (panels // 2) * order), 0.0, False, grading)
        nodes = np.concatenate([-half[0][::-1], half[0]])
        weights = np.concatenate([half[1][::-1], half[1]])
        return nodes, weights
    if grading and grading > 1.0:
        widths = grading ** np.arange(panels)
    else:
        widths = np.ones(panels)
    br = np.concatenate([[0.0], np.cumsum(widths)]) * x_max / widths.sum()
    xs, ws = [], []
    h0 = br[1]
    u, w = sp.roots_jacobi(order, 0.0, a)
    xs.append(h0 * (1.0 + u) / 2.0)
    ws.append(w * (h0 / 2.0) ** (a + 1.0))
    g, gw = np.polynomial.legendre.leggauss(order)
    for lo, hi in zip(br[1:-1], br[2:]):
        xp = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g
        xs.append(xp)
        ws.append(0.5 * (hi - lo) * gw * xp ** a)
    return np.concatenate(xs), np.concatenate(ws)


@dataclass
class GridFunction:
    """Samples on a tensor grid with weights for the measure ``x^a dx``.

    ``axes`` and ``weights`` hold one 1-D array per coordinate; ``values``
    has the tensor shape. ``func`` (optional) is an exact vectorised
    evaluator used instead of interpolation between nodes.
    """

    index: object
    axes: list
    weights: list
    values: np.ndarray
    func: object = None
    _interp: object = field(default=None, repr=False)

    def __post_init__(self):
        self.axes = [np.asarray(a, dtype=float) for a in self.axes]
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.values = np.asarray(self.values, dtype=float)
        if len(self.axes) != self.index.n:
            raise ShapeError("one axis per coordinate is required")
        shape = tuple(len(a) for a in self.axes)
        if self.values.shape != shape:
            raise ShapeError(f"values shape {self.values.shape} != grid {shape}")
        for ax, w in zip(self.axes, self.weights):
            if len(ax) < 8 or len(w) != len(ax) or np.any(w <= 0):
                raise ShapeError("axes need >= 8 nodes and positive weights")

    @classmethod
    def from_callable(cls, index, f, x_max, n_nodes=64, grading=None):
        """Sample ``f`` (coordinates on the last axis) on a default grid."""
        rules = [axis_rule(x_max, n_nodes, ai, index.is_laplace, grading) for ai in index.a]
        axes = [r[0] for r in rules]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return cls(index, axes, [r[1] for r in rules], f(pts), func=f)

    @classmethod
    def radial(cls, index, profile, x_max, n_nodes=64, grading=None):
        f = lambda p: profile(np.sqrt(np.sum(np.asarray(p) ** 2, axis=-1)))
        return cls.from_callable(index, f, x_max, n_nodes, grading)

    def with_values(self, values, func=None):
        return GridFunction(self.index, self.axes, self.weights, values, func)

    @property
    def points(self):
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    @property
    def cell_weights(self):
        w = self.weights[0]
        for extra in self.weights[1:]:
            w = np.multiply.outer(w, extra)
        return w

    def integrate(self, values=None):
        v = self.values if values is None else values
        return float(np.sum(v * self.cell_weights))

    def same_grid(self, other):
        return (self.index == other.index and len(self.axes) == len(other.axes)
                and all(a.shape == b.shape and np.allclose(a, b)
                        for a, b in zip(self.axes, other.axes)))

    def __call__(self, pts):
        """Evaluate at arbitrary points; exact if ``func`` is set, else cubic interpolation."""
        pts = np.asarray(pts, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(pts), dtype=float)
        if self._interp is None:
            self._interp = self._build_interp()
        return self._interp(pts)

    def _build_interp(self):
        lo = [a[0] for a in self.axes]
        hi = [a[-1] for a in self.axes]
        if self.index.n == 1:
            ax, vals = self.axes[0], self.values
            if not self.index.is_laplace:
                # even extension through the origin
                ax = np.concatenate([-ax[::-1], ax])
                vals = np.concatenate([vals[::-1], vals])
            spl = CubicSpline(ax, vals)

            def ev(p):
                x = p[..., 0]
                xe = x if self.index.is_laplace else np.abs(x)
                out = spl(np.clip(xe, ax[0], ax[-1]))
                return np.where((xe > hi[0]) | (xe < (lo[0] if self.index.is_laplace else -np.inf)),
                                0.0, out)
            return ev
        rgi = RegularGridInterpolator(self.axes, self.values, method="cubic",
                                      bounds_error=False, fill_value=0.0)

        def ev(p):
            q = p if self.index.is_laplace else np.abs(p)
            q = np.maximum(q, lo) if not self.index.is_laplace else q
            return rgi(q.reshape(-1, q.shape[-1])).reshape(q.shape[:-1])
        return ev


@dataclass
class SpaceTimeGridFunction:
    """Slices of a common spatial grid at uniform times ``t_k = k dt``, ``k = 0..N``.

    ``values`` has shape ``(len(times),) + spatial shape``; the time rule is
    the trapezoid rule. A slice at ``t = 0`` may hold a spike (divide by the
    endpoint weight ``dt/2``) to represent mass concentrated at time zero.
    ``tweights`` replaces the trapezoid weights (e.g. by a Gauss rule) when
    the slices are only used for norms.
    """

    grid: GridFunction
    times: np.ndarray
    values: np.ndarray
    tweights: np.ndarray = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.times) < 2 or np.any(np.diff(self.times) <= 0) or self.times[0] < 0:
            raise ShapeError("times must be nonnegative and strictly increasing")
        if self.values.shape != (len(self.times),) + self.grid.values.shape:
            raise ShapeError("values do not match times x spatial grid")

    @property
    def time_weights(self):
        if self.tweights is not None:
            return np.asarray(self.tweights, dtype=float)
        t = self.times
        w = np.zeros_like(t)
        dt = np.diff(t)
        w[:-1] += dt / 2.0
        w[1:] += dt / 2.0
        return w

    def slice(self, k):
        return self.grid.with_values(self.values[k])

    def same_layout(self, other):
        return (len(self.times) == len(other.times) and np.allclose(self.times, other.times)
                and self.grid.same_grid(other.grid))


def _translated_matrix(index, f, out_pts, pts):
    # M[i, j] = T^{out_i} f (pts_j)
    if index.is_laplace:
        return np.asarray(f(out_pts[:, None, :] - pts[None, :, :]), dtype=float)
    if index.n == 1:
        al = index.alphas[0]
        g = lambda r: f(r[..., None])
        if getattr(f, "func", True) is None:
            # a spline has kinks in its third derivative, so the angular rule
            # only converges algebraically; its error is far below the
            # interpolation error, hence a fixed rule without the settle test
            return _translate_fixed(al, g, pts[None, :, 0], out_pts[:, None, 0], 2 * GJ_START)
        return bessel_translate_1d(al, g, pts[None, :, 0], out_pts[:, None, 0])
    return translate_nd(index, f, pts[None, :, :], out_pts[:, None, :])


def bessel_convolve(index, f, g, out_points=None):
    """``(f *_a g)(t) = int T^t_a f(x) g(x) x^a dx`` on the grid of ``g``.

    Direct O(N^2) summation; ``f`` is evaluated off-grid through its
    evaluator (exact ``func`` if present, otherwise the cubic interpolant
    with a fixed 64-node angular rule). ``out_points`` (coordinates on the last axis) overrides the
    output nodes and returns a plain array.
    """
    if f.index != index or g.index != index:
        raise ShapeError("grid functions belong to a different index")
    if out_points is None and not f.same_grid(g):
        raise ShapeError("incompatible grids")
    pts = g.points.reshape(-1, index.n)
    wg = (g.values * g.cell_weights).reshape(-1)
    outs = pts if out_points is None else np.asarray(out_points, dtype=float).reshape(-1, index.n)
    res = np.empty(len(outs))
    # each (out, pt) pair may expand to ~700 angular nodes
    step = max(1, 8_000 // max(len(pts), 1))
    for s in range(0, len(outs), step):
        res[s:s + step] = _translated_matrix(index, f, outs[s:s + step], pts) @ wg
    if out_points is not None:
        return res.reshape(np.asarray(out_points).shape[:-1])
    return g.with_values(res.reshape(g.values.shape))


def _graded_breaks(r, x_max, levels):
    # panels halving towards 0 and towards x = r from both sides, then growing to x_max
    pts = [0.0, x_max]
    base = max(r, 1.0)
    pts += list(base * 2.0 ** -np.arange(1, levels + 1))
    if r > 0:
        d = r * 2.0 ** -np.arange(1, levels + 1)
        pts += list(r - d) + list(r + d) + [r]
    grow = r + r / 2.0 if r > 0 else base
    while grow < x_max:
        pts.append(grow)
        grow *= 1.5
    pts = np.unique(np.clip(pts, 0.0, x_max))
    return pts


def convolve_radial_1d(alpha, f, g, r, x_max, order=16, levels=30):
    """Pointwise ``(f *_alpha g)(r) = int_0^x_max T^r f(x) g(x) x^(2 alpha + 1) dx``.

    ``f`` and ``g`` are vectorised callables on ``[0, inf)``. For
    ``alpha = -1/2`` both are read as even functions on the line and the
    result is their ordinary convolution over the whole line. Panels are
    graded towards ``x = 0`` and ``x = r`` where a narrow ``f`` makes the
    translated integrand peak, so no global grid has to resolve it.
    """
    gl, gw = np.polynomial.legendre.leggauss(order)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r)
    for i, ri in enumerate(r):
        br = _graded_breaks(ri, x_max, levels)
        lo, hi = br[:-1, None], br[1:, None]
        x = (0.5 * (lo + hi) + 0.5 * (hi - lo) * gl).ravel()
        w = (0.5 * (hi - lo) * gw).ravel()
        if alpha == -0.5:
            tf = f(np.abs(x - ri)) + f(x + ri)
        else:
            tf = np.concatenate([bessel_translate_1d(alpha, f, x[k:k + 64], ri)
                                 for k in range(0, len(x), 64)])
        out[i] = np.sum(w * tf * g(x) * x ** (2.0 * alpha + 1.0))
    return out


def mixed_convolve(index, f, g):
    """Causal space-time convolution on a common uniform time grid.

    ``(f *_A g)(x, t_k) = sum_m c_m (f(., t_m) *_a g(., t_k - t_m))(x)`` with
    trapezoid weights ``c_m`` on ``[0, t_k]``; only times ``<= t_k`` enter.
    """
    if not f.same_layout(g):
        raise ShapeError("space-time grids differ")
    dt = np.diff(f.times)
    if not np.allclose(dt, dt[0]) or f.times[0] != 0.0:
        raise ShapeError("mixed convolution needs a uniform grid starting at t = 0")
    h = dt[0]
    out = np.zeros_like(f.values)
    nonzero_g = [k for k in range(len(f.times)) if np.any(g.values[k] != 0)]
    for k in range(1, len(f.times)):
        acc = np.zeros(f.grid.values.shape)
        for m in range(k + 1):
            j = k - m
            if j not in nonzero_g or not np.any(f.values[m] != 0):
                continue
            c = h / 2.0 if m in (0, k) else h
            acc += c * bessel_convolve(index, f.slice(m), g.slice(j)).values
        out[k] = acc
    return SpaceTimeGridFunction(f.grid.with_values(f.grid.values), f.times, out)
