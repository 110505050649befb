"""Desk-scale capacities of compact space-time sets in the dual (measure) form.

For nonnegative atomic measures ``nu = sum_i w_i delta_(y_i, tau_i)`` the
constraint ``||P *_A nu||_{p,A} <= 1`` is linear-in-``w`` inside the norm, so

    capacity^(1/p') = sup { sum w : ||sum w_i col_i||_{p,A} <= 1 }
                    = 1 / min_{w in simplex} ||sum w_i col_i||_{p,A}

with ``col_i(x, t) = T^{y_i}_a P(x, t - tau_i)``. The minimum is found by
Frank-Wolfe with away steps and exact line search. All values are lower
bounds for the capacity over general distributions.

Variants: ``C`` uses the kernel itself, ``N`` the kernel smoothed by the
Bessel potential ``G_{a,2}``, ``Z2`` the p = 2 dual Sobolev norm with m = 1
(evaluated in closed form in time; interpretation dependent).
"""

from dataclasses import dataclass, field, asdict
import math

import numpy as np
from scipy import special as sp
from scipy.optimize import minimize_scalar

from .errors import (
    CoverageError, DegenerateSetError, DomainError, FrackapError, StagnationError,
    UnsupportedCaseError,
)
from .kernels import G_kernel, P_eval, get_table
from .special import BesselIndex, KernelSpec, j_norm, radial_inverse_constant, sphere_measure
from .translate import bessel_translate_1d, translate_nd

VARIANTS = ("C", "N", "Z2")
_ORDER = 8


# -- sets and measures ----------------------------------------------------------------

@dataclass(frozen=True)
class CompactSetSpec:
    """Finite set of space-time atoms ``(y, tau)`` with ``tau > 0``."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((tuple(float(v) for v in y), float(tau)) for y, tau in self.atoms)
        if not atoms:
            raise DomainError("the set needs at least one atom")
        n = len(atoms[0][0])
        for y, tau in atoms:
            if len(y) != n:
                raise DomainError("atoms have inconsistent dimension")
            if not tau > 0:
                raise DomainError(f"atom time must be > 0, got {tau}")
        if len(set(atoms)) != len(atoms):
            raise DomainError("atoms must be pairwise distinct")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_list(cls, rows):
        """Rows ``[y_1, ..., y_n, tau]``."""
        return cls(tuple((tuple(r[:-1]), r[-1]) for r in rows))

    @classmethod
    def box(cls, lo, hi, tau_lo, tau_hi, resolution):
        """Cell-centred atoms of the box ``[lo, hi] x [tau_lo, tau_hi]``.

        ``resolution`` gives the atom count per spatial axis followed by the
        count in time.
        """
        lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
        *rx, rt = resolution
        axes = [l + (np.arange(k) + 0.5) * (h - l) / k for l, h, k in zip(lo, hi, rx)]
        taus = tau_lo + (np.arange(rt) + 0.5) * (tau_hi - tau_lo) / rt
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(lo))
        return cls(tuple((tuple(p), float(t)) for p in pts for t in taus))

    @property
    def n(self):
        return len(self.atoms[0][0])

    def __len__(self):
        return len(self.atoms)

    def check_index(self, index):
        if index.n != self.n:
            raise DomainError("atom dimension does not match the index")
        if not index.is_laplace and any(v < 0 for y, _ in self.atoms for v in y):
            raise DomainError("Bessel case needs atoms in the closed orthant")

    def subset(self, keep):
        return CompactSetSpec(tuple(self.atoms[i] for i in keep))


@dataclass
class DiscreteMeasure:
    atoms: tuple
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.atoms) or np.any(self.weights < 0):
            raise DomainError("one nonnegative weight per atom is required")

    @property
    def total_mass(self):
        return float(self.weights.sum())


@dataclass
class CapacityResult:
    """Solver output.

    ``capacity_value`` is ``mass^p'``; ``raw_mass`` the total mass of the
    optimal measure scaled to unit norm. ``duality_gap`` is the final
    Frank-Wolfe gap relative to the objective.
    """

    capacity_value: float
    optimal_measure: DiscreteMeasure
    duality_gap: float
    norm_truncation_error: float
    variant: str
    p: float
    raw_mass: float
    objective: float
    iterations: int
    constraint_norm: float
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "variant": self.variant,
            "p": self.p,
            "capacity_value": self.capacity_value,
            "raw_mass": self.raw_mass,
            "objective": self.objective,
            "duality_gap": self.duality_gap,
            "norm_truncation_error": self.norm_truncation_error,
            "constraint_norm": self.constraint_norm,
            "iterations": self.iterations,
            "atoms": [list(y) + [tau] for y, tau in self.optimal_measure.atoms],
            "weights": self.optimal_measure.weights.tolist(),
            "lower_bound_note": "nonnegative atomic measures only; lower bound of the capacity",
        }


@dataclass(frozen=True)
class GridParams:
    X_max: float = 20.0
    T_max: float = 4.0
    nodes_x: int = 256
    nodes_t: int = 128

    def __post_init__(self):
        if self.X_max <= 0 or self.T_max <= 0:
            raise DomainError("grid extents must be positive")
        if self.nodes_x < 16 or self.nodes_t < 16:
            raise DomainError("grids need at least 16 nodes per direction")


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 5000
    gap_tol: float = 1e-4
    line_search: bool = True
    away_steps: bool = True
    stagnation_window: int = 1000
    check_monotone: bool = False


# -- grids ------------------------------------------------------------------------------

def _panels(breaks, a=0.0, order=_ORDER):
    """Gauss nodes/weights on panels; a panel starting at 0 gets the weight x^a exactly."""
    g, gw = np.polynomial.legendre.leggauss(order)
    uj, wj = sp.roots_jacobi(order, 0.0, a) if a else (g, gw)
    xs, ws = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        h = hi - lo
        if lo == 0.0 and a:
            xs.append(h * (1.0 + uj) / 2.0)
            ws.append(wj * (h / 2.0) ** (a + 1.0))
        else:
            x = 0.5 * (lo + hi) + 0.5 * h * g
            xs.append(x)
            ws.append(0.5 * h * gw * np.abs(x) ** a)
    return np.concatenate(xs), np.concatenate(ws)


def _graded_breaks(lo, hi, centers, levels, n_uniform):
    span = hi - lo
    pts = list(np.linspace(lo, hi, n_uniform + 1))
    for c in centers:
        d = span * 2.0 ** -np.arange(0, levels + 1)
        pts += list(c - d) + list(c + d) + [c]
    pts = np.unique(np.clip(pts, lo, hi))
    return pts[np.concatenate([[True], np.diff(pts) > span * 1e-15])]


@dataclass
class CapacityGrid:
    """Tensor spatial rule (weights include ``x^a``) and a time rule on ``(0, T_max]``."""

    index: BesselIndex
    axes: list
    sweights: list
    times: np.ndarray
    tweights: np.ndarray
    X_max: float
    T_max: float

    @property
    def points(self):
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), -1)

    @property
    def space_weights(self):
        w = self.sweights[0]
        for extra in self.sweights[1:]:
            w = np.multiply.outer(w, extra)
        return w

    @property
    def weights(self):
        return np.multiply.outer(self.tweights, self.space_weights)


def singular_exponent(spec, p):
    """``q = d(p-1)/gamma``: ``||P(., s)||_p^p`` scales like ``s^(-q)``."""
    return spec.d * (p - 1.0) / spec.gamma


def build_grid(spec, kset, params, p):
    """Space-time rule graded towards every atom position and every atom time.

    The first time panel after each ``tau`` carries the exact weight
    ``(t - tau)^(-q)`` (q < 1) so the integrable singularity of the column
    norm is integrated accurately; the spatial grading reaches below the
    kernel width at the smallest time node.
    """
    idx = spec.index
    kset.check_index(idx)
    X, T = params.X_max, params.T_max
    for y, tau in kset.atoms:
        if tau >= T or any(abs(v) >= X for v in y):
            raise CoverageError(f"atom {y, tau} outside the grid [.., {X}] x (0, {T})")
    taus = sorted({tau for _, tau in kset.atoms})
    q = singular_exponent(spec, p)
    q = q if q < 1.0 else 0.0
    lv_t = max(6, params.nodes_t // (16 * len(taus)))
    n_unif = max(2, params.nodes_t // 32)
    br = list(np.linspace(0.0, T, n_unif + 1))
    for tau in taus:
        br += list(tau + (T - tau) * 2.0 ** -np.arange(0, lv_t + 1)) + [tau]
    br = np.unique(br)
    g, gw = np.polynomial.legendre.leggauss(_ORDER)
    uj, wj = sp.roots_jacobi(_ORDER, 0.0, -q)
    ts, tw = [], []
    for lo, hi in zip(br[:-1], br[1:]):
        h = hi - lo
        if q and any(abs(lo - tau) < 1e-15 * T for tau in taus):
            s = h * (1.0 + uj) / 2.0
            ts.append(lo + s)
            tw.append(wj * (h / 2.0) ** (1.0 - q) * s ** q)
        else:
            ts.append(0.5 * (lo + hi) + 0.5 * h * g)
            tw.append(0.5 * h * gw)
    times, tweights = np.concatenate(ts), np.concatenate(tw)
    s_min = min(float(np.min(times[times > tau] - tau)) for tau in taus)
    width = s_min ** (1.0 / spec.gamma) / 4.0
    lv_x = int(min(60, max(6, math.ceil(math.log2(2.0 * X / width)))))
    n_unif_x = max(4, params.nodes_x // _ORDER // 2)
    axes, sw = [], []
    for i, ai in enumerate(idx.a):
        centers = sorted({y[i] for y, _ in kset.atoms})
        lo = 0.0 if not idx.is_laplace else -X
        brx = _graded_breaks(lo, X, centers, lv_x, n_unif_x)
        x, w = _panels(brx, ai)
        axes.append(x)
        sw.append(w)
    return CapacityGrid(idx, axes, sw, times, tweights, X, T)


# -- columns ----------------------------------------------------------------------------

@dataclass
class ColumnFamily:
    """Columns on a grid: ``values[i]`` has shape ``(n_times,) + spatial shape``.

    For the Z2 variant ``values`` holds factor rows ``L`` with ``L L^T = M``
    (the Gram matrix) and ``weights`` is all ones.
    """

    variant: str
    values: np.ndarray
    weights: np.ndarray
    grid: CapacityGrid = None
    tails: np.ndarray = None

    def flat(self):
        m = self.values.shape[0]
        return self.values.reshape(m, -1), self.weights.reshape(-1)


def _column_values(spec, grid, y, tau, table):
    idx = spec.index
    out = np.zeros((len(grid.times),) + tuple(len(a) for a in grid.axes))
    active = np.nonzero(grid.times > tau)[0]
    if len(active) == 0:
        return out
    s = grid.times[active] - tau
    pts = grid.points
    y = np.asarray(y, dtype=float)
    if idx.is_laplace or not np.any(y):
        r = np.linalg.norm(pts - y, axis=-1)
        out[active] = P_eval(table, r[None, ...], s.reshape((-1,) + (1,) * idx.n))
        return out
    for k, sk in zip(active, s):
        f1 = lambda rr, sk=sk: P_eval(table, rr, sk)
        if idx.n == 1:
            out[k] = bessel_translate_1d(idx.alphas[0], f1, pts[..., 0], y[0])
        else:
            fn = lambda p, sk=sk: P_eval(table, np.linalg.norm(p, axis=-1), sk)
            out[k] = translate_nd(idx, fn, pts, np.broadcast_to(y, pts.shape))
    return out


def translated_potential_1d(alpha, x, z, n_u=200):
    """``T^x G(z)`` for the order-2 Bessel potential on the half line (n = 1).

    Uses ``G = int_0^inf e^(-u) W_u du`` with the Gaussian heat kernel
    ``W_u(r) = c Gamma(d/2) / (2 u^(d/2)) exp(-r^2 / 4u)``, whose translation is
    ``exp(-(x - z)^2 / 4u) * i_alpha(x z / 2u)`` times the same prefactor
    (``i_alpha`` the normalised modified Bessel function). The remaining
    integral runs over ``log u`` by Gauss-Legendre.
    """
    x, z = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
    d = 2.0 * alpha + 2.0
    c = radial_inverse_constant(BesselIndex((d - 1.0,))) * math.gamma(d / 2.0) / 2.0
    g, gw = np.polynomial.legendre.leggauss(n_u)
    lo, hi = math.log(1e-14), math.log(80.0)
    lu = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g
    u = np.exp(lu)
    wu = 0.5 * (hi - lo) * gw * u * np.exp(-u) * c * u ** (-d / 2.0)
    out = np.zeros(x.shape)
    lg = math.lgamma(alpha + 1.0)
    d2 = (x - z) ** 2
    xz = x * z
    for uk, wk in zip(u, wu):
        sel = d2 < 2800.0 * uk  # elsewhere exp(-d2 / 4u) underflows
        if not np.any(sel):
            continue
        w = xz[sel] / (2.0 * uk)
        gauss = np.exp(-d2[sel] / (4.0 * uk))
        inorm = np.exp(-w) * (1.0 + w * w / (4.0 * (alpha + 1.0)))
        mid = (w > 1e-6) & (w <= 1e8)
        wm = w[mid]
        inorm[mid] = np.exp(lg + alpha * np.log(2.0 / wm)) * sp.ive(alpha, wm)
        far = w > 1e8
        # ive(alpha, w) -> 1 / sqrt(2 pi w)
        inorm[far] = np.exp(lg + alpha * np.log(2.0 / w[far])) / np.sqrt(2.0 * np.pi * w[far])
        out[sel] += wk * gauss * inorm
    return out


def _smoothing_matrix(spec, grid):
    # K[k, j] = T^{x_k} G_{a,2}(z_j) w_j on a one-dimensional grid
    idx = spec.index
    if idx.n != 1:
        raise UnsupportedCaseError("variant N is implemented for n = 1")
    x, w = grid.axes[0], grid.sweights[0]
    if idx.is_laplace:
        gaps = np.diff(np.sort(x))
        rmin = 0.5 * float(np.min(gaps[gaps > 0]))
        r = np.sqrt((x[:, None] - x[None, :]) ** 2 + rmin ** 2)
        return G_kernel(idx, 2.0, r) * w[None, :]
    return translated_potential_1d(idx.alphas[0], x[:, None], x[None, :]) * w[None, :]


def _spatial_tail(spec, table, distance, p, T):
    # int_0^T int_{r > distance} P(r, s)^p dmu ds from the tabulated kernel
    if distance <= 0:
        return np.inf
    idx = spec.index
    s, ws = np.polynomial.legendre.leggauss(24)
    s = 0.5 * T * (1.0 + s)
    ws = 0.5 * T * ws
    r = np.geomspace(distance, distance * 1e6, 400)
    rm = 0.5 * (r[1:] + r[:-1])
    dr = np.diff(r)
    vals = P_eval(table, rm[None, :], s[:, None]) ** p * rm[None, :] ** (idx.d - 1.0)
    return float(sphere_measure(idx) * np.sum(ws * np.sum(vals * dr, axis=1)))


def build_columns(spec, kset, variant="C", grid=None, params=None, p=2.0):
    """Column family of the constraint map ``w -> sum w_i col_i``."""
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    if variant == "Z2":
        return _z2_columns(spec, kset, params or GridParams())
    grid = build_grid(spec, kset, params or GridParams(), p) if grid is None else grid
    table = get_table(spec)
    cols = np.stack([_column_values(spec, grid, y, tau, table) for y, tau in kset.atoms])
    if variant == "N":
        K = _smoothing_matrix(spec, grid)
        cols = np.einsum("kj,itj->itk", K, cols)
    tails = np.array([
        _spatial_tail(spec, table, grid.X_max - max(abs(v) for v in y), p, grid.T_max - tau)
        for y, tau in kset.atoms
    ])
    return ColumnFamily(variant, cols, grid.weights, grid, tails)


def _z2_columns(spec, kset, params, n_rho=4000):
    idx = spec.index
    if idx.n != 1:
        raise UnsupportedCaseError("variant Z2 is implemented for n = 1")
    if idx.is_laplace and any(y[0] != 0.0 for y, _ in kset.atoms):
        raise UnsupportedCaseError("Z2 needs radial slices: Laplace atoms must sit at x = 0")
    T = params.T_max
    for y, tau in kset.atoms:
        if tau >= T:
            raise CoverageError(f"atom time {tau} not below T_max = {T}")
    g, gw = np.polynomial.legendre.leggauss(16)
    br = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, n_rho // 16)])
    lo, hi = br[:-1, None], br[1:, None]
    rho = (0.5 * (lo + hi) + 0.5 * (hi - lo) * g).ravel()
    wr = (0.5 * (hi - lo) * gw).ravel()
    wr = wr * radial_inverse_constant(idx) * rho ** (idx.d - 1.0) / (1.0 + rho ** 4)
    b = rho ** spec.gamma
    y = np.array([a[0][0] for a in kset.atoms])
    tau = np.array([a[1] for a in kset.atoms])
    J = j_norm(idx.alphas[0], np.abs(y)[:, None] * rho[None, :])
    m = len(y)
    M = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            tm = max(tau[i], tau[j])
            # int_tm^T exp(-(2t - tau_i - tau_j) b) dt in closed form
            lead = np.exp(-(2.0 * tm - tau[i] - tau[j]) * b)
            with np.errstate(divide="ignore", invalid="ignore"):
                tint = np.where(b > 0, -np.expm1(-2.0 * (T - tm) * b) / (2.0 * b), T - tm)
            M[i, j] = M[j, i] = float(np.sum(wr * J[i] * J[j] * lead * tint))
    lam, V = np.linalg.eigh(M)
    L = V * np.sqrt(np.maximum(lam, 0.0))
    return ColumnFamily("Z2", L[:, None, :], np.ones((1, m)), None, np.zeros(m))


# -- solver -----------------------------------------------------------------------------

class _Objective:
    """``F(w) = (sum_k W_k |(w C)_k|^p)^(1/p)`` and its gradient."""

    def __init__(self, C, W, p):
        self.C, self.W, self.p = C, W, p

    def value_u(self, u):
        return float(np.sum(self.W * np.abs(u) ** self.p)) ** (1.0 / self.p)

    def grad(self, u, F):
        if F == 0:
            return np.zeros(self.C.shape[0])
        v = self.W * np.abs(u) ** (self.p - 1.0) * np.sign(u)
        return (self.C @ v) / F ** (self.p - 1.0)


def _line_search(obj, u, d, gmax):
    phi = lambda g: obj.value_u(u + g * d)
    if gmax <= 0:
        return 0.0
    res = minimize_scalar(phi, bounds=(0.0, gmax), method="bounded",
                          options={"xatol": 1e-12 * max(gmax, 1e-300)})
    g = float(res.x)
    # bounded Brent never returns the endpoint exactly
    if phi(gmax) <= phi(g):
        g = gmax
    return g


def frank_wolfe(C, W, p, cfg=SolverConfig(), w0=None):
    """Minimise ``||w C||_{p,W}`` over the probability simplex.

    Returns ``(w, F, relative_gap, iterations, history)``.
    """
    m = C.shape[0]
    obj = _Objective(C, W, p)
    norms = np.array([obj.value_u(C[i]) for i in range(m)])
    if np.all(norms == 0):
        raise DegenerateSetError("all columns vanish on the grid")
    if w0 is None:
        w = np.zeros(m)
        w[int(np.argmin(np.where(norms > 0, norms, np.inf)))] = 1.0
    else:
        w = np.asarray(w0, dtype=float) / np.sum(w0)
    u = w @ C
    F = obj.value_u(u)
    best, since = F, 0
    history = []
    gap = np.inf
    for it in range(1, cfg.max_iter + 1):
        grad = obj.grad(u, F)
        j = int(np.argmin(grad))
        gap = float(grad @ w - grad[j])
        history.append((F, gap))
        if gap <= cfg.gap_tol * F:
            return w, F, gap / F, it, history
        d_fw = C[j] - u
        step_dir, gmax, kind = d_fw, 1.0, "fw"
        if cfg.away_steps:
            act = np.nonzero(w > 0)[0]
            k = act[int(np.argmax(grad[act]))]
            away_gap = float(grad[k] - grad @ w)
            if away_gap > gap and w[k] < 1.0:
                step_dir, gmax, kind = u - C[k], w[k] / (1.0 - w[k]), "away"
        if cfg.line_search:
            g = _line_search(obj, u, step_dir, gmax)
        else:
            g = min(2.0 / (it + 2.0), gmax)
        if kind == "fw":
            w = (1.0 - g) * w
            w[j] += g
        else:
            w = (1.0 + g) * w
            w[k] -= g
            w[w < 1e-16] = 0.0
            w /= w.sum()
        u = w @ C
        F = obj.value_u(u)
        if F < best * (1.0 - 1e-15):
            best, since = F, 0
        else:
            since += 1
            if since >= cfg.stagnation_window:
                raise StagnationError(
                    f"objective did not decrease in {since} iterations",
                    diagnostics={"iteration": it, "objective": F, "gap": gap, "weights": w.tolist()},
                )
    return w, F, gap / F, cfg.max_iter, history


def solve_capacity(spec, kset, p, variant="C", params=None, cfg=SolverConfig(), columns=None):
    """Capacity of ``kset`` (atomic lower bound) for exponent ``p`` in (1, inf)."""
    if not 1.0 < p < np.inf:
        raise DomainError("p must lie in (1, inf)")
    if variant == "Z2" and p != 2.0:
        raise UnsupportedCaseError("variant Z2 is defined for p = 2 only")
    if not isinstance(spec, KernelSpec):
        raise DomainError("spec must be a KernelSpec")
    kset.check_index(spec.index)
    params = params or GridParams()
    cols = build_columns(spec, kset, variant, params=params, p=p) if columns is None else columns
    C, W = cols.flat()
    w, F, gap, iters, hist = frank_wolfe(C, W, p, cfg)
    pp = p / (p - 1.0)
    mass = 1.0 / F
    weights = w / F
    check = _Objective(C, W, p).value_u(weights @ C)
    if check > 1.0 + 1e-9:
        raise FrackapError(f"rescaled measure violates the constraint: {check}")
    tail = 0.0
    if cols.tails is not None and np.all(np.isfinite(cols.tails)):
        tail = float(np.sum(w * cols.tails ** (1.0 / p)) / F)
    res = CapacityResult(mass ** pp, DiscreteMeasure(kset.atoms, weights), gap, tail, variant,
                         p, mass, F, iters, check, hist)
    if cfg.check_monotone and len(kset) > 1:
        sub = ColumnFamily(cols.variant, cols.values[:-1], cols.weights, cols.grid,
                           None if cols.tails is None else cols.tails[:-1])
        small = solve_capacity(spec, kset.subset(range(len(kset) - 1)), p, variant, params,
                               SolverConfig(cfg.max_iter, cfg.gap_tol, cfg.line_search,
                                            cfg.away_steps, cfg.stagnation_window, False), sub)
        slack = pp * (gap + small.duality_gap) + 1e-12
        if res.capacity_value < small.capacity_value * (1.0 - slack):
            raise FrackapError("monotonicity violated: adding an atom lowered the capacity")
    return res


# -- refinement ---------------------------------------------------------------------------

@dataclass
class TrendReport:
    values: list
    parameters: list
    classification: str
    fitted_rate: float
    results: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {"values": self.values, "parameters": self.parameters,
                "classification": self.classification, "fitted_rate": self.fitted_rate}


def classify_trend(values, xs=None, settle_tol=0.02, refined=True):
    """``decaying`` / ``bounded-below`` / ``inconclusive`` plus the log-log slope.

    ``refined=False`` (the same grid repeated) carries no information and is
    always inconclusive.
    """
    v = np.asarray(values, dtype=float)
    x = np.arange(1, len(v) + 1, dtype=float) if xs is None else np.asarray(xs, dtype=float)
    if len(v) < 3:
        raise DomainError("a trend needs at least 3 levels")
    if np.any(v <= 0):
        return "decaying", -np.inf
    slope = float(np.polyfit(np.log(x), np.log(v), 1)[0]) if np.ptp(x) > 0 else 0.0
    if not refined:
        return "inconclusive", slope
    rel = np.abs(np.diff(v)) / v[:-1]
    if np.all(np.diff(v) < 0) and rel[-1] > settle_tol:
        return "decaying", slope
    if rel[-1] <= settle_tol:
        return "bounded-below", slope
    return "inconclusive", slope


def refine_and_trend(spec, kset, p, variant="C", levels=None, base=None, cfg=SolverConfig(),
                     mode="T_max"):
    """Re-solve on a sequence of grids and classify the capacity trend.

    ``mode="T_max"`` doubles the time window per level; ``"grid"`` doubles the
    node counts; ``"same"`` repeats the base grid. ``levels`` may instead be
    an explicit list of :class:`GridParams`.
    """
    base = base or GridParams()
    if levels is None or isinstance(levels, int):
        L = 4 if levels is None else levels
        if L < 3:
            raise DomainError("refine_and_trend needs at least 3 levels")
        if mode == "T_max":
            levels = [GridParams(base.X_max, base.T_max * 2 ** k, base.nodes_x, base.nodes_t)
                      for k in range(L)]
        elif mode == "grid":
            levels = [GridParams(base.X_max, base.T_max, base.nodes_x * 2 ** k,
                                 base.nodes_t * 2 ** k) for k in range(L)]
        elif mode == "same":
            levels = [base] * L
        else:
            raise DomainError(f"unknown refinement mode {mode!r}")
    results = [solve_capacity(spec, kset, p, variant, g, cfg) for g in levels]
    vals = [r.capacity_value for r in results]
    # window length after the earliest atom governs the time growth of the norm
    t0 = min(tau for _, tau in kset.atoms)
    xs = [g.T_max - t0 for g in levels] if mode == "T_max" else None
    cls, slope = classify_trend(vals, xs, refined=len(set(levels)) > 1)
    return TrendReport(vals, [asdict(g) for g in levels], cls, slope, results)


def predicted_trend_exponent(spec, p):
    """Decay exponent of ``capacity_value`` in ``T_max`` for a single atom.

    ``||col||_p^p ~ T^(1-q)`` with ``q = d(p-1)/gamma < 1`` gives
    ``capacity ~ T^(-(1-q)/(p-1))``.
    """
    q = singular_exponent(spec, p)
    if q >= 1:
        raise DomainError("the column norm is infinite near the atom (q >= 1)")
    return -(1.0 - q) / (p - 1.0)


# -- JSON interface ------------------------------------------------------------------------

def problem_from_dict(doc):
    """Parse ``{gamma, n, a, p, variant, atoms, grid{...}, solver{...}}``.

    ``box: {lo, hi, tau_lo, tau_hi, resolution}`` may replace ``atoms``.
    """
    try:
        n = int(doc["n"])
        a = doc.get("a") or [0.0] * n
        spec = KernelSpec(float(doc["gamma"]), BesselIndex(tuple(a)))
        if spec.index.n != n:
            raise DomainError("len(a) must equal n")
        p = float(doc["p"])
        variant = doc.get("variant", "C")
        if "box" in doc:
            b = doc["box"]
            kset = CompactSetSpec.box(b["lo"], b["hi"], b["tau_lo"], b["tau_hi"], b["resolution"])
        else:
            kset = CompactSetSpec.from_list(doc["atoms"])
        params = GridParams(**doc.get("grid", {}))
        cfg = SolverConfig(**doc.get("solver", {}))
    except (KeyError, TypeError, IndexError) as exc:
        raise DomainError(f"malformed capacity problem: {exc}") from exc
    kset.check_index(spec.index)
    return spec, kset, p, variant, params, cfg


def solve_problem(doc):
    spec, kset, p, variant, params, cfg = problem_from_dict(doc)
    return solve_capacity(spec, kset, p, variant, params, cfg)
