"""Batch verification: exact identities and empirical inequality constants.

Every check returns a :class:`CheckReport`. Failures are reports, never
exceptions. Empirical constants only show that a bound is *consistent
with* the data on fixed test families; they prove nothing.

Configurations are plain dicts (JSON-friendly). For
:func:`run_identity_suite` the keys are check ids mapping to lists of
parameter dicts; ``seed`` and ``table_scale`` are reserved keys.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import io
import json
import math

import numpy as np
from scipy.optimize import brentq

from . import hankel, kernels
from .errors import DomainError, FrackapError
from .norms import lp_norm_space, sobolev_norm
from .operators import (DEFAULT, frac_laplace_integral, frac_laplace_spectral,
                        laplace_bessel_apply, spherical_difference)
from .special import BesselIndex, KernelSpec, hankel_constant, j_norm, sphere_measure
from .translate import GridFunction, axis_rule, bessel_translate_1d, convolve_radial_1d

STATUSES = ("pass", "fail", "inconclusive")

ANCHORS = {
    "convolution_theorem": "transform of f *_a g equals the product of transforms",
    "translation_rule": "transform of T^y f equals j(rho y) times the transform of f",
    "eigenfunction": "Delta_a j(lambda x) = -|lambda|^2 j(lambda x)",
    "translation_commutes": "T^y Delta_a f = Delta_a T^y f",
    "sphere_multiplier": "spherical difference has multiplier 1 - j_(d/2-1)(r rho)",
    "kernel_mass": "int P(x,t) x^a dx = 1",
    "scaling": "P(r,t) = t^(-d/gamma) P(r t^(-1/gamma), 1)",
    "derivative_shift": "d_r P_(gamma,a) = -c r P_(gamma,a+2)",
    "weighted_finiteness": "int P_(gamma,a+b) |x|^|b| x^a dx is finite",
    "semigroup": "P(.,s) *_a P(.,t) = P(.,s+t)",
    "contraction": "||T^t f||_(p,a) <= ||f||_(p,a)",
    "gamma1": "||Delta_(r,s,a) f||_(p,a) <= c r^2 ||Delta_a f||_(p,a)",
    "gammadelta": "||(-Delta_a)^(gamma/2) f||_(p,a) <= c ||f||_(W^(1,p))",
    "product_bound": ("||(-Delta)^(gamma/2)(phi f)||_p <= c (||phi||_inf ||f||_(W^(1,p))"
                      " + ||Delta phi||_inf ||f||_p)"),
    "l1_equiv": "W^(1,p)_(Delta_a) and L^p_(a,2) carry equivalent norms",
    "lp41": "(1 - j_alpha(u)) / u^2 has an L^1_alpha inverse transform",
}


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check on one parameter tuple.

    ``value`` is a residual (identities) or an empirical constant
    (inequalities); ``refined`` repeats it after one grid refinement when
    that applies. A failing report names its worst input in ``witness``.
    """

    check_id: str
    status: str
    value: float
    tolerance: float
    params: dict = field(default_factory=dict)
    refined: float = float("nan")
    witness: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise DomainError(f"status must be one of {STATUSES}")

    @property
    def anchor(self):
        return ANCHORS.get(self.check_id, "")

    @property
    def passed(self):
        return self.status == "pass"

    def params_text(self):
        return json.dumps(self.params, sort_keys=True, separators=(",", ":"))


def _residual_report(check_id, value, tol, params, witness=""):
    if not np.isfinite(value):
        return CheckReport(check_id, "fail", float("inf"), tol, params, witness=witness)
    status = "pass" if value < tol else "fail"
    return CheckReport(check_id, status, float(value), tol, params,
                       witness="" if status == "pass" else witness)


def _guard(check_id, tol, params, fn):
    # numerical breakdowns become inconclusive reports
    try:
        return fn()
    except (FrackapError, ArithmeticError, ValueError) as exc:
        return CheckReport(check_id, "inconclusive", float("nan"), tol, params,
                           witness=f"{type(exc).__name__}: {exc}")


# -- helpers -----------------------------------------------------------------------

def _gauss(s=1.0):
    return lambda r: np.exp(-0.5 * (np.asarray(r) / s) ** 2)


def gaussian_transform(index, rho, s=1.0):
    """Closed-form radial transform of ``exp(-|x|^2 / (2 s^2))``."""
    nu = index.nu
    rho = np.asarray(rho, dtype=float)
    return (sphere_measure(index) * 2.0 ** nu * math.gamma(nu + 1.0) * s ** (2 * nu + 2)
            * np.exp(-0.5 * (s * rho) ** 2))


def _grid_transform(index, x, w, values, rho):
    # n = 1 transform with the grid's own rule; a symmetric Laplace grid already
    # sums both half-lines, and the one-axis Bessel sphere has measure 1
    return hankel._apply(index.alphas[0], np.atleast_1d(rho), np.abs(x), values * w)


def _panel_rule(breaks, order=16):
    return hankel._nodes(np.asarray(breaks, dtype=float), order)


def _table(spec, scale=1.0):
    tab = kernels.get_table(spec)
    if scale == 1.0:
        return tab
    return kernels.KernelTable(spec, tab.nodes, tab.values * scale, tab.accuracy)


def _index(a):
    return BesselIndex(tuple(a))


# -- identity checks ---------------------------------------------------------------

def _check_convolution_theorem(p, ctx):
    idx = _index(p.get("a", [1.0]))
    if idx.n != 1:
        raise DomainError("convolution_theorem runs on one-axis indices")
    s1, s2 = p.get("s1", 1.0), p.get("s2", 0.7)
    x, w = axis_rule(p.get("x_max", 14.0), p.get("nodes", 256), idx.a[0], idx.is_laplace)
    conv = convolve_radial_1d(idx.alphas[0], _gauss(s1), _gauss(s2), np.abs(x), 60.0)
    rho = np.linspace(0.0, 10.0, 101)
    got = _grid_transform(idx, x, w, conv, rho)
    ref = gaussian_transform(idx, rho, s1) * gaussian_transform(idx, rho, s2)
    err = np.abs(got - ref) / np.max(np.abs(ref))
    k = int(np.argmax(err))
    return _residual_report("convolution_theorem", err.max(), 1e-5, p, f"rho={rho[k]:.6g}")


def _check_translation_rule(p, ctx):
    al, y = p.get("alpha", 0.0), p.get("y", 0.8)
    idx = BesselIndex((2.0 * al + 1.0,))
    x, w = axis_rule(p.get("x_max", 16.0), p.get("nodes", 256), idx.a[0])
    ty = bessel_translate_1d(al, _gauss(), x, y)
    rho = np.linspace(0.0, 10.0, 101)
    got = _grid_transform(idx, x, w, ty, rho)
    ref = j_norm(al, rho * y) * gaussian_transform(idx, rho)
    err = np.abs(got - ref) / np.max(np.abs(ref))
    k = int(np.argmax(err))
    return _residual_report("translation_rule", err.max(), 1e-5, p, f"rho={rho[k]:.6g}")


def _check_eigenfunction(p, ctx):
    idx = _index(p.get("a", [1.0]))
    lam = np.asarray(p.get("lam", [1.0] * idx.n), dtype=float)
    als = idx.alphas

    def f(q):
        out = 1.0
        for i in range(idx.n):
            out = out * j_norm(als[i], lam[i] * q[..., i])
        return out

    rng = np.random.default_rng(ctx["seed"])
    pts = rng.uniform(0.2, 3.0, size=(16, idx.n))
    got = laplace_bessel_apply(idx, f, pts)
    l2 = float(lam @ lam)
    err = np.abs(got + l2 * f(pts)) / l2
    k = int(np.argmax(err))
    return _residual_report("eigenfunction", err.max(), 1e-5, p, f"x={pts[k].round(6).tolist()}")


def _check_translation_commutes(p, ctx):
    al, y = p.get("alpha", 0.0), p.get("y", 0.7)
    idx = BesselIndex((2.0 * al + 1.0,))
    f = lambda q: np.exp(-0.5 * q[..., 0] ** 2)
    # closed form of Delta_a on the Gaussian; finite differences act on the translate only
    lap_f = lambda r: (np.asarray(r) ** 2 - 1.0 - idx.a[0]) * np.exp(-0.5 * np.asarray(r) ** 2)
    ty_f = lambda q: bessel_translate_1d(al, lambda r: f(r[..., None]), q[..., 0], y)
    xs = np.asarray(p.get("x", [0.5, 1.0, 1.5, 2.5]), dtype=float)
    lhs = bessel_translate_1d(al, lap_f, xs, y)
    rhs = laplace_bessel_apply(idx, ty_f, xs[:, None])
    scale = np.max(np.abs(lap_f(np.linspace(0.0, 4.0, 41))))
    err = np.abs(lhs - rhs) / scale
    k = int(np.argmax(err))
    return _residual_report("translation_commutes", err.max(), 1e-4, p, f"x={xs[k]:.6g}")


def _check_sphere_multiplier(p, ctx):
    idx = _index(p.get("a", [0.0, 0.0]))
    r = p.get("r", 0.7)
    f = lambda q: np.exp(-0.5 * np.sum(q ** 2, axis=-1))
    s, ws = _panel_rule(np.linspace(0.0, 14.0, 57))
    pts = np.zeros((len(s), idx.n))
    pts[:, 0] = s
    h = spherical_difference(idx, f, pts, r)
    rho = np.linspace(0.0, 5.0, 51)
    got = sphere_measure(idx) * hankel._apply(idx.nu, rho, s, ws * h * s ** (idx.d - 1.0))
    fh = gaussian_transform(idx, rho)
    ref = (1.0 - j_norm(idx.nu, r * rho)) * fh
    err = np.abs(got - ref) / np.max(fh)
    k = int(np.argmax(err))
    return _residual_report("sphere_multiplier", err.max(), 1e-5, p, f"rho={rho[k]:.6g}")


def _check_kernel_mass(p, ctx):
    spec = KernelSpec(p.get("gamma", 1.0), _index(p.get("a", [1.0])))
    tab = _table(spec, ctx["table_scale"])
    t = p.get("t", 1.0)
    err = abs(kernels.kernel_mass(spec, t, tab) - 1.0)
    return _residual_report("kernel_mass", err, 1e-6, p, f"t={t:g}")


def _check_scaling(p, ctx):
    spec = KernelSpec(p.get("gamma", 1.0), _index(p.get("a", [1.0])))
    rng = np.random.default_rng(ctx["seed"])
    m = p.get("pairs", 25)
    r = rng.uniform(0.0, 5.0, m)
    t = rng.uniform(0.2, 5.0, m)
    g, d = spec.gamma, spec.d
    lhs = np.array([kernels.P_quadrature(spec, ri, ti) for ri, ti in zip(r, t)])
    rhs = t ** (-d / g) * kernels.P_quadrature(spec, r * t ** (-1.0 / g), 1.0)
    err = np.abs(lhs / rhs - 1.0)
    k = int(np.argmax(err))
    return _residual_report("scaling", err.max(), 1e-8, p, f"r={r[k]:.6g},t={t[k]:.6g}")


def _check_derivative_shift(p, ctx):
    idx = _index(p.get("a", [1.0]))
    spec = KernelSpec(p.get("gamma", 1.0), idx)
    up = KernelSpec(spec.gamma, kernels.shift_index(idx, p.get("axis", 1)))
    rs = np.linspace(0.3, 2.0, 5)
    ratios = []
    for t in np.linspace(0.5, 2.0, 5):
        h = 1e-3
        pr = lambda dr: kernels.P_quadrature(spec, rs + dr, t)
        d1 = (pr(h) - pr(-h)) / (2 * h)
        d2 = (pr(h / 2) - pr(-h / 2)) / h
        deriv = (4.0 * d2 - d1) / 3.0
        ratios.append(deriv / (-rs * kernels.P_quadrature(up, rs, t)))
    ratios = np.array(ratios)
    c = float(np.mean(ratios))
    err = float(np.max(np.abs(ratios / c - 1.0))) if c > 0 else float("inf")
    rep = _residual_report("derivative_shift", err, 1e-4, dict(p, fitted_constant=round(c, 10)))
    return rep


def _weighted_mass(spec, table, extra, R):
    # sphere(a) int_0^R P(r,1) r^(extra + d - 1) dr on graded panels
    br = np.concatenate([[0.0], np.geomspace(1e-8, R, 600)])
    x, w = _panel_rule(br, 20)
    return sphere_measure(spec.index) * np.sum(w * kernels.P_eval(table, x, 1.0)
                                                * x ** (extra + spec.d - 1.0))


def _check_weighted_finiteness(p, ctx):
    a = np.asarray(p.get("a", [1.0]), dtype=float)
    b = np.asarray(p.get("b", [2.0]), dtype=float)
    base = _index(a)
    spec = KernelSpec(p.get("gamma", 1.0), _index(a + b))
    tab = _table(spec, ctx["table_scale"])
    # radial reduction: P_(a+b) depends on |x|, the weight is |x|^|b| x^a
    reduced = KernelSpec(spec.gamma, base)
    R, prev = 100.0, None
    while R < 1e24:
        cur = _weighted_mass(reduced, tab, float(b.sum()), R)
        if prev is not None and abs(cur - prev) <= 1e-6 * abs(cur):
            expect = sphere_measure(base) / sphere_measure(spec.index)
            return _residual_report("weighted_finiteness", abs(cur - prev) / abs(cur), 1e-6,
                                    dict(p, radius=R, value=round(float(cur), 10),
                                         expected=round(expect, 10)))
        prev, R = cur, 2.0 * R
    return CheckReport("weighted_finiteness", "fail", float("inf"), 1e-6, p,
                       witness="no plateau below R = 1e24")


def _check_semigroup(p, ctx):
    spec = KernelSpec(p.get("gamma", 1.5), _index(p.get("a", [1.0])))
    if spec.index.n != 1:
        raise DomainError("semigroup check runs on one-axis indices")
    tab = _table(spec, ctx["table_scale"])
    t1, t2 = p.get("t1", 0.3), p.get("t2", 0.7)
    r = np.linspace(0.0, 5.0, p.get("points", 26))
    conv = convolve_radial_1d(spec.index.alphas[0], lambda x: kernels.P_eval(tab, x, t1),
                              lambda x: kernels.P_eval(tab, x, t2), r, p.get("x_max", 4000.0))
    err = np.abs(conv - kernels.P_eval(tab, r, t1 + t2))
    k = int(np.argmax(err))
    return _residual_report("semigroup", err.max(), 1e-5, p, f"r={r[k]:.6g}")


IDENTITY_CHECKS = {
    "convolution_theorem": _check_convolution_theorem,
    "translation_rule": _check_translation_rule,
    "eigenfunction": _check_eigenfunction,
    "translation_commutes": _check_translation_commutes,
    "sphere_multiplier": _check_sphere_multiplier,
    "kernel_mass": _check_kernel_mass,
    "scaling": _check_scaling,
    "derivative_shift": _check_derivative_shift,
    "weighted_finiteness": _check_weighted_finiteness,
    "semigroup": _check_semigroup,
}

_TOLERANCES = {"convolution_theorem": 1e-5, "translation_rule": 1e-5, "eigenfunction": 1e-5,
               "translation_commutes": 1e-4, "sphere_multiplier": 1e-5, "kernel_mass": 1e-6,
               "scaling": 1e-8, "derivative_shift": 1e-4, "weighted_finiteness": 1e-6,
               "semigroup": 1e-5}

DEFAULT_IDENTITIES = {
    "convolution_theorem": [{"a": [0.0]}, {"a": [1.0]}],
    "translation_rule": [{"alpha": 0.0, "y": 0.8}, {"alpha": 0.5, "y": 1.7}],
    "eigenfunction": [{"a": [1.0]}, {"a": [0.0]}, {"a": [1.0, 2.0], "lam": [1.0, 0.5]}],
    "translation_commutes": [{"alpha": 0.0, "y": 0.7}, {"alpha": 0.5, "y": 1.2}],
    "sphere_multiplier": [{"a": a, "r": r} for a in ([0.0, 0.0], [0.0, 0.0, 0.0])
                          for r in (0.3, 0.7, 1.5)],
    "kernel_mass": [{"gamma": g, "a": a, "t": t} for g in (0.5, 1.0, 1.5)
                    for a in ([0.0], [1.0], [2.0], [3.0]) for t in (0.25, 1.0, 4.0)],
    "scaling": [{"gamma": g, "a": [1.0], "pairs": 25} for g in (0.5, 1.5)],
    "derivative_shift": [{"gamma": 0.5, "a": [1.0]}, {"gamma": 1.5, "a": [1.0]}],
    "weighted_finiteness": [{"gamma": g, "a": [1.0], "b": [2.0]} for g in (0.5, 1.5)],
    "semigroup": [{"gamma": g, "a": a} for g in (0.5, 1.5) for a in ([1.0], [2.0])],
}


def _run_parallel(tasks, threads):
    if threads and threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda f: f(), tasks))
    return [f() for f in tasks]


def run_identity_suite(config=None, threads=1):
    """Run the exact identities; one report per (check, parameter tuple).

    ``config`` maps check ids to lists of parameter dicts; ``None`` selects
    :data:`DEFAULT_IDENTITIES` and ``{}`` runs nothing. Reserved keys:
    ``seed`` (random sample points) and ``table_scale`` (multiplies kernel
    tables, for fault injection).
    """
    if config is None:
        config = DEFAULT_IDENTITIES
    ctx = {"seed": int(config.get("seed", 0)), "table_scale": float(config.get("table_scale", 1.0))}
    tasks = []
    for cid, plist in config.items():
        if cid in ("seed", "table_scale"):
            continue
        if cid not in IDENTITY_CHECKS:
            raise DomainError(f"unknown identity check {cid!r}")
        for params in plist:
            fn = IDENTITY_CHECKS[cid]
            tasks.append((cid, lambda fn=fn, params=params, cid=cid: _guard(
                cid, _TOLERANCES[cid], params, lambda: fn(params, ctx))))
    reports = _run_parallel([t[1] for t in tasks], threads)
    return sorted(reports, key=lambda r: r.check_id)


# -- inequality constants ------------------------------------------------------------

def _stable(check_id, base, fine, params, witness, bound=None):
    rel = abs(fine - base) / max(abs(base), 1e-300)
    ok = np.isfinite(base) and np.isfinite(fine) and rel <= 0.10
    tol = 0.10
    if bound is not None:
        ok = ok and max(base, fine) <= bound
        tol = bound
    return CheckReport(check_id, "pass" if ok else "fail", float(base), tol,
                       dict(params, refinement_change=round(float(rel), 8)), float(fine),
                       "" if ok else witness)


def _abs_power_integral(fun, p, a, x_max, panels):
    """``int_0^x_max |fun|^p x^a dx`` with panel breaks at the sign changes of ``fun``.

    Kinks of ``|fun|`` at its zeros would otherwise cap Gauss accuracy.
    """
    xs = np.linspace(0.0, x_max, 8 * panels + 1)
    v = fun(xs)
    roots = [brentq(lambda z: float(fun(np.array([z]))[0]), xs[k], xs[k + 1], xtol=1e-15)
             for k in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]]
    br = np.unique(np.concatenate([np.linspace(0.0, x_max, panels + 1), roots]))
    x, w = _panel_rule(br, 16)
    # x^a on the first panel is smooth enough for a > 0 with 16 Gauss nodes at this width
    return float(np.sum(w * x ** a * np.abs(fun(x)) ** p))


def _contraction_sup(idx, fam, ps, ts, panels, x_max):
    al, a = idx.alphas[0], idx.a[0]
    worst, where = 0.0, ""
    for k, f in enumerate(fam):
        for t in ts:
            tf = lambda x, t=t, f=f: bessel_translate_1d(al, f, x, t)
            for p in ps:
                q = (_abs_power_integral(tf, p, a, x_max, panels)
                     / _abs_power_integral(f, p, a, x_max, panels)) ** (1.0 / p)
                if q > worst:
                    worst, where = q, f"member={k},t={t:g},p={p:g}"
    return worst, where


def _random_family(seed, count, signed=False):
    rng = np.random.default_rng(seed)
    fam = []
    for _ in range(count):
        c = rng.uniform(0.0, 3.0, 3)
        s = rng.uniform(0.5, 1.5, 3)
        amp = rng.uniform(-1.0 if signed else 0.1, 1.0, 3)
        fam.append(lambda r, c=c, s=s, amp=amp: np.sum(
            amp * np.exp(-0.5 * ((np.asarray(r)[..., None] - c) / s) ** 2), axis=-1))
    return fam


def _contraction(cfg):
    idx = _index(cfg.get("a", [1.0]))
    idx.require_bessel()
    fam = _random_family(cfg["seed"], cfg.get("members", 4)) + \
        _random_family(cfg["seed"] + 1, cfg.get("members", 4), signed=True)
    ps, ts = cfg.get("p", [1.0, 2.0, 4.0]), cfg.get("t", [0.5, 1.0, 2.0, 4.0])
    n = cfg.get("panels", 48)
    base, where = _contraction_sup(idx, fam, ps, ts, n, 24.0)
    fine, _ = _contraction_sup(idx, fam, ps, ts, 2 * n, 24.0)
    return _stable("contraction", base, fine, cfg, where, bound=1.0 + 1e-8)


def _gamma1_sup(idx, scales, ps, rs, nodes, cfg_op):
    worst, where = 0.0, ""
    for s in scales:
        f = lambda q, s=s: np.exp(-0.5 * np.sum(q ** 2, axis=-1) / s ** 2)
        g = GridFunction.from_callable(idx, f, 10.0 * s + rs.max(), nodes)
        pts = g.points
        diff = spherical_difference(idx, f, pts, rs, cfg_op)
        lap = laplace_bessel_apply(idx, f, pts, cfg_op, even=True)
        w = g.cell_weights
        for p in ps:
            den = np.sum(np.abs(lap) ** p * w) ** (1.0 / p)
            num = np.sum(np.abs(diff) ** p * w, axis=tuple(range(1, diff.ndim))) ** (1.0 / p)
            q = num / (rs ** 2 * den)
            k = int(np.argmax(q))
            if q[k] > worst:
                worst, where = float(q[k]), f"scale={s:g},p={p:g},r={rs[k]:.4g}"
    return worst, where


def _gamma1(cfg):
    idx = _index(cfg.get("a", [1.0]))
    rs = np.geomspace(1e-3, 1.0, cfg.get("radii", 16))
    ps = cfg.get("p", [1.0, 2.0, 4.0])
    scales = cfg.get("scales", [0.5, 1.0, 2.0])
    n = cfg.get("nodes", 128)
    base, where = _gamma1_sup(idx, scales, ps, rs, n, DEFAULT)
    fine, _ = _gamma1_sup(idx, scales, ps, rs, 2 * n, DEFAULT)
    return _stable("gamma1", base, fine, cfg, where)


def _power_tail(values_at_X, X, d, decay, p, index):
    # int_X^inf |c r^-decay|^p r^(d-1) dr with c matched at X
    c = abs(values_at_X) * X ** decay
    return sphere_measure(index) * c ** p * X ** (d - decay * p) / (decay * p - d)


def _gammadelta_sup(idx, gammas, ps, sigmas, nodes):
    worst, where = 0.0, ""
    d = idx.d
    r1 = np.linspace(0.0, 40.0, 2049)
    spectrum = hankel.RadialProfile(lambda q: gaussian_transform(idx, q), hankel.exponential(0.5, 2.0))
    for g in gammas:
        spec = KernelSpec(g, idx)
        img = frac_laplace_spectral(spec, hankel.gaussian_profile(), r1, spectrum=spectrum)
        prof = hankel.RadialProfile(nodes=r1, values=img, decay=hankel.compact(r1[-1]))
        for s in sigmas:
            X = 40.0 * s
            f = lambda q, s=s: np.exp(-0.5 * np.sum(q ** 2, axis=-1) / s ** 2)
            grid = GridFunction.from_callable(idx, f, X, nodes)
            rr = np.sqrt(np.sum(grid.points ** 2, axis=-1))
            lap_g = s ** (-g) * prof(rr / s)
            for p in ps:
                num = np.sum(np.abs(lap_g) ** p * grid.cell_weights)
                num += _power_tail(s ** (-g) * img[-1], X, d, d + g, p, idx)
                den = sobolev_norm(grid, 1, p).value
                q = num ** (1.0 / p) / den
                if q > worst:
                    worst, where = q, f"gamma={g:g},sigma={s:.4g},p={p:g}"
    return worst, where


def _gammadelta(cfg):
    idx = _index(cfg.get("a", [1.0]))
    gammas = cfg.get("gamma", [0.5, 1.5])
    ps = cfg.get("p", [2.0])
    sigmas = np.geomspace(0.25, 4.0, cfg.get("members", 20))
    n = cfg.get("nodes", 128)
    base, where = _gammadelta_sup(idx, gammas, ps, sigmas, n)
    fine, _ = _gammadelta_sup(idx, gammas, ps, sigmas, 2 * n)
    return _stable("gammadelta", base, fine, cfg, where)


def _bump(R):
    def phi(q):
        u = np.sum(np.asarray(q) ** 2, axis=-1) / R ** 2
        inside = u < 1.0
        out = np.zeros_like(u)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside]))
        return out
    return phi


def _product_sup(gammas, pairs, p, nodes):
    idx = BesselIndex.laplace(1)
    worst, where = 0.0, ""
    for g in gammas:
        for R, s in pairs:
            phi = _bump(R)
            f = lambda q, s=s: np.exp(-0.5 * np.sum(q ** 2, axis=-1) / s ** 2)
            prod = lambda q, phi=phi, f=f: phi(q) * f(q)
            X = 8.0 * R
            pg = GridFunction.from_callable(idx, prod, X, nodes)
            num_vals = frac_laplace_integral(idx, g, prod, pg.points)
            num = np.sum(np.abs(num_vals) ** p * pg.cell_weights)
            num += 2.0 * _power_tail(num_vals[-1], X, 1.0, 1.0 + g, p, idx) / sphere_measure(idx)
            fg = GridFunction.from_callable(idx, f, 12.0 * s, nodes)
            phig = GridFunction.from_callable(idx, phi, R, nodes)
            lap_phi = laplace_bessel_apply(idx, phi, phig.points)
            den = (np.max(np.abs(phig.values)) * sobolev_norm(fg, 1, p).value
                   + np.max(np.abs(lap_phi)) * lp_norm_space(fg, p).value)
            q = num ** (1.0 / p) / den
            if q > worst:
                worst, where = q, f"gamma={g:g},R={R:g},sigma={s:g}"
    return worst, where


def _product_bound(cfg):
    gammas = cfg.get("gamma", [0.5, 1.5])
    pairs = [(R, s) for R in cfg.get("radii", [1.0, 2.0, 4.0])
             for s in cfg.get("scales", [0.5, 1.0, 2.0])]
    p = cfg.get("p", 2.0)
    n = cfg.get("nodes", 256)
    base, where = _product_sup(gammas, pairs, p, n)
    fine, _ = _product_sup(gammas, pairs, p, 2 * n)
    return _stable("product_bound", base, fine, cfg, where)


def _l1_bounds(idx, sigmas, ps, nodes):
    hi, lo, where_hi, where_lo = 0.0, np.inf, "", ""
    for s in sigmas:
        spec_f = hankel.RadialProfile(
            lambda q, s=s: gaussian_transform(idx, q, s) / (1.0 + q * q),
            hankel.exponential(0.5 * s * s, 2.0))
        f = lambda q, spec_f=spec_f: hankel.inverse_radial_transform(
            idx, spec_f, np.sqrt(np.sum(np.asarray(q) ** 2, axis=-1)), rtol=1e-11)
        X = 12.0 * s + 30.0
        fg = GridFunction.from_callable(idx, f, X, nodes)
        gvals = np.exp(-0.5 * np.sum(fg.points ** 2, axis=-1) / s ** 2)
        for p in ps:
            q = sobolev_norm(fg, 1, p).value / lp_norm_space(fg.with_values(gvals), p).value
            if q > hi:
                hi, where_hi = q, f"sigma={s:.4g},p={p:g}"
            if q < lo:
                lo, where_lo = q, f"sigma={s:.4g},p={p:g}"
    C = max(hi, 1.0 / lo)
    return C, (where_hi if hi >= 1.0 / lo else where_lo)


def _l1_equiv(cfg):
    idx = _index(cfg.get("a", [1.0]))
    sigmas = np.geomspace(0.1, 10.0, cfg.get("members", 9))
    ps = cfg.get("p", [1.5, 2.0, 3.0])
    n = cfg.get("nodes", 128)
    base, where = _l1_bounds(idx, sigmas, ps, n)
    fine, _ = _l1_bounds(idx, sigmas, ps, 2 * n)
    return _stable("l1_equiv", base, fine, cfg, where)


INEQUALITY_CHECKS = {
    "contraction": _contraction,
    "gamma1": _gamma1,
    "gammadelta": _gammadelta,
    "product_bound": _product_bound,
    "l1_equiv": _l1_equiv,
}


def estimate_inequality_constant(check_id, config=None):
    """Empirical supremum of a defining ratio, with its change under one refinement.

    Passes when the constant is finite and moves by at most 10% when the
    grid is doubled; ``contraction`` must in addition stay below
    ``1 + 1e-8``. ``config`` overrides the fixed test-family parameters.
    """
    if check_id not in INEQUALITY_CHECKS:
        raise DomainError(f"unknown inequality check {check_id!r}")
    cfg = dict(config or {})
    cfg.setdefault("seed", 0)
    tol = 1.0 + 1e-8 if check_id == "contraction" else 0.10
    return _guard(check_id, tol, cfg, lambda: INEQUALITY_CHECKS[check_id](cfg))


# -- integrability of the smoothness multiplier -------------------------------------

def _lp41_multiplier(alpha):
    c2 = 1.0 / (4.0 * (alpha + 1.0))
    c4 = 1.0 / (32.0 * (alpha + 1.0) * (alpha + 2.0))

    def m(u):
        u = np.asarray(u, dtype=float)
        small = u < 1e-3
        out = np.empty_like(u)
        out[small] = c2 - c4 * u[small] ** 2
        us = u[~small]
        out[~small] = (1.0 - j_norm(alpha, us)) / us ** 2
        return out
    return m


def check_integrable_lp41(alpha, config=None):
    """Block-summed weighted L^1 integral of the inverse transform of ``(1 - j_alpha(u))/u^2``.

    Blocks are ``[0, 1]`` and ``[R, 2R]`` for ``R = 1, 2, 4, ...`` up to
    ``R_max``. The reported ``R0`` is the first radius past which every block
    contributes less than ``tol`` (relative to the running total). A
    nonpositive tolerance, or an oscillatory-sum spread above it, gives an
    inconclusive report.
    """
    cfg = dict(config or {})
    tol = float(cfg.get("tol", 1e-3))
    R_max = float(cfg.get("R_max", 16.0))
    params = {"alpha": alpha, "tol": tol, "R_max": R_max}
    if alpha < -0.5:
        raise DomainError("alpha must be >= -1/2")
    if not tol > 0:
        return CheckReport("lp41", "inconclusive", float("nan"), tol, params,
                           witness="tolerance not reachable")

    def run():
        m = _lp41_multiplier(alpha)
        c = hankel_constant(alpha)
        edges = [0.0, 1.0]
        while edges[-1] < R_max:
            edges.append(2.0 * edges[-1])
        blocks, spreads = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if lo == 0.0:
                br = np.concatenate([[0.0], hi * 2.0 ** -np.arange(30, 0, -1)])
                br = np.concatenate([br, 1.0 - 2.0 ** -np.arange(1, 12)])
                br = np.unique(np.append(br, hi))
            else:
                br = np.unique(np.concatenate([lo + lo * 2.0 ** -np.arange(8, 0, -1),
                                               np.linspace(lo, hi, 9)]))
            r, w = _panel_rule(br, 16 if lo == 0.0 else 8)
            K, spread = hankel.summable_hankel(alpha, m, r, cutoffs=cfg.get("cutoffs", (400.0, 800.0)))
            wt = w * r ** (2.0 * alpha + 1.0)
            blocks.append(c * np.sum(wt * np.abs(K)))
            spreads.append(c * np.sum(wt * spread))
        blocks = np.array(blocks)
        total = np.cumsum(blocks)
        rel = blocks / total
        small = rel < tol
        R0 = None
        for k in range(len(blocks)):
            if np.all(small[k:]):
                R0 = edges[k]
                break
        out = dict(params, total=round(float(total[-1]), 8))
        if R0 is None:
            return CheckReport("lp41", "fail", float(rel[-1]), tol, out,
                               witness=f"block [{edges[-2]:g},{edges[-1]:g}] still {rel[-1]:.3g}")
        tail = float(np.max(rel[edges.index(R0):])) if R0 in edges[:-1] else 0.0
        if max(spreads) / total[-1] > tol:
            return CheckReport("lp41", "inconclusive", tail, tol, dict(out, R0=R0),
                               witness="oscillatory sum did not settle")
        return CheckReport("lp41", "pass", tail, tol, dict(out, R0=R0))

    return _guard("lp41", tol, params, run)


# -- full runs and serialisation ---------------------------------------------------

DEFAULT_VERIFY = {
    "identities": DEFAULT_IDENTITIES,
    "inequalities": {k: {} for k in INEQUALITY_CHECKS},
    "lp41": [0.0, -0.5],
}


def run_verification(config=None, seed=0, threads=1):
    """Identities, inequality constants and lp41 checks from one config.

    Keys: ``identities`` (as for :func:`run_identity_suite`), ``inequalities``
    (check id -> overrides) and ``lp41`` (list of alphas). Missing keys run
    nothing; ``None`` runs :data:`DEFAULT_VERIFY`.
    """
    config = DEFAULT_VERIFY if config is None else config
    unknown = set(config) - {"identities", "inequalities", "lp41", "table_scale"}
    if unknown:
        raise DomainError(f"unknown verify keys {sorted(unknown)}")
    ident = dict(config.get("identities", {}))
    if ident:
        ident.setdefault("seed", seed)
        if "table_scale" in config:
            ident["table_scale"] = config["table_scale"]
    reports = run_identity_suite(ident, threads) if ident else []
    tasks = [lambda k=k, v=v: estimate_inequality_constant(k, dict({"seed": seed}, **v))
             for k, v in sorted(config.get("inequalities", {}).items())]
    tasks += [lambda al=al: check_integrable_lp41(al) for al in config.get("lp41", [])]
    reports += _run_parallel(tasks, threads)
    return sorted(reports, key=lambda r: r.check_id)


def _fmt(v):
    return "nan" if not np.isfinite(v) else f"{v:.8e}"


def reports_to_csv(reports):
    """CSV text; the value column is dimensionless (residual or ratio)."""
    buf = io.StringIO()
    buf.write("check_id,params,status,value [1],tolerance [1],refined [1],witness\n")
    for r in reports:
        params = r.params_text().replace('"', '""')
        wit = r.witness.replace('"', '""')
        buf.write(f'{r.check_id},"{params}",{r.status},{_fmt(r.value)},{_fmt(r.tolerance)},'
                  f'{_fmt(r.refined)},"{wit}"\n')
    return buf.getvalue()


def reports_to_text(reports):
    """Human-readable report whose header lists the anchor of every check present."""
    ids = sorted({r.check_id for r in reports})
    lines = ["frackap verification report", "anchors:"]
    lines += [f"  {cid}: {ANCHORS.get(cid, '')}" for cid in ids]
    lines.append("results:")
    for r in reports:
        if r.status == "pass":
            verdict = "consistent with"
        elif r.status == "fail":
            verdict = "not consistent with"
        else:
            verdict = "no conclusion on"
        lines.append(f"  [{r.status}] {r.check_id} {r.params_text()} value={_fmt(r.value)} "
                     f"tol={_fmt(r.tolerance)}: {verdict} {r.anchor}"
                     + (f" (witness {r.witness})" if r.witness else ""))
    npass = sum(r.passed for r in reports)
    lines.append(f"{npass}/{len(reports)} checks consistent with their anchors")
    return "\n".join(lines) + "\n"


def reports_to_json(reports):
    return json.dumps([{"check_id": r.check_id, "status": r.status, "value": _fmt(r.value),
                        "tolerance": _fmt(r.tolerance), "refined": _fmt(r.refined),
                        "params": r.params, "witness": r.witness} for r in reports],
                      indent=2, sort_keys=True) + "\n"
