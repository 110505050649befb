"""Special functions, weight multiindices and sphere constants.

Everything here is vectorised over numpy arrays where it makes sense; the
higher-level modules call these in tight quadrature loops.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError, UnsupportedCaseError

# below this radius the power series of j_alpha is used, above it the
# rescaled J_alpha; both agree to ~1e-13 here
Z_SWITCH = 8.0
_SERIES_TERMS = 60


@dataclass(frozen=True)
class BesselIndex:
    """Weight multiindex ``a`` on an n-dimensional space.

    Either all entries are zero (Laplace case on R^n) or all are strictly
    positive (Bessel case on the positive orthant).
    """

    a: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.a))
        if len(a) == 0:
            raise DomainError("index needs at least one axis")
        if any(v < 0 for v in a):
            raise DomainError(f"negative weight in {a}")
        zero = [v == 0.0 for v in a]
        if any(zero) and not all(zero):
            raise UnsupportedCaseError(f"mixed Laplace/Bessel index {a}")
        object.__setattr__(self, "a", a)

    @classmethod
    def laplace(cls, n):
        return cls((0.0,) * int(n))

    @property
    def n(self):
        return len(self.a)

    @property
    def size(self):
        """|a|, the sum of the weights."""
        return float(sum(self.a))

    @property
    def alphas(self):
        return tuple((v - 1.0) / 2.0 for v in self.a)

    @property
    def d(self):
        """Homogeneous dimension n + |a|."""
        return self.n + self.size

    @property
    def nu(self):
        """Order of the radial Hankel transform, d/2 - 1."""
        return self.d / 2.0 - 1.0

    @property
    def is_laplace(self):
        return self.size == 0.0

    def require_bessel(self):
        if self.is_laplace:
            raise UnsupportedCaseError("operation needs a Bessel (all a_i > 0) index")

    def __str__(self):
        return ",".join(f"{v:g}" for v in self.a)


@dataclass(frozen=True)
class KernelSpec:
    """Operator exponent gamma in (0, 2) together with its weight index."""

    gamma: float
    index: BesselIndex

    def __post_init__(self):
        g = float(self.gamma)
        if not 0.0 < g < 2.0:
            raise DomainError(f"gamma must lie in (0, 2), got {g}")
        object.__setattr__(self, "gamma", g)
        if not isinstance(self.index, BesselIndex):
            object.__setattr__(self, "index", BesselIndex(self.index))

    @property
    def d(self):
        return self.index.d


def gamma_fn(x):
    """Euler Gamma function for positive arguments."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("gamma_fn is only defined here for x > 0")
    out = sp.gamma(x)
    return out if out.ndim else float(out)


def _j_series(alpha, z):
    # sum_k (-1)^k Gamma(alpha+1) / (k! Gamma(k+alpha+1)) (z/2)^(2k)
    q = -(z / 2.0) ** 2
    term = np.ones_like(z)
    total = np.ones_like(z)
    zmax = float(z.max()) if z.size else 0.0
    for k in range(min(_SERIES_TERMS, int(3.0 * zmax) + 12)):
        term = term * q / ((k + 1.0) * (k + alpha + 1.0))
        total = total + term
    return total


def _j_large(alpha, z):
    # Gamma(alpha+1) (2/z)^alpha J_alpha(z); cheap closed forms for common orders
    if alpha == -0.5:
        return np.cos(z)
    if alpha == 0.5:
        return np.sin(z) / z
    if alpha == 0.0:
        return sp.j0(z)
    if alpha == 1.0:
        return 2.0 * sp.j1(z) / z
    if alpha == 1.5:
        return 3.0 * (np.sin(z) / z - np.cos(z)) / (z * z)
    scale = np.exp(sp.gammaln(alpha + 1.0) + alpha * np.log(2.0 / z))
    return scale * sp.jv(alpha, z)


def j_norm(alpha, z, z_switch=Z_SWITCH):
    """Normalised Bessel function ``j_alpha(z) = Gamma(alpha+1) (2/z)^alpha J_alpha(z)``.

    Entire and even in ``z`` with ``j_alpha(0) = 1``; ``alpha = -1/2`` gives
    ``cos z``.
    """
    if alpha < -0.5:
        raise DomainError(f"j_norm needs alpha >= -1/2, got {alpha}")
    z = np.abs(np.asarray(z, dtype=float))
    if alpha in (-0.5, 0.0):
        out = _j_large(alpha, z)
        return out if out.ndim else float(out)
    out = np.empty_like(z)
    small = z <= z_switch
    out[small] = _j_series(alpha, z[small])
    if np.any(~small):
        out[~small] = _j_large(alpha, z[~small])
    return out if out.ndim else float(out)


def j_norm_derivative(alpha, z):
    """Derivative of :func:`j_norm` in z, ``-z j_{alpha+1}(z) / (2(alpha+1))``."""
    z = np.asarray(z, dtype=float)
    out = -z * j_norm(alpha + 1.0, z) / (2.0 * (alpha + 1.0))
    return out if np.ndim(out) else float(out)


def modified_K(nu, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("modified_K is singular at x <= 0")
    out = sp.kv(abs(nu), x)
    return out if out.ndim else float(out)


def sphere_measure(index):
    """Weighted measure of the unit sphere (positive part in the Bessel case)."""
    n = index.n
    if index.is_laplace:
        return 2.0 * np.pi ** (n / 2.0) / sp.gamma(n / 2.0)
    num = np.prod([sp.gamma(al + 1.0) for al in index.alphas])
    return float(num / (2.0 ** (n - 1) * sp.gamma(index.d / 2.0)))


def jj_product(index, x, xi):
    """Product kernel prod_i j_{alpha_i}(x_i xi_i) of the n-dimensional Hankel transform."""
    index.require_bessel()
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    out = 1.0
    for i, al in enumerate(index.alphas):
        out = out * j_norm(al, x[..., i] * xi[..., i])
    return out


def hankel_constant(nu):
    """Inverse constant of the order-nu transform with kernel j_nu(rho r) r^(2nu+1)."""
    return 1.0 / (4.0 ** nu * sp.gamma(nu + 1.0) ** 2)


def radial_inverse_constant(index):
    """Constant c with f(r) = c * int F(rho) j_nu(rho r) rho^(d-1) d rho for radial f.

    Equals 2^(n-|a|) / prod Gamma(alpha_i+1)^2 times the sphere measure in the
    Bessel case and (2 pi)^(-n) times the sphere measure in the Fourier case.
    """
    return hankel_constant(index.nu) / sphere_measure(index)
