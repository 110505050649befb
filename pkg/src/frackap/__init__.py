"""Fractional heat operators with Bessel weights: kernels, transforms, norms and capacities.

Submodules
----------
special     normalised Bessel functions, weight indices, sphere constants
hankel      Hankel transforms and the radial reduction of Fourier/Hankel transforms
translate   Bessel (Delsarte) translation, grid functions, convolutions
kernels     fundamental solution P, its tables and series, the Bessel potential kernel
operators   Delta_a, spherical differences, the fractional operator in two forms
norms       weighted Lebesgue, Sobolev, potential and dual norms
capacity    atomic capacity lower bounds by Frank-Wolfe
harness     verification suites and empirical inequality constants
cli         command-line front end
"""

from importlib import resources

from .errors import (CoverageError, DegenerateSetError, DomainError, FrackapError,
                     NonConvergenceError, ShapeError, StagnationError, StepTooLargeError,
                     UnsupportedCaseError)
from .special import BesselIndex, KernelSpec, j_norm, sphere_measure
from .hankel import RadialProfile, hankel_1d, inverse_radial_transform, radial_transform
from .translate import (GridFunction, SpaceTimeGridFunction, bessel_convolve,
                        bessel_translate_1d, mixed_convolve, translate_nd)
from .kernels import (G_kernel, KernelTable, P_eval, P_quadrature, P_series, build_table,
                      get_table, mollified_profile)
from .operators import (OperatorConfig, frac_laplace_integral, frac_laplace_spectral,
                        heat_operator_apply, laplace_bessel_apply, spherical_difference)
from .norms import (NormReport, dual_sobolev_norm_p2, lp_norm_space, lp_norm_spacetime,
                    potential_norm, sobolev_norm)
from .capacity import (CapacityResult, CompactSetSpec, GridParams, SolverConfig,
                       refine_and_trend, solve_capacity)
from .harness import (CheckReport, check_integrable_lp41, estimate_inequality_constant,
                      run_identity_suite)

__version__ = "0.1.0"


def fixture_path(name):
    """Path of a shipped JSON fixture (e.g. ``"capacity_singleton.json"``)."""
    return str(resources.files(__package__).joinpath("fixtures", name))
