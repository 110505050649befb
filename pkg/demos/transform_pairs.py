"""Transform pairs on Gaussians.

The Gaussian is its own transform up to a constant. The round trip returns
the profile. The Bessel-Laplace operator becomes multiplication by -rho^2.

    python3 demos/transform_pairs.py
"""

import math

import numpy as np

from frackap import hankel
from frackap.hankel import RadialProfile, gaussian_profile
from frackap.operators import laplace_bessel_apply
from frackap.special import BesselIndex, sphere_measure

rho = np.linspace(0.0, 5.0, 6)
gauss = gaussian_profile()

for index in (BesselIndex.laplace(1), BesselIndex.laplace(3), BesselIndex((1.0,)),
              BesselIndex((0.5, 2.0))):
    nu = index.nu
    exact = sphere_measure(index) * 2 ** nu * math.gamma(nu + 1) * np.exp(-rho ** 2 / 2)
    got = hankel.radial_transform(index, gauss, rho)
    print(f"a = {index.a}: d = {index.d:g}, max rel error {np.max(np.abs(got / exact - 1)):.1e}")

index = BesselIndex((1.0,))
spectrum = RadialProfile(lambda q: hankel.radial_transform(index, gauss, q),
                         hankel.exponential(0.45, 2.0))
r = np.linspace(0.0, 4.0, 9)
back = hankel.inverse_radial_transform(index, spectrum, r)
print(f"\nround trip, max abs error {np.max(np.abs(back - gauss(r))):.1e}")

f = lambda p: np.exp(-0.5 * np.sum(p ** 2, axis=-1))
lap = RadialProfile(lambda s: -laplace_bessel_apply(index, f, np.asarray(s)[..., None],
                                                    even=True),
                    hankel.exponential(0.45, 2.0))
got = hankel.radial_transform(index, lap, rho, rtol=1e-8)
print("transform of -Delta_a f over rho^2 times transform of f:")
print(np.round(got[1:] / (rho[1:] ** 2 * hankel.radial_transform(index, gauss, rho[1:])), 8))
