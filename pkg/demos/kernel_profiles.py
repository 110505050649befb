"""Kernel profiles of the fractional heat operator, two ways.

For a few orders gamma the kernel P(r, t) is evaluated by quadrature and,
where it converges, by its series. The scaling law is checked on the way.

    python3 demos/kernel_profiles.py
"""

import numpy as np

from frackap import BesselIndex, KernelSpec, P_quadrature, P_series

index = BesselIndex((1.0,))  # one Bessel axis with weight x, homogeneous dimension 2
r = np.array([0.5, 1.0, 2.0, 5.0, 10.0, 20.0])

for gamma in (0.5, 1.0, 1.5):
    spec = KernelSpec(gamma, index)
    quad = P_quadrature(spec, r, 1.0)
    print(f"\ngamma = {gamma}")
    print(f"{'r':>6} {'quadrature':>14} {'series':>14} {'rel diff':>10}")
    for ri, qi in zip(r, quad):
        val, ok = P_series(spec, ri, 1.0)
        if ok:
            print(f"{ri:6.1f} {qi:14.6e} {val:14.6e} {abs(val / qi - 1):10.1e}")
        else:
            print(f"{ri:6.1f} {qi:14.6e} {'(outside)':>14}")
    # far field: P ~ r^-(d + gamma); the correction is O(r^-gamma), slow for small gamma
    if gamma < 2:
        far = np.array([200.0, 400.0, 800.0])
        slope = np.polyfit(np.log(far), np.log(P_quadrature(spec, far, 1.0)), 1)[0]
        print(f"far-field slope {slope:.3f}, expected {-(spec.d + gamma):.3f}")

# scaling: P(r, t) = t^(-d/gamma) P(r t^(-1/gamma), 1)
spec = KernelSpec(0.5, index)
t = 2.5
lhs = P_quadrature(spec, r, t)
rhs = t ** (-spec.d / spec.gamma) * P_quadrature(spec, r * t ** (-1 / spec.gamma), 1.0)
print(f"\nscaling law, max rel diff at t = {t}: {np.max(np.abs(lhs / rhs - 1)):.1e}")
