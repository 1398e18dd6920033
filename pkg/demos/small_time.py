"""Small-time behaviour of the kernel in the three regimes.

Near the diagonal, on the cut locus r = 0 and in the interior, the spectral
kernel is compared with its leading asymptotic term; ``-4t log p_t`` is
extrapolated to the squared sub-Riemannian distance.
"""

from crsphere import CylCoord, distance, extrapolate_exponent, p_spectral, small_time_kernel
from crsphere.geodesy import asym_cut_locus

points = [(1, 0.0, 0.0), (1, 0.0, 1.5), (2, 0.8, 0.0), (2, 0.8, 1.0)]
for n, r, theta in points:
    c = CylCoord(n, r, theta)
    regime = small_time_kernel(c, 0.1).regime
    ratios = [p_spectral(c, t).value / small_time_kernel(c, t).value for t in (0.2, 0.1, 0.05)]
    print(f"n={n} (r, theta)=({r}, {theta}) [{regime}]: p / leading term at t = 0.2, 0.1, 0.05:",
          " ".join(f"{x:.4f}" for x in ratios))

print()
ts = (0.15, 0.1, 0.07)
for n, r, theta in points[1:]:
    c = CylCoord(n, r, theta)
    est = extrapolate_exponent(c, ts, [p_spectral(c, t).value for t in ts])
    print(f"n={n} (r, theta)=({r}, {theta}): extrapolated d^2 = {est:.5f}, distance()^2 = {distance(c) ** 2:.5f}")

# on the cut locus every order of the Riemannian expansion feeds the leading constant for n >= 2
print()
for n in (1, 2, 3):
    full = asym_cut_locus(n, 0.05, 1.5)
    lead = asym_cut_locus(n, 0.05, 1.5, variant="leading_only")
    p = p_spectral(CylCoord(n, 0.0, 1.5), 0.05).value
    print(f"n={n}: p / full = {p / full:.4f}, p / leading_only = {p / lead:.4f} at t = 0.05")
