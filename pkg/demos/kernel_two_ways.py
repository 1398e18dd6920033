"""The subelliptic heat kernel on S^5 (n = 2) from two independent formulas.

The spectral sum over Jacobi polynomials and the y-integral of the
Riemannian kernel at complex argument should agree to quadrature accuracy.
The kernel also integrates to one and relaxes to the uniform density.
"""

import numpy as np

from crsphere import CylCoord, mu_integral, p_integral, p_spectral, p_uniform_limit
from crsphere.subriemannian import p_spectral_array

n = 2

print("   r     theta      t      spectral              integral              rel. gap")
for t in (0.25, 1.0):
    for r, theta in ((0.0, 0.0), (0.6, 1.5), (1.4, -3.0)):
        c = CylCoord(n, r, theta)
        a, b = p_spectral(c, t), p_integral(c, t)
        print(f"{r:5.2f} {theta:7.2f} {t:8.2f}  {a.value:.15e}  {b.value:.15e}  {abs(a.value - b.value) / a.value:.1e}")

mass = mu_integral(lambda r, th: p_spectral_array(n, r, th, 0.5)[0], n)
print(f"\nmass at t = 0.5: {mass.value:.15f} (quadrature error {mass.error:.1e})")

late = p_spectral(CylCoord(n, 0.9, 2.0), 30.0).value
print(f"p_30 = {late:.15e}, uniform density = {p_uniform_limit(n):.15e}")

# profile along the fibre through the pole: decays from the diagonal
ths = np.linspace(0, np.pi, 7)
vals = p_spectral_array(n, np.zeros_like(ths), ths, 0.2)[0]
print("\np_0.2(0, theta):", " ".join(f"{v:.3e}" for v in vals))
