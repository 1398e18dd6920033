"""The Green function of the conformal sub-Laplacian -L + n^2.

Integrating e^{-n^2 t - lambda t} p_t over time and evaluating the closed-form
y-integral give the same resolvent; at lambda = 0 both reduce to the
closed-form Green function, which solves (-L + n^2) G = 0 away from the pole.
"""

from crsphere import CylCoord, LaplaceQuery, green_conformal, green_residual, laplace_lhs, laplace_rhs

c = CylCoord(1, 0.6, 1.0)
g = green_conformal(c)
print(f"G(0.6, 1.0) = {g:.15e}")
print("lambda     time integral          y-integral             |diff|/rhs   |rhs - G|")
for lam in (4.0, 1.0, 0.25, 0.05):
    q = LaplaceQuery(c, lam)
    lhs, rhs = laplace_lhs(q), laplace_rhs(q)
    print(f"{lam:6.2f}  {lhs:.15e}  {rhs:.15e}  {abs(lhs - rhs) / rhs:.1e}     {abs(rhs - g):.2e}")
print(f"lambda = 0: y-integral {laplace_rhs(LaplaceQuery(c, 0.0)):.15e}")

for n, r, theta in ((1, 0.8, 2.0), (2, 1.1, 1.0), (3, 0.5, -2.5)):
    print(f"n={n}: |(-L + n^2) G| at ({r}, {theta}) = {green_residual(n, CylCoord(n, r, theta)):.1e}")
