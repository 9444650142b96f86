"""The spectral subspace for a disk, computed two ways.

The algebraic route reorders a Schur form so the eigenvalues inside the
region come first.  The analytic route looks at ``|t^n|^{1/n}`` for large
``n`` and keeps the eigenvectors whose eigenvalue stays below the radius.
The two should agree, and vectors in each piece should grow at the rate the
region predicts.
"""
import numpy as np

from hslab import Annulus, growth_validate, hs_algebraic, hs_power_limit, subspace_distance

rng = np.random.default_rng(4)
ev = np.array([0.4, 0.5j, -0.45, 1.8, 1.5j, -2.2])
x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
t = x @ np.diag(ev) @ np.linalg.inv(x)

alg = hs_algebraic(t, Annulus(0.0, 1.0))
print(f"algebraic: dim={alg.dim}  trace={alg.trace}  invariance={alg.invariance:.1e}")
for n in (16, 64, 256):
    pl = hs_power_limit(t, 1.0, n)
    print(f"power limit n={n:>3}: dim={pl.dim}  distance to algebraic={subspace_distance(pl.space, alg.space):.2e}")

rep = growth_validate(t, alg, samples=4, n=128)
print()
print(f"growth rates inside  (should be < 1): {np.round(rep.inside, 3)}")
print(f"growth rates outside (should be > 1): {np.round(rep.outside, 3)}")
print(f"consistent: {rep.consistent}")
