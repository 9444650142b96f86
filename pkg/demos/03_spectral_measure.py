"""Idempotent-valued spectral measure and the normal form it produces.

For a matrix with distinct atoms, ``E(S)`` is the oblique projection onto the
spectral subspace of ``S`` along the one of its complement.  Averaging
``E(S)^* E(S)`` over all subsets gives a positive matrix whose square root
``A`` conjugates ``t`` into normal plus nilpotent.  The condition number of
``A`` is pinned between fixed multiples of ``max ||E(S)||``.
"""
import numpy as np

from hslab import build_spectral_measure, example_diag2, normal_form, op_norm

for n in (2, 4, 8, 16):
    t = example_diag2(n)
    table = build_spectral_measure(t)
    nf = normal_form(t, table=table)
    m = table.bound_M
    print(
        f"n={n:>2}  max||E||={m:7.2f}  cond(A)={nf.cond_a:7.2f}  "
        f"in [M/2, 2M]: {m / 2 <= nf.cond_a <= 2 * m}  "
        f"||[N,N*]||={nf.residuals['normality']:.1e}"
    )

t = np.array([[0.0, 1.0], [0.0, 0.25]])
table = build_spectral_measure(t)
print()
print("2x2 block with eigenvalues 0 and 1/4")
for lam, x in zip(table.locations, table.idempotents):
    print(f"E({{{lam.real:g}}}) =\n{np.round(x.e.real, 6)}   norm {op_norm(x.e):.4f}")
