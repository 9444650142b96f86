"""Angles between complementary spectral subspaces shrink as similarity blows up.

Two deterministic families are used.  ``example_tk(k)`` has a single zero
eigenvalue and a ``k-1`` dimensional Jordan block at ``-1``; the angle between
the two spectral subspaces is ``asin(1/sqrt(k))``.  ``example_diag2(n)`` is block diagonal with 2x2 blocks whose two
eigenvectors tilt toward each other as ``n`` grows.

Run with ``python3 demos/01_nilpotent_angles.py``.
"""
import math

from hslab import (
    PointSet,
    example_diag2,
    example_tk,
    hs_algebraic,
    principal_angle,
    spectrality_report,
)

print("T_k: angle between the zero eigenspace and the generalized -1 eigenspace")
print(f"{'k':>4} {'alpha':>10} {'asin(1/sqrt k)':>15}")
for k in (2, 4, 8, 16, 32):
    t = example_tk(k)
    v = hs_algebraic(t, PointSet((-1.0,))).space
    w = hs_algebraic(t, PointSet((0.0,))).space
    a = principal_angle(v, w).alpha
    print(f"{k:>4} {a:10.6f} {math.asin(1 / math.sqrt(k)):15.6f}")

print()
print("diag2(n): smallest atom-pair angle against the closed form acos(1/sqrt(1+1/n^2))")
for n in (2, 4, 8, 16):
    rep = spectrality_report(example_diag2(n))
    ref = math.acos(1 / math.sqrt(1 + 1 / n**2))
    print(f"n={n:>3}  kappa_hat={rep.kappa_hat:.6f}  closed form={ref:.6f}  max ||E||={rep.bound_M:.2f}")
