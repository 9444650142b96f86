"""A sequence of annulus pairs whose predicted angle cosine tends to one.

Each step halves ``N (delta1 - delta2)`` in exact rational arithmetic while
keeping the new annuli nested inside the previous gap.  The last column runs
the Monte Carlo experiment on a modest matrix size, so expect the measured
cosines to trail the prediction.
"""
import math

from hslab import Thm52Config, delta_sequence_planner, thm52_experiment

plan = delta_sequence_planner(1, 3)
for k, (n, d1, d2) in enumerate(plan, 1):
    gap = n * (d1 - d2)
    pred = 1 / math.sqrt(1 + float(gap))
    cfg = Thm52Config(c=1.0, n_partition=n, delta1=float(d1), delta2=float(d2), matrix_dim=192, trials=3, seed=k)
    est = thm52_experiment(cfg, keep_witness=False).est_cos_theta
    print(f"step {k}: N={n:>3}  delta1={str(d1):>12}  delta2={str(d2):>12}  N*gap={gap}  predicted cos={pred:.4f}  measured={est:.4f}")
