"""Acceptance criteria 1-12, one check function per criterion.

Run under pytest (lines are printed in the terminal summary) or directly::

    python tests/test_acceptance.py
"""
import io
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg as sla

sys.path.insert(0, str(Path(__file__).parent))

from hslab.angles import principal_angle, unza_scan  # noqa: E402
from hslab.cli import main as cli_main  # noqa: E402
from hslab.hs import hs_algebraic, hs_power_limit  # noqa: E402
from hslab.kernel import Subspace, op_norm, subspace_distance, tr2_norm  # noqa: E402
from hslab.models import (  # noqa: E402
    Thm52Config,
    circular_free_poisson,
    delta_sequence_planner,
    example_diag2,
    example_tk,
    free_poisson_cdf,
    thm52_experiment,
    verify_plan,
)
from hslab.regions import Annulus, PointSet  # noqa: E402

from pool import gapped_matrix, pool_matrix  # noqa: E402
from suites import decomposition_suite, hs_axiom_suite, measure_suite, pushforward_suite  # noqa: E402

POOL_SIZE = 200
RESULTS = {}


def _record(number, title, passed, detail, seconds, budget):
    ok = passed and seconds < budget
    timing = f"{seconds:.1f}s/{budget:g}s"
    RESULTS[number] = (ok, f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail} [{timing}]")
    return ok


def criterion_1():
    worst = 0.0
    for k in (2, 4, 16, 64):
        v = Subspace.span(np.ones(k))
        w = Subspace.span(np.r_[np.ones(k - 1), 0.0])
        formula = math.acos(math.sqrt(1 - 1 / k))
        direct = principal_angle(v, w).alpha
        # the same angle through the HS ranges of T_k
        t = example_tk(k)
        p0 = hs_algebraic(t, PointSet((0.0,))).space
        pm1 = hs_algebraic(t, PointSet((-1.0,))).space
        via_hs = principal_angle(p0, pm1).alpha
        worst = max(worst, abs(direct - formula), abs(via_hs - formula))
    return worst <= 1e-10, f"max |alpha - arccos(sqrt(1-1/k))| = {worst:.2e}"


def _resolvent_norm(k, z):
    m = example_tk(k) - z * np.eye(k)
    inv = sla.solve_triangular(m, np.eye(k, dtype=complex))
    return op_norm(inv)


def criterion_2():
    outside = [_resolvent_norm(k, 0.5) for k in (8, 32, 128)]
    inside = [_resolvent_norm(k, -0.5) for k in (8, 32, 128)]
    spread = (max(outside) - min(outside)) / min(outside)
    growth = inside[-1] / inside[0]
    ok = spread < 0.2 and growth >= 10
    return ok, f"|1+z|=1.5 spread {spread:.2%}, |1+z|=0.5 growth {growth:.2e}x"


def criterion_3():
    kappas, worst = [], 0.0
    for nb in (4, 16, 64):
        rep = unza_scan(example_diag2(nb), [PointSet((0.0,))])
        f = math.acos(1 / math.sqrt(1 + 1 / nb**2))
        worst = max(worst, abs(rep.kappa_hat - f))
        kappas.append(rep.kappa_hat)
    dec = kappas[0] > kappas[1] > kappas[2]
    return worst <= 1e-9 and dec, f"kappa_hat {['%.3e' % x for x in kappas]}, max error {worst:.2e}"


def criterion_4():
    fails = []
    for i in range(POOL_SIZE):
        t, _ = pool_matrix(i)
        fails += [f"#{i} {f}" for f in hs_axiom_suite(t, i)]
        fails += [f"#{i} {f}" for f in pushforward_suite(t.shape[0], i)]
    return not fails, f"{len(fails)} failures on {POOL_SIZE} matrices" + (f" (first: {fails[0]})" if fails else "")


def criterion_5():
    worst = 0.0
    for i in range(50):
        t = gapped_matrix(i)
        alg = hs_algebraic(t, Annulus(0.0, 1.0)).space
        pl = hs_power_limit(t, 1.0, 256).space
        worst = max(worst, subspace_distance(alg, pl))
    return worst < 1e-4, f"max principal angle {worst:.2e}"


def criterion_6():
    fails = []
    for i in range(POOL_SIZE):
        t, _ = pool_matrix(i)
        fails += [f"#{i} {f}" for f in measure_suite(t, i)]
    return not fails, f"{len(fails)} failures" + (f" (first: {fails[0]})" if fails else "")


def criterion_7():
    fails, worst = [], {}
    for i in range(POOL_SIZE):
        t, _ = pool_matrix(i)
        f, nf = decomposition_suite(t)
        fails += [f"#{i} {x}" for x in f]
        for key, thr in nf.thresholds(1.0).items():
            worst[key] = max(worst.get(key, 0.0), nf.residuals[key] / thr)
    summary = ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items()))
    return not fails, f"{len(fails)} failures; worst residual/scale: {summary}"


def criterion_8():
    norms, inv_norms = [], []
    for seed in range(20):
        z = circular_free_poisson(2.0, 512, seed)
        norms.append(tr2_norm(z))
        inv_norms.append(tr2_norm(np.linalg.inv(z)))
    e1 = abs(np.mean(norms) - math.sqrt(2)) / math.sqrt(2)
    e2 = abs(np.mean(inv_norms) - 1.0)
    return e1 <= 0.05 and e2 <= 0.08, f"||Z||_2 rel error {e1:.2%}, ||Z^-1||_2 rel error {e2:.2%}"


def criterion_9():
    z = circular_free_poisson(2.0, 512, 0)
    s2 = np.sort(np.linalg.svd(z, compute_uv=False) ** 2)
    n = len(s2)
    cdf = free_poisson_cdf(s2, 2.0)
    ks = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
    return ks < 0.08, f"Kolmogorov distance {ks:.4f}"


def criterion_10():
    rep = thm52_experiment(Thm52Config())
    p = rep.predictions
    e = {
        "a1_sq": abs(rep.est_a1_sq - 1.5) / 1.5,
        "a2inv_sq": abs(rep.est_a2inv_sq - 0.625) / 0.625,
        "zeta_sq": abs(rep.est_zeta_sq - 1.0),
        "cos_theta": abs(rep.est_cos_theta - 1 / math.sqrt(2)),
    }
    ok = e["a1_sq"] <= 0.1 and e["a2inv_sq"] <= 0.1 and e["zeta_sq"] <= 0.2 and e["cos_theta"] <= 0.1
    ok = ok and abs(p["cos_theta"] - 1 / math.sqrt(2)) < 1e-15
    detail = (
        f"a1^2 {rep.est_a1_sq:.4f}, a2^-1^2 {rep.est_a2inv_sq:.4f}, zeta^2 {rep.est_zeta_sq:.4f}, "
        f"cos {rep.est_cos_theta:.4f}, discarded {rep.discarded}"
    )
    return ok, detail


def criterion_11():
    plan = delta_sequence_planner(c=1, k_steps=3)
    exact = not verify_plan(plan, 1) and plan[0] == (3, Fraction(5, 9), Fraction(4, 9))
    gaps = [n * (d1 - d2) for n, d1, d2 in plan]
    coss = []
    for n, d1, d2 in plan:
        cfg = Thm52Config(c=1.0, n_partition=n, delta1=float(d1), delta2=float(d2), matrix_dim=256, trials=40)
        coss.append(thm52_experiment(cfg).est_cos_theta)
    inc = all(a < b for a, b in zip(coss, coss[1:]))
    dec = all(a > b for a, b in zip(gaps, gaps[1:]))
    detail = f"N {[p[0] for p in plan]}, N(d1-d2) {[str(g) for g in gaps]}, cos {['%.4f' % c for c in coss]}"
    return exact and inc and dec, detail


DETERMINISM_RUNS = [
    ["rand", "ginibre", "--n", "64", "--trials", "3"],
    ["rand", "dt", "--n", "64", "--trials", "3", "--law", "uniform_annulus", "--r", "0.5", "--s", "1"],
    ["rand", "cfp", "--n", "64", "--trials", "3", "--c", "2"],
    ["thm52", "--matrix-dim", "64", "--trials", "3"],
]


def _csv_bodies(argv, out):
    code = cli_main(argv + ["--seed", "7", "--out", str(out), "--format", "csv"], io.StringIO(), io.StringIO())
    if code not in (0, 1):
        raise RuntimeError(f"{argv} exited with {code}")
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


def criterion_12(tmp=None):
    import tempfile

    bad = []
    with tempfile.TemporaryDirectory(dir=tmp) as d:
        for j, argv in enumerate(DETERMINISM_RUNS):
            first = _csv_bodies(argv, Path(d) / f"a{j}")
            second = _csv_bodies(argv, Path(d) / f"b{j}")
            if not first or first != second:
                bad.append(" ".join(argv[:2]))
    return not bad, f"{len(DETERMINISM_RUNS)} commands, mismatches: {bad or 'none'}"


CRITERIA = [
    (1, "angle formula", criterion_1, 1),
    (2, "resolvent dichotomy", criterion_2, 5),
    (3, "angle decay", criterion_3, 5),
    (4, "HS axiom suite", criterion_4, 60),
    (5, "power-limit cross-validation", criterion_5, 60),
    (6, "spectral-measure suite", criterion_6, 120),
    (7, "decomposition residuals", criterion_7, 120),
    (8, "circular free Poisson norms", criterion_8, 300),
    (9, "free Poisson singular-value law", criterion_9, 120),
    (10, "two-block reproduction", criterion_10, 600),
    (11, "angle-collapse trend", criterion_11, 900),
    (12, "determinism", criterion_12, 60),
]


def run(number):
    _, title, fn, budget = CRITERIA[number - 1]
    t0 = time.perf_counter()
    passed, detail = fn()
    return _record(number, title, passed, detail, time.perf_counter() - t0, budget)


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number):
    ok = run(number)
    assert ok, RESULTS[number][1]


if __name__ == "__main__":
    status = 0
    for number, *_ in CRITERIA:
        run(number)
        print(RESULTS[number][1], flush=True)
        status |= not RESULTS[number][0]
    sys.exit(status)
