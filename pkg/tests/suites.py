"""Per-matrix law checks shared by the unit tests and the acceptance run.

Each suite returns a list of failure strings (empty on success).
"""
import itertools

import numpy as np

from hslab.angles import oblique_idempotent, principal_angle, wermer_bound
from hslab.hs import (
    hs_algebraic,
    hs_join,
    hs_meet,
    hs_pushforward_check,
    hs_similarity,
    is_contained,
)
from hslab.kernel import op_norm, subspace_distance
from hslab.measures import build_spectral_measure, normal_form, similarity_from_measure
from hslab.regions import Annulus, Disk, HalfPlane, PointSet
from hslab.spectral import decomposability_check, region_mass, spectral_data

HS_TOL = 1e-8
LATTICE_ANGLE = 1e-7
MEASURE_REL = 1e-7


def _cut(values, margin, rng):
    """A threshold between two consecutive sorted ``values`` separated by ``> 2*margin``."""
    v = np.sort(np.asarray(values, dtype=float))
    gaps = [(v[i], v[i + 1]) for i in range(len(v) - 1) if v[i + 1] - v[i] > 2 * margin]
    if not gaps:
        return None
    lo, hi = gaps[int(rng.integers(len(gaps)))]
    return lo + (hi - lo) * rng.uniform(0.3, 0.7)


def region_pool(locs, margin, rng):
    """Regions whose boundaries stay at least ``margin`` away from every atom."""
    locs = np.asarray(locs, dtype=complex)
    out = []
    mods = np.abs(locs)
    r = _cut(np.r_[0.0, mods], margin, rng)
    if r is not None:
        out.append(Disk(0, r))
        s = _cut(np.r_[mods[mods > r], 10 * mods.max() + 1], margin, rng)
        if s is not None:
            out.append(Annulus(r, s))
    theta = rng.uniform(0, 2 * np.pi)
    normal = np.exp(1j * theta)
    proj = (locs * np.conj(normal)).real
    off = _cut(proj, margin, rng)
    if off is not None:
        out.append(HalfPlane(normal, off))
    c = locs[int(rng.integers(len(locs)))]
    rad = _cut(np.r_[0.0, np.abs(locs - c)], margin, rng)
    if rad is not None:
        out.append(Disk(c, rad))
    d = np.abs(locs[:, None] - locs[None, :]) + np.diag(np.full(len(locs), np.inf))
    tol = min(1e-7, 0.25 * d.min()) if len(locs) > 1 else 1e-7
    pick = rng.random(len(locs)) < 0.5
    out.append(PointSet(tuple(locs[pick]), tol))
    return out


def hs_axiom_suite(t, seed):
    """Invariance, trace, complementary compressions, monotonicity, lattice, similarity."""
    rng = np.random.default_rng(seed)
    fails = []
    data = spectral_data(t)
    mu = data.measure
    margin = max(20 * data.cluster_tol, 1e-6 * (1 + data.norm))
    regions = region_pool(mu.locations, margin, rng)
    regions += [~b for b in regions]
    tn = data.norm
    proj = {}
    for b in regions:
        p = hs_algebraic(t, b, data=data)
        proj[b] = p
        if p.invariance > HS_TOL * tn:
            fails.append(f"invariance {b.expr()}: {p.invariance:.3e}")
        if p.trace != region_mass(mu, b):
            fails.append(f"trace {b.expr()}: {p.trace} vs {region_mass(mu, b)}")
        if not decomposability_check(t, b, data=data).passed:
            fails.append(f"compression spectra {b.expr()}")
        if p.warnings:
            fails.append(f"boundary atom {b.expr()}")
    for b1, b2 in itertools.combinations(regions, 2):
        p1, p2 = proj[b1], proj[b2]
        join = hs_join([p1, p2])
        meet = hs_meet([p1, p2])
        direct_join = hs_algebraic(t, b1 | b2, data=data).space
        direct_meet = hs_algebraic(t, b1 & b2, data=data).space
        if join.dim != direct_join.dim or subspace_distance(join, direct_join) > LATTICE_ANGLE:
            fails.append(f"join {b1.expr()} {b2.expr()}")
        if meet.dim != direct_meet.dim or subspace_distance(meet, direct_meet) > LATTICE_ANGLE:
            fails.append(f"meet {b1.expr()} {b2.expr()}")
        # monotonicity along b1 & b2 ⊆ b1 and b1 ⊆ b1 | b2
        if not is_contained(direct_meet, p1.space, LATTICE_ANGLE):
            fails.append(f"monotone meet {b1.expr()}")
        if not is_contained(p1.space, direct_join, LATTICE_ANGLE):
            fails.append(f"monotone join {b1.expr()}")
    n = t.shape[0]
    while True:
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if np.linalg.cond(a) < 50:
            break
    for b in regions[:3]:
        rep = hs_similarity(t, a, b)
        if not rep.passed:
            fails.append(f"similarity {b.expr()}: {rep.angle:.3e} > {rep.threshold:.3e}")
    return fails


def commuting_nilpotent_pair(n, seed):
    """``s`` with repeated atoms and a nilpotent ``q`` built in the same block basis."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, min(n, 3) + 1))
    atoms = []
    while len(atoms) < k:
        z = complex(*rng.uniform(-2, 2, 2))
        if all(abs(z - w) >= 0.5 for w in atoms):
            atoms.append(z)
    atoms = np.array(atoms)
    sizes = np.r_[np.ones(k, dtype=int), np.bincount(rng.integers(0, k, n - k), minlength=k)]
    sizes = sizes[:k] + sizes[k:]
    s_blocks, q_blocks = [], []
    for lam, m in zip(atoms, sizes):
        s_blocks.append(lam * np.eye(m))
        q_blocks.append(np.triu(rng.standard_normal((m, m)), 1))
    s0 = _block_diag(s_blocks)
    q0 = _block_diag(q_blocks)
    while True:
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if np.linalg.cond(x) < 20:
            break
    xi = np.linalg.inv(x)
    return x @ s0 @ xi, x @ q0 @ xi, atoms


def _block_diag(blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        m = b.shape[0]
        out[i:i + m, i:i + m] = b
        i += m
    return out


def pushforward_suite(n, seed):
    s, q, atoms = commuting_nilpotent_pair(n, seed)
    fails = []
    # eigenvalues of s + q scatter like eps^(1/m) for an m-block, so capture each atom with a disk
    rad = 0.5 * min((abs(a - b) for a, b in itertools.combinations(atoms, 2)), default=1.0)
    for j in range(len(atoms)):
        b = Disk(atoms[j], rad)
        rep = hs_pushforward_check(s, q, b)
        if not rep.passed:
            fails.append(f"pushforward atom {j}: {rep.angle:.3e}")
    return fails


def measure_suite(t, seed=0):
    """Spectral-measure laws, Wermer sandwich and bound, conjugated self-adjointness."""
    fails = []
    data = spectral_data(t)
    table = build_spectral_measure(t, data=data)
    k = len(table.idempotents)
    m = table.bound_M
    tn = data.norm
    scale = (1 + m) ** 2
    res = table.residuals()
    if res["sum_identity"] > MEASURE_REL * scale:
        fails.append(f"sum {res['sum_identity']:.3e}")
    for x in table.idempotents:
        if op_norm(x.e @ t - t @ x.e) > MEASURE_REL * tn * (1 + x.norm_e):
            fails.append("commutation")
        if not x.check(MEASURE_REL):
            fails.append(f"idempotent residuals {x.residuals()}")
        alpha = principal_angle(x.range_space, x.kernel_space).alpha
        if x.norm_e > wermer_bound(alpha) * (1 + 1e-8):
            fails.append(f"wermer bound {x.norm_e} > {wermer_bound(alpha)}")
    rng = np.random.default_rng(seed)
    subsets = [tuple(np.flatnonzero(rng.random(k) < 0.5)) for _ in range(6)]
    for s1, s2 in itertools.product(subsets, repeat=2):
        prod = table.e(s1) @ table.e(s2)
        inter = table.e(sorted(set(s1) & set(s2)))
        if op_norm(prod - inter) > MEASURE_REL * scale:
            fails.append(f"multiplicativity {s1} {s2}")
    # additivity against an idempotent built directly from the two HS ranges
    for s1 in subsets:
        if 0 < len(s1) < k:
            pts = PointSet(tuple(table.locations[list(s1)]), _atom_tol(table.locations))
            v = hs_algebraic(t, pts, data=data).space
            w = hs_algebraic(t, ~pts, data=data).space
            direct = oblique_idempotent(v, w).e
            if op_norm(direct - table.e(s1)) > MEASURE_REL * scale:
                fails.append(f"additivity {s1}")
    a = similarity_from_measure(table)
    ev = np.linalg.eigvalsh(a)
    if ev.min() < 1 / (2 * m) or ev.max() > 2 * m:
        fails.append(f"sandwich [{ev.min():.3e}, {ev.max():.3e}] vs M={m:.3e}")
    ainv = np.linalg.inv(a)
    for x in table.idempotents:
        c = a @ x.e @ ainv
        if op_norm(c - c.conj().T) > MEASURE_REL:
            fails.append("conjugated idempotent not self-adjoint")
    return fails


def _atom_tol(locs):
    if len(locs) < 2:
        return 1e-7
    d = np.abs(locs[:, None] - locs[None, :]) + np.diag(np.full(len(locs), np.inf))
    return min(1e-7, 0.25 * d.min())


def decomposition_suite(t):
    nf = normal_form(t)
    fails = []
    for name, ok in nf.verdicts(MEASURE_REL).items():
        if not ok:
            fails.append(f"{name}: {nf.residuals[name]:.3e} > {nf.thresholds(MEASURE_REL)[name]:.3e}")
    return fails, nf
