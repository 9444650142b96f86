"""Idempotent-valued spectral measures and the normal-plus-nilpotent form.

For each atom ``λ`` of a matrix ``t`` the idempotent ``e(λ)`` has range
``P(t,{λ})`` and kernel ``P(t, C∖{λ})``.  Sums of these give ``E(σ)`` for
every set of atoms, ``S = Σ λ e(λ)`` is the scalar part and ``Q = t - S``
is nilpotent.  The metric ``A = (Σ e^* e)^{1/2}`` makes every ``A e A^{-1}``
self-adjoint, so ``A S A^{-1}`` is normal.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .angles import (
    atom_subset_family,
    oblique_idempotent,
    unza_scan,
    wermer_bound,
)
from .errors import DegenerateMeasure
from .kernel import Subspace, herm_power, op_norm, reorder_schur, subspace_distance
from .spectral import decomposability_check, spectral_data
from .tolerances import DEFAULT_TOLS, ToleranceConfig

__all__ = [
    "SpectralMeasureTable",
    "build_spectral_measure",
    "similarity_from_measure",
    "DecompositionResult",
    "scalar_nilpotent_split",
    "normal_form",
    "SpectralityReport",
    "spectrality_report",
]

EXHAUSTIVE_ATOMS = 12
SAMPLED_UNIONS = 512


@dataclass(frozen=True)
class SpectralMeasureTable:
    """Atomic idempotent-valued spectral measure of a matrix.

    Attributes
    ----------
    source_dim : int
    locations : ndarray of complex
    idempotents : list of ObliqueIdempotent
        ``e(λ)`` for each atom, aligned with ``locations``.
    bound_M : float
        Largest ``||E(σ)||`` over the scanned unions ``σ``.
    plan : dict
        How the unions were enumerated (exhaustive or sampled, with seed).
    """

    source_dim: int
    locations: np.ndarray
    idempotents: list
    bound_M: float
    plan: dict
    t: np.ndarray = field(repr=False)
    nilpotency: float = 0.0

    @property
    def atoms(self):
        return list(zip(self.locations, self.idempotents))

    def e(self, subset):
        """``E(σ)`` for a set of atom indices."""
        out = np.zeros((self.source_dim, self.source_dim), dtype=complex)
        for j in subset:
            out = out + self.idempotents[j].e
        return out

    def residuals(self):
        n = self.source_dim
        es = [x.e for x in self.idempotents]
        total = op_norm(sum(es) - np.eye(n))
        tn = op_norm(self.t)
        comm = max(op_norm(e @ self.t - self.t @ e) / (1 + op_norm(e)) for e in es)
        cross = 0.0
        for i, j in itertools.combinations(range(len(es)), 2):
            cross = max(cross, op_norm(es[i] @ es[j]), op_norm(es[j] @ es[i]))
        idem = max(op_norm(e @ e - e) / (1 + op_norm(e) ** 2) for e in es)
        return {
            "sum_identity": total,
            "commutation": comm / max(tn, np.finfo(float).tiny),
            "orthogonality": cross,
            "idempotent": idem,
        }


def _union_subsets(k, seed):
    if k <= EXHAUSTIVE_ATOMS:
        subsets = [s for size in range(1, k + 1) for s in itertools.combinations(range(k), size)]
        return subsets, {"mode": "exhaustive", "count": len(subsets)}
    rng = np.random.default_rng(seed)
    subsets = [(j,) for j in range(k)]
    subsets += [tuple(i for i in range(k) if i != j) for j in range(k)]
    for _ in range(SAMPLED_UNIONS):
        pick = tuple(np.flatnonzero(rng.random(k) < 0.5).tolist())
        if pick:
            subsets.append(pick)
    return subsets, {"mode": "sampled", "count": len(subsets), "seed": seed, "random": SAMPLED_UNIONS}


def build_spectral_measure(t, *, tols: ToleranceConfig = DEFAULT_TOLS, seed=0, data=None):
    """Idempotents ``e(λ)`` with range ``P(t,{λ})`` and kernel ``P(t, C∖{λ})``."""
    data = data or spectral_data(t, tols=tols)
    mu = data.measure
    n = data.t.shape[0]
    labels = mu.labels
    idems = []
    for j in range(len(mu)):
        mask = labels == j
        s_in = reorder_schur(data.schur, mask, tols=tols)
        s_out = reorder_schur(data.schur, ~mask, tols=tols)
        k = int(mask.sum())
        v = Subspace(s_in.u[:, :k].copy())
        w = Subspace(s_out.u[:, : n - k].copy())
        idems.append(oblique_idempotent(v, w, tols=tols))
    # eigenvalues of Q = t - S are r_ii - λ(i) in the Schur basis
    diag = np.diag(data.schur.r)
    nil = float(np.max(np.abs(diag - mu.locations[labels]))) if n else 0.0
    k = len(idems)
    subsets, plan = _union_subsets(k, seed)
    if k == 1:
        bound = idems[0].norm_e
    else:
        es = [x.e for x in idems]
        bound = 0.0
        for s in subsets:
            bound = max(bound, op_norm(sum(es[j] for j in s)))
    return SpectralMeasureTable(n, mu.locations.copy(), idems, bound, plan, data.t, nil)


def similarity_from_measure(table: SpectralMeasureTable, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Metric operator ``A = (Σ e^* e)^{1/2}``; each ``A e A^{-1}`` is self-adjoint.

    Raises
    ------
    DegenerateMeasure
        If ``Σ e^* e`` is numerically singular.
    """
    g = sum(x.e.conj().T @ x.e for x in table.idempotents)
    g = (g + g.conj().T) / 2
    w = np.linalg.eigvalsh(g)
    if w[0] <= tols.rank_rel * max(w[-1], np.finfo(float).tiny):
        raise DegenerateMeasure(f"metric is numerically singular (eigenvalues {w[0]:.3e}..{w[-1]:.3e})")
    return herm_power(g, 0.5, tols=tols)


@dataclass(frozen=True)
class DecompositionResult:
    """``t = s + q`` and ``a t a^{-1} = n_normal + q_prime``.

    ``residuals`` holds absolute values: ``commutator`` ``||[s,q]||``,
    ``normality`` ``||[n,n^*]||``, ``nilpotency`` (largest eigenvalue of
    ``q`` read off the Schur basis of ``t``), ``spectral_radius_q`` (direct
    eigenvalues of ``q``), ``reconstruction`` ``||t - s - q||`` and
    ``similarity`` ``||a t a^{-1} - n - q'||``.
    """

    s: np.ndarray
    q: np.ndarray
    a: np.ndarray | None
    n_normal: np.ndarray | None
    q_prime: np.ndarray | None
    residuals: dict
    cond_a: float | None
    norm_t: float
    table: SpectralMeasureTable = field(repr=False)

    def thresholds(self, rel=1e-7):
        tn = self.norm_t
        out = {
            "commutator": rel * tn**2,
            "nilpotency": rel * tn,
            "spectral_radius_q": rel * tn,
            "reconstruction": rel * tn,
        }
        if self.a is not None:
            out.update({"normality": rel * tn**2, "similarity": rel * tn})
        return out

    def verdicts(self, rel=1e-7):
        return {k: self.residuals[k] <= thr for k, thr in self.thresholds(rel).items()}

    def passed(self, rel=1e-7):
        return all(self.verdicts(rel).values())


def _split(table):
    s = sum(complex(lam) * x.e for lam, x in zip(table.locations, table.idempotents))
    s = np.asarray(s, dtype=complex)
    q = table.t - s
    return s, q


def scalar_nilpotent_split(t, *, tols: ToleranceConfig = DEFAULT_TOLS, table=None):
    """``t = S + Q`` with ``S = Σ λ e(λ)`` and ``Q`` nilpotent, commuting."""
    table = table or build_spectral_measure(t, tols=tols)
    s, q = _split(table)
    res = {
        "commutator": op_norm(s @ q - q @ s),
        "nilpotency": table.nilpotency,
        "spectral_radius_q": float(np.max(np.abs(np.linalg.eigvals(q)))),
        "reconstruction": op_norm(table.t - s - q),
    }
    return DecompositionResult(s, q, None, None, None, res, None, op_norm(table.t), table)


def normal_form(t, *, tols: ToleranceConfig = DEFAULT_TOLS, table=None):
    """``a t a^{-1} = N + Q'`` with ``N = a S a^{-1}`` normal and ``Q' = a Q a^{-1}``."""
    table = table or build_spectral_measure(t, tols=tols)
    split = scalar_nilpotent_split(t, tols=tols, table=table)
    a = similarity_from_measure(table, tols=tols)
    ainv = np.linalg.inv(a)
    nn = a @ split.s @ ainv
    qp = a @ split.q @ ainv
    res = dict(split.residuals)
    res["normality"] = op_norm(nn @ nn.conj().T - nn.conj().T @ nn)
    res["similarity"] = op_norm(a @ table.t @ ainv - nn - qp)
    res["self_adjoint"] = max(
        op_norm(a @ x.e @ ainv - (a @ x.e @ ainv).conj().T) for x in table.idempotents
    )
    cond = float(np.linalg.cond(a))
    return DecompositionResult(split.s, split.q, a, nn, qp, res, cond, split.norm_t, table)


@dataclass(frozen=True)
class SpectralityReport:
    kappa_hat: float
    decomposable: bool
    bound_M: float
    cond_a: float
    atom_angles: list
    atom_angles_ok: bool
    wermer_of_kappa: float
    wermer_relation: bool
    n_regions: int


def spectrality_report(t, family=None, *, tols: ToleranceConfig = DEFAULT_TOLS, seed=0):
    """Angle scan, decomposability, measure bound and metric condition in one report.

    With the default family (all atom subsets) the bound ``bound_M`` is
    attained by the worst region of the scan, so ``bound_M`` equals
    ``f(1 - cos kappa_hat)`` up to rounding; the relation is checked with a
    relative slack of ``1e-8``.
    """
    data = spectral_data(t, tols=tols)
    if family is None:
        family = atom_subset_family(data.measure, seed=seed)
    scan = unza_scan(data.t, family, tols=tols, data=data)
    decomposable = all(
        decomposability_check(data.t, b, tols=tols, data=data).passed for b in family
    )
    table = build_spectral_measure(data.t, tols=tols, seed=seed, data=data)
    nf = normal_form(data.t, tols=tols, table=table)
    angles = []
    for j, x in enumerate(table.idempotents):
        mask = data.measure.labels == j
        s_in, k = reordered_for_mask(data, mask, tols)
        hs_space = Subspace(s_in.u[:, :k].copy())
        rng_e = Subspace.span(x.e, tols=tols)
        angles.append(subspace_distance(hs_space, rng_e))
    f_kappa = wermer_bound(scan.kappa_hat) if scan.kappa_hat > 0 else math.inf
    return SpectralityReport(
        kappa_hat=scan.kappa_hat,
        decomposable=decomposable,
        bound_M=table.bound_M,
        cond_a=nf.cond_a,
        atom_angles=angles,
        atom_angles_ok=all(a < 1e-8 for a in angles),
        wermer_of_kappa=f_kappa,
        wermer_relation=table.bound_M <= f_kappa * (1 + 1e-8),
        n_regions=len(family),
    )


def reordered_for_mask(data, mask, tols):
    return reorder_schur(data.schur, mask, tols=tols), int(np.sum(mask))
