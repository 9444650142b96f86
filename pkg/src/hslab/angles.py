"""Angles between subspaces, oblique idempotents and angle scans over regions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SumNotDirect
from .hs import hs_algebraic
from .kernel import Subspace, as_cmatrix, op_norm
from .regions import PointSet, Region
from .spectral import BrownMeasure, spectral_data
from .tolerances import DEFAULT_TOLS, ToleranceConfig

__all__ = [
    "AngleReport",
    "principal_angle",
    "ObliqueIdempotent",
    "oblique_idempotent",
    "wermer_bound",
    "wermer_eps",
    "UnzaReport",
    "unza_scan",
    "atom_subset_family",
    "disjoint_closed_angle",
]


@dataclass(frozen=True)
class AngleReport:
    """Smallest principal angle between two subspaces.

    ``cos_alpha`` is the largest singular value of ``V^* W``; the witnesses
    are unit vectors ``v ∈ V``, ``w ∈ W`` with ``|<v, w>| = cos_alpha``.
    """

    alpha: float
    cos_alpha: float
    witness_v: np.ndarray
    witness_w: np.ndarray


def _canonical_first(v, w):
    kv = (v.dim, v.basis.tobytes())
    kw = (w.dim, w.basis.tobytes())
    return kv <= kw


def principal_angle(v: Subspace, w: Subspace, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """``α(V, W) = inf arccos |<v, w>|`` over unit ``v ∈ V``, ``w ∈ W``.

    The angle is evaluated as ``atan2(sin, cos)`` with the sine measured as
    the distance from the witness ``v`` to ``W``, which keeps small angles
    accurate.  The pair is put in a canonical order first so the result is
    exactly symmetric.
    """
    if v.ambient_dim != w.ambient_dim:
        raise DomainError("subspaces live in different spaces")
    if v.dim == 0 or w.dim == 0:
        raise DomainError("principal angle is undefined for the zero subspace")
    if not _canonical_first(v, w):
        rep = principal_angle(w, v, tols=tols)
        return AngleReport(rep.alpha, rep.cos_alpha, rep.witness_w, rep.witness_v)
    m = v.basis.conj().T @ w.basis
    uu, sv, vh = np.linalg.svd(m)
    c = float(min(1.0, sv[0]))
    wv = v.basis @ uu[:, 0]
    ww = w.basis @ vh[0].conj()
    if c <= tols.angle_zero:
        return AngleReport(math.pi / 2, c, wv, ww)
    s = float(np.linalg.norm(wv - w.basis @ (w.basis.conj().T @ wv)))
    return AngleReport(math.atan2(s, c), c, wv, ww)


@dataclass(frozen=True)
class ObliqueIdempotent:
    """Idempotent ``e`` with range ``V`` and kernel ``W``."""

    e: np.ndarray
    range_space: Subspace
    kernel_space: Subspace
    norm_e: float

    def residuals(self):
        e = self.e
        idem = op_norm(e @ e - e)
        on_range = op_norm(e @ self.range_space.basis - self.range_space.basis)
        on_kernel = op_norm(e @ self.kernel_space.basis)
        return {"idempotent": idem, "range": on_range, "kernel": on_kernel}

    def check(self, tol=1e-9):
        r = self.residuals()
        scale = max(1.0, self.norm_e)
        return (
            r["idempotent"] <= tol * (1 + self.norm_e**2)
            and r["range"] <= tol * scale
            and r["kernel"] <= tol * scale
        )


def oblique_idempotent(v: Subspace, w: Subspace, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Idempotent with range ``V`` and kernel ``W`` for a direct sum ``V ⊕ W``.

    Built as ``[V W] diag(I, 0) [V W]^{-1}``.

    Raises
    ------
    SumNotDirect
        If ``[V W]`` is rank deficient; carries the intersection dimension.
    """
    n = v.ambient_dim
    if w.ambient_dim != n:
        raise DomainError("subspaces live in different spaces")
    b = np.hstack([v.basis, w.basis])
    if b.shape[1] != n:
        raise SumNotDirect(
            max(0, b.shape[1] - n),
            f"dimensions {v.dim} + {w.dim} do not add up to {n}",
        )
    sv = np.linalg.svd(b, compute_uv=False)
    rank = int(np.sum(sv > tols.rank_rel * sv[0])) if n else 0
    if rank < n:
        raise SumNotDirect(n - rank)
    binv = np.linalg.solve(b, np.eye(n, dtype=complex))
    e = v.basis @ binv[: v.dim]
    return ObliqueIdempotent(e, v, w, op_norm(e))


def wermer_bound(alpha):
    """``f(ε) = 1/sqrt(ε(2-ε))`` with ``ε = 1 - cos(alpha)``.

    Upper bound for the norm of the idempotent along two subspaces at
    angle ``alpha``.  ``ε`` is evaluated as ``2 sin²(alpha/2)``.
    """
    alpha = float(alpha)
    if not 0 < alpha <= math.pi / 2 + 1e-15:
        raise DomainError("wermer_bound needs 0 < alpha <= pi/2")
    eps = 2.0 * math.sin(alpha / 2) ** 2
    return 1.0 / math.sqrt(eps * (2.0 - eps))


def wermer_eps(m):
    """Inverse of the bound: the ``ε`` in ``(0, 1]`` with ``f(ε) = m`` (``m >= 1``)."""
    if m < 1:
        raise DomainError("idempotent norms are at least 1")
    x = 1.0 / (m * m)
    # 1 - sqrt(1 - x), written to avoid cancellation
    return x / (1.0 + math.sqrt(1.0 - x))


@dataclass(frozen=True)
class UnzaReport:
    """Angles between ``P(t,B)`` and ``P(t,B^c)`` over a family of regions.

    ``kappa_hat`` is the minimum angle; with no scannable region it is
    ``π/2`` (the empty infimum clipped to the largest possible angle).
    """

    family: list
    per_region: list
    skipped: list
    kappa_hat: float
    nza_flag: bool
    argmin: Region | None
    witness_v: np.ndarray | None
    witness_w: np.ndarray | None


def unza_scan(t, family, *, tols: ToleranceConfig = DEFAULT_TOLS, data=None):
    """Scan ``α(P(t,B), P(t,B^c))`` over ``family``.

    Regions for which either projection is zero are skipped and listed.
    Results are sorted by region key, so the reduction does not depend on
    the order of ``family``.
    """
    data = data or spectral_data(t, tols=tols)
    rows, skipped = [], []
    for b in sorted(family, key=lambda r: r.key()):
        p = hs_algebraic(data.t, b, tols=tols, data=data)
        q = hs_algebraic(data.t, b.complement(), tols=tols, data=data)
        if p.dim == 0 or q.dim == 0:
            skipped.append(b)
            continue
        rows.append((b, principal_angle(p.space, q.space, tols=tols)))
    if rows:
        b_min, rep = min(rows, key=lambda x: x[1].alpha)
        kappa = rep.alpha
        wv, ww = rep.witness_v, rep.witness_w
    else:
        b_min, kappa, wv, ww = None, math.pi / 2, None, None
    per_region = [(b, rep.alpha) for b, rep in rows]
    nza = all(a > tols.angle_zero for _, a in per_region)
    return UnzaReport(list(family), per_region, skipped, kappa, nza, b_min, wv, ww)


def _atom_match_tol(locs):
    if len(locs) < 2:
        return 1e-7
    d = np.abs(locs[:, None] - locs[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(min(1e-7, 0.25 * d.min()))


def atom_subset_family(mu: BrownMeasure, max_exhaustive=12, n_random=64, seed=0):
    """Point-set regions built from subsets of the atoms of ``mu``.

    With at most ``max_exhaustive`` atoms every proper nonempty subset is
    returned (``2^k - 2`` regions, complements included).  Otherwise all
    singletons plus ``n_random`` distinct seeded random subsets.
    """
    locs = np.asarray(mu.locations, dtype=complex)
    k = len(locs)
    if k < 2:
        return []
    tol = _atom_match_tol(locs)
    if k <= max_exhaustive:
        subsets = [
            s for size in range(1, k) for s in itertools.combinations(range(k), size)
        ]
    else:
        rng = np.random.default_rng(seed)
        seen = set()
        subsets = []
        for i in range(k):
            seen.add((i,))
            subsets.append((i,))
        attempts = 0
        target = k + n_random
        while len(subsets) < target and attempts < 100 * max(1, n_random):
            attempts += 1
            pick = tuple(np.flatnonzero(rng.random(k) < 0.5).tolist())
            if 0 < len(pick) < k and pick not in seen:
                seen.add(pick)
                subsets.append(pick)
    return [PointSet(tuple(locs[list(s)]), tol) for s in subsets]


def disjoint_closed_angle(t, f1: Region, f2: Region, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """``α(P(t,F1), P(t,F2))`` for regions sharing no atom of ``t``."""
    data = spectral_data(t, tols=tols)
    m1 = data.measure.mask(f1)
    m2 = data.measure.mask(f2)
    if np.any(m1 & m2):
        raise DomainError("regions share an atom of the spectrum")
    p1 = hs_algebraic(data.t, f1, tols=tols, data=data)
    p2 = hs_algebraic(data.t, f2, tols=tols, data=data)
    return principal_angle(p1.space, p2.space, tols=tols)
