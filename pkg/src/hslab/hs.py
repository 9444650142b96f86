"""Haagerup-Schultz invariant subspaces of matrices.

For a matrix ``t`` and a region ``B``, ``P(t, B)`` projects onto the sum of
the generalized eigenspaces whose eigenvalues lie in ``B``.  Two routes are
provided:

* :func:`hs_algebraic` reorders a Schur form so the ``B`` eigenvalues lead,
  and takes the leading Schur vectors.
* :func:`hs_power_limit` takes the spectral subspace of ``|t^n|^{1/n}``
  for eigenvalues in ``[0, r]``.  It never looks at eigenvectors.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, NoSpectralGap
from .kernel import (
    Subspace,
    as_cmatrix,
    contains,
    op_norm,
    reorder_schur,
    subspace_distance,
    subspace_intersect,
    subspace_sum,
)
from .regions import Annulus, Region
from .spectral import SpectralData, spectral_data
from .tolerances import DEFAULT_TOLS, ToleranceConfig

__all__ = [
    "HSProjection",
    "hs_algebraic",
    "hs_power_limit",
    "reordered_for",
    "invariance_residual",
    "GrowthReport",
    "growth_validate",
    "hs_join",
    "hs_meet",
    "SimilarityReport",
    "hs_similarity",
    "hs_joint_product",
    "PushforwardReport",
    "hs_pushforward_check",
]


def _fingerprint(t):
    return hashlib.sha1(np.ascontiguousarray(t).tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class HSProjection:
    """Range of ``P(t, region)`` with its diagnostics.

    Attributes
    ----------
    source_dim : int
    region : Region
    space : Subspace
    method : {"algebraic", "power_limit"}
    trace : Fraction
        ``dim(space) / source_dim``.
    invariance : float
        ``||(I - P) t P||_op``.
    warnings : tuple of str
        Atoms found within the clustering tolerance of the region boundary.
    info : dict
        Route-specific details (iteration count, split margin, ...).
    """

    source_dim: int
    region: Region
    space: Subspace
    method: str
    trace: Fraction
    invariance: float
    source_key: str = ""
    warnings: tuple = ()
    info: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.space.dim

    def projector(self):
        return self.space.projector()


def invariance_residual(t, space: Subspace):
    """``||(I - P) t P||_op`` for the orthogonal projection ``P`` onto ``space``."""
    if space.dim == 0:
        return 0.0
    v = space.basis
    tv = t @ v
    return op_norm(tv - v @ (v.conj().T @ tv))


def reordered_for(data: SpectralData, region: Region, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Schur form with the eigenvalues of ``region``'s atoms in front, and their count."""
    mask = data.measure.eigen_mask(region)
    return reorder_schur(data.schur, mask, tols=tols), int(mask.sum())


def _boundary_warnings(data, region):
    out = []
    for z in data.measure.locations:
        if region.near_boundary(complex(z), data.cluster_tol):
            out.append(f"atom {complex(z)!r} lies within {data.cluster_tol:.1e} of the boundary")
    return tuple(out)


def hs_algebraic(t, b: Region, *, tols: ToleranceConfig = DEFAULT_TOLS, data=None):
    """``P(t, b)`` from the leading Schur vectors after reordering.

    Membership of each eigenvalue is decided on its clustered atom, so a
    split multiple eigenvalue is never torn apart.
    """
    data = data or spectral_data(t, tols=tols)
    s, k = reordered_for(data, b, tols=tols)
    space = Subspace(s.u[:, :k].copy())
    n = data.t.shape[0]
    return HSProjection(
        source_dim=n,
        region=b,
        space=space,
        method="algebraic",
        trace=Fraction(k, n),
        invariance=invariance_residual(data.t, space),
        source_key=_fingerprint(data.t),
        warnings=_boundary_warnings(data, b),
    )


def _graded_iteration(tp, n, seed=0):
    """Orthogonal iteration for ``tp^n`` kept in graded form.

    Returns ``q0, m, c`` with ``tp^n q0 = q_n diag(e^m) c`` for a unitary
    ``q_n`` that is not needed.  Rows of ``c`` have unit norm, so entries of
    the triangular product never overflow or underflow.
    """
    size = tp.shape[0]
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    q0, _ = np.linalg.qr(g)
    q = q0
    m = np.zeros(size)
    c = np.eye(size, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(n):
            q, rr = np.linalg.qr(tp @ q)
            mag = np.abs(rr)
            logs = np.log(mag) + m[None, :]
            m_new = logs.max(axis=1)
            shift = np.where(np.isfinite(m_new), m_new, 0.0)
            phase = np.where(mag > 0, rr / np.where(mag > 0, mag, 1.0), 0.0)
            coef = phase * np.exp(logs - shift[:, None])
            c = coef @ c
            norms = np.linalg.norm(c, axis=1)
            live = norms > 0
            c[live] /= norms[live, None]
            c[~live] = 0.0
            m = np.where(live, shift + np.log(np.where(live, norms, 1.0)), -np.inf)
    return q0, m, c


def hs_power_limit(
    t,
    r,
    n_max=None,
    *,
    tols: ToleranceConfig = DEFAULT_TOLS,
    dynamic_range=25.0,
    seed=0,
):
    """``P(t, r·closed disk)`` as the spectral subspace of ``|t^n|^{1/n}`` on ``[0, r]``.

    Parameters
    ----------
    t : array_like
    r : float
        Positive radius separating the eigenvalue moduli.
    n_max : int, optional
        Power used; defaults to ``tols.power_n``.
    dynamic_range : float
        When the graded row scales of ``(t/r)^n`` span at most this many
        nats, the subspace comes from a plain SVD of the product; otherwise
        the large rows define the expanding subspace and its orthogonal
        complement is returned.

    Raises
    ------
    NoSpectralGap
        If some eigenvalue modulus is within a factor ``exp(gap_min)`` of ``r``.
    """
    t = as_cmatrix(t)
    if not r > 0:
        raise DomainError("radius must be positive")
    n = int(n_max or tols.power_n)
    if n < 1:
        raise DomainError("n_max must be a positive integer")
    size = t.shape[0]
    data = spectral_data(t, tols=tols)
    mods = np.abs(data.measure.locations)
    with np.errstate(divide="ignore"):
        gaps = np.abs(np.log(mods / r))
    if gaps.size and gaps.min() < tols.gap_min:
        raise NoSpectralGap(
            f"eigenvalue modulus within log-gap {gaps.min():.3g} of r={r} (need {tols.gap_min})"
        )
    k_big = int(np.sum(data.measure.counts[mods > r]))
    q0, m, c = _graded_iteration(t / r, n, seed=seed)
    finite = np.isfinite(m)
    order = np.argsort(np.where(finite, -m, np.inf), kind="stable")
    big_rows, small_rows = order[:k_big], order[k_big:]
    span_m = (m[finite].max() - m[finite].min()) if finite.any() else 0.0
    if k_big == 0:
        basis = np.eye(size, dtype=complex)
        route = "trivial"
    elif k_big == size:
        basis = np.zeros((size, 0), dtype=complex)
        route = "trivial"
    elif span_m <= dynamic_range:
        top = m[finite].max()
        scaled = np.exp(np.where(finite, m - top, -np.inf))[:, None] * c
        _, sv, vh = np.linalg.svd(scaled)
        with np.errstate(divide="ignore"):
            logsv = np.log(sv) + top
        small = logsv <= 0.0
        basis = vh[small].conj().T
        route = "svd"
    else:
        big = Subspace.span(c[big_rows].conj().T, tols=tols)
        basis = big.orthogonal_complement().basis
        route = "graded"
    rate_big = m[big_rows].min() / n if k_big else math.inf
    rate_small = m[small_rows].max() / n if k_big < size and finite[small_rows].any() else -math.inf
    space = Subspace(q0 @ basis)
    region = Annulus(0.0, float(r))
    return HSProjection(
        source_dim=size,
        region=region,
        space=space,
        method="power_limit",
        trace=Fraction(space.dim, size),
        invariance=invariance_residual(t, space),
        source_key=_fingerprint(t),
        warnings=_boundary_warnings(data, region),
        info={
            "n_used": n,
            "route": route,
            "split_margin": float(rate_big - rate_small),
            "expected_dim": size - k_big,
        },
    )


@dataclass(frozen=True)
class GrowthReport:
    case: str
    r: float
    n: int
    inside: np.ndarray
    outside: np.ndarray
    inside_ok: bool
    outside_ok: bool
    consistent: bool
    witness_residuals: np.ndarray = None


def _log_growth(t, x, n, proj=None):
    """``log ||t^n x||`` with renormalization; ``proj`` re-projects each step."""
    x = x / np.linalg.norm(x)
    total = 0.0
    for _ in range(n):
        x = t @ x
        if proj is not None:
            x = proj @ x
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return -math.inf
        total += math.log(nx)
        x = x / nx
    return total


def _unit_samples(rng, basis, count):
    k = basis.shape[1]
    if k == 0:
        return []
    g = rng.standard_normal((k, count)) + 1j * rng.standard_normal((k, count))
    vs = basis @ g
    return [v / np.linalg.norm(v) for v in vs.T]


def growth_validate(t, p: HSProjection, samples=8, *, n=None, seed=0, tols=DEFAULT_TOLS):
    """Growth-rate classification of sampled vectors against ``p``.

    Disk case (``p.region = annulus(0, r)``): vectors in the range must have
    ``||t^n x||^{1/n} <= r + growth_slack``; generic vectors must exceed ``r``
    whenever the range is proper.

    Co-disk case (``annulus(r, inf)``): every range vector ``η`` has the
    backward approximants ``η_n = V C^{-n} V^* η`` (``C`` the compression of
    ``t`` to the range) with ``t^n η_n = η``.  Vectors from the complementary
    disk subspace leave a residual ``||(I - VV^*) η||``.
    """
    t = as_cmatrix(t)
    region = p.region
    if not isinstance(region, Annulus) or not (region.r == 0 or math.isinf(region.s)):
        raise DomainError("growth_validate needs annulus(0, r) or annulus(r, inf)")
    rng = np.random.default_rng(seed)
    n = int(n or tols.power_n)
    v = p.space.basis
    size = t.shape[0]
    if region.r == 0:
        r = region.s
        proj = v @ v.conj().T
        inside = np.array([math.exp(_log_growth(t, x, n, proj) / n) for x in _unit_samples(rng, v, samples)])
        if p.space.dim < size:
            full = np.eye(size, dtype=complex)
            outside = np.array([math.exp(_log_growth(t, x, n) / n) for x in _unit_samples(rng, full, samples)])
        else:
            outside = np.zeros(0)
        inside_ok = bool(np.all(inside <= r + tols.growth_slack))
        outside_ok = bool(np.all(outside > r))
        return GrowthReport("disk", r, n, inside, outside, inside_ok, outside_ok, inside_ok and outside_ok)

    r = region.r
    if r <= 0:
        raise DomainError("co-disk radius must be positive")
    n = max(1, min(n, int(600 / max(1e-12, abs(math.log(r)))) if r != 1 else n))
    c = v.conj().T @ t @ v
    cinv = np.linalg.inv(c) if v.shape[1] else c
    comp = hs_algebraic(t, Annulus(0.0, r, closed=False), tols=tols).space.basis

    def witness(eta):
        y = v.conj().T @ eta
        for _ in range(n):
            y = cinv @ y
        eta_n = v @ y
        fwd = eta_n
        for _ in range(n):
            fwd = t @ fwd
        rate = np.linalg.norm(eta_n) ** (1.0 / n) if np.linalg.norm(eta_n) > 0 else 0.0
        return float(np.linalg.norm(fwd - eta)), rate

    ins = [witness(x) for x in _unit_samples(rng, v, samples)]
    outs = [witness(x) for x in _unit_samples(rng, comp, samples)]
    inside = np.array([w[1] for w in ins])
    outside = np.array([w[0] for w in outs])
    resid = np.array([w[0] for w in ins])
    inside_ok = bool(np.all(resid <= 1e-6) and np.all(inside <= 1.0 / r + tols.growth_slack))
    outside_ok = bool(np.all(outside > 1e-6))
    return GrowthReport("codisk", r, n, inside, outside, inside_ok, outside_ok, inside_ok and outside_ok, resid)


def _check_same_source(ps):
    if not ps:
        raise DomainError("need at least one projection")
    keys = {p.source_key for p in ps}
    if len(keys) > 1:
        raise DomainError("projections come from different source matrices")


def hs_join(ps, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Span of the ranges of several HS projections of one matrix."""
    _check_same_source(ps)
    out = ps[0].space
    for p in ps[1:]:
        out = subspace_sum(out, p.space, tols=tols)
    return out


def hs_meet(ps, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Intersection of the ranges of several HS projections of one matrix."""
    _check_same_source(ps)
    out = ps[0].space
    for p in ps[1:]:
        out = subspace_intersect(out, p.space, tols=tols)
    return out


@dataclass(frozen=True)
class SimilarityReport:
    angle: float
    cond: float
    threshold: float
    passed: bool
    dim: int


def hs_similarity(t, a, b: Region, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Compare ``P(a t a^{-1}, b)`` with ``a · P(t, b)``."""
    t = as_cmatrix(t)
    a = as_cmatrix(a)
    if a.shape != t.shape:
        raise DomainError("similarity must match the matrix size")
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond * np.finfo(float).eps > 1e-2:
        raise DomainError(f"similarity is numerically singular (cond {cond:.3e})")
    ta = a @ np.linalg.solve(a.T, t.T).T
    left = hs_algebraic(ta, b, tols=tols).space
    right = Subspace.span(a @ hs_algebraic(t, b, tols=tols).space.basis, tols=tols)
    angle = subspace_distance(left, right)
    thr = 1e-6 * cond
    return SimilarityReport(angle, cond, thr, angle < thr, left.dim)


def _commute_check(s, t, tols):
    res = op_norm(s @ t - t @ s)
    if res > tols.commute * max(op_norm(s) * op_norm(t), np.finfo(float).tiny):
        raise DomainError(f"matrices do not commute (||st - ts|| = {res:.3e})")
    return res


def hs_joint_product(s, t, b1: Region, b2: Region, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """``P((s,t): b1 × b2) = P(s, b1) ∧ P(t, b2)`` for commuting ``s, t``."""
    s = as_cmatrix(s)
    t = as_cmatrix(t)
    _commute_check(s, t, tols)
    return subspace_intersect(
        hs_algebraic(s, b1, tols=tols).space, hs_algebraic(t, b2, tols=tols).space, tols=tols
    )


@dataclass(frozen=True)
class PushforwardReport:
    angle: float
    dim: int
    commutator: float
    passed: bool


def hs_pushforward_check(s, q, b: Region, *, tols: ToleranceConfig = DEFAULT_TOLS, threshold=1e-6):
    """Check ``P(s + q, b) = P(s, b)`` for ``q`` nilpotent and commuting with ``s``."""
    s = as_cmatrix(s)
    q = as_cmatrix(q)
    comm = _commute_check(s, q, tols)
    size = q.shape[0]
    qn = np.linalg.matrix_power(q / max(op_norm(q), 1.0), size)
    if op_norm(qn) > 1e-8:
        raise DomainError("q is not nilpotent within tolerance")
    left = hs_algebraic(s + q, b, tols=tols).space
    right = hs_algebraic(s, b, tols=tols).space
    angle = subspace_distance(left, right)
    return PushforwardReport(angle, right.dim, comm, angle < threshold)


def is_contained(small: Subspace, big: Subspace, tol=1e-7):
    """``small ⊆ big`` up to sine-of-angle ``tol``."""
    return contains(big, small) <= tol
