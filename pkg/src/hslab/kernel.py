"""Dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` complex arrays; :func:`as_cmatrix` validates
them.  Subspaces carry an orthonormal basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, IterationLimit, SwapFailure
from .tolerances import DEFAULT_TOLS, ToleranceConfig

__all__ = [
    "as_cmatrix",
    "op_norm",
    "tr2_norm",
    "SchurForm",
    "schur",
    "reorder_schur",
    "herm_power",
    "abs_op",
    "Subspace",
    "subspace_sum",
    "subspace_intersect",
    "subspace_distance",
    "contains",
]


def as_cmatrix(m):
    """Return ``m`` as a square complex ``ndarray`` with finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DomainError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return a


def op_norm(m):
    """Operator norm (largest singular value)."""
    a = np.asarray(m, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def tr2_norm(m):
    """Normalized Hilbert-Schmidt norm ``sqrt(Tr(m* m) / n)``."""
    a = np.asarray(m, dtype=complex)
    return float(np.sqrt(np.vdot(a, a).real / a.shape[0]))


@dataclass(frozen=True)
class SchurForm:
    """Unitary triangularization ``t = u @ r @ u^*``."""

    u: np.ndarray
    r: np.ndarray
    tol_unitary: float
    tol_residual: float

    @property
    def n(self):
        return self.r.shape[0]

    @property
    def eigenvalues(self):
        return np.diag(self.r).copy()

    def reconstruct(self):
        return self.u @ self.r @ self.u.conj().T

    def check(self, t):
        """Assert the factorization invariants against the source ``t``."""
        n = self.n
        unit = op_norm(self.u.conj().T @ self.u - np.eye(n))
        lower = float(np.max(np.abs(np.tril(self.r, -1)), initial=0.0))
        resid = op_norm(self.reconstruct() - t)
        ok = (
            unit <= self.tol_unitary
            and lower <= self.tol_residual
            and resid <= self.tol_residual * max(op_norm(t), np.finfo(float).tiny)
        )
        return ok, {"unitary": unit, "lower": lower, "residual": resid}


def schur(m, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Complex Schur form via Hessenberg reduction and shifted QR.

    Backed by LAPACK (``zgehrd`` + ``zhseqr`` through ``scipy.linalg.schur``).
    Triangular input is returned unchanged, which keeps the structured
    examples exact.
    """
    t = as_cmatrix(m)
    n = t.shape[0]
    if not np.any(np.tril(t, -1)):
        r, u = t.copy(), np.eye(n, dtype=complex)
    else:
        try:
            r, u = sla.schur(t, output="complex")
        except np.linalg.LinAlgError as exc:
            raise IterationLimit(str(exc)) from exc
        r = np.triu(r)
    tol_res = tols.schur_residual * (1.0 + op_norm(t)) * n
    return SchurForm(u=u, r=r, tol_unitary=tols.unitary * n, tol_residual=tol_res)


def _swap(r, u, i, tols):
    """Exchange diagonal entries i and i+1 by a Givens similarity, in place."""
    a, c, b = r[i, i], r[i + 1, i + 1], r[i, i + 1]
    sep = abs(a - c)
    if sep <= tols.swap_sep * max(1.0, abs(a), abs(c)):
        raise SwapFailure(i, sep)
    # eigenvector of the 2x2 block for eigenvalue c
    x = np.array([b, c - a])
    x /= np.linalg.norm(x)
    g = np.array([[x[0], -np.conj(x[1])], [x[1], np.conj(x[0])]])
    r[:, i:i + 2] = r[:, i:i + 2] @ g
    r[i:i + 2, :] = g.conj().T @ r[i:i + 2, :]
    u[:, i:i + 2] = u[:, i:i + 2] @ g
    r[i + 1, i] = 0.0
    r[i, i], r[i + 1, i + 1] = c, a


def reorder_schur(s: SchurForm, select, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Move the selected eigenvalues to the leading diagonal block.

    Parameters
    ----------
    s : SchurForm
        Input factorization (not modified).
    select : Region, callable or boolean array
        Either a predicate on eigenvalues (a :class:`~hslab.regions.Region`
        or any callable) or a mask aligned with ``diag(s.r)``.

    Returns
    -------
    SchurForm
        New factorization whose first ``k`` diagonal entries are the selected
        ones, in their original relative order.

    Raises
    ------
    SwapFailure
        If a selected and an unselected eigenvalue are too close to swap.
    """
    diag = np.diag(s.r)
    if callable(select) or hasattr(select, "contains"):
        pred = select.contains if hasattr(select, "contains") else select
        mask = np.array([bool(pred(z)) for z in diag], dtype=bool)
    else:
        mask = np.asarray(select, dtype=bool).copy()
        if mask.shape != diag.shape:
            raise DomainError("selection mask does not match the Schur form size")
    r = s.r.copy()
    u = s.u.copy()
    k = 0
    for j in range(len(mask)):
        if not mask[j]:
            continue
        for i in range(j - 1, k - 1, -1):
            _swap(r, u, i, tols)
            mask[i], mask[i + 1] = mask[i + 1], mask[i]
        k += 1
    return SchurForm(u=u, r=r, tol_unitary=s.tol_unitary, tol_residual=s.tol_residual)


def _check_hermitian(h, tols):
    h = np.asarray(h, dtype=complex)
    scale = max(op_norm(h), np.finfo(float).tiny)
    if op_norm(h - h.conj().T) > tols.hermitian * scale:
        raise DomainError("matrix is not Hermitian within tolerance")
    return h, scale


def herm_power(h, p, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Positive power ``h**p`` of a Hermitian positive semidefinite matrix."""
    if not p > 0:
        raise DomainError("exponent must be positive")
    h, scale = _check_hermitian(h, tols)
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    if w.min(initial=0.0) < -tols.hermitian * scale:
        raise DomainError("matrix is not positive semidefinite within tolerance")
    w = np.clip(w, 0.0, None) ** p
    return (v * w) @ v.conj().T


def abs_op(m):
    """``|m| = (m^* m)^{1/2}`` assembled from the SVD of ``m``."""
    a = np.asarray(m, dtype=complex)
    _, sv, vh = np.linalg.svd(a)
    return (vh.conj().T * sv) @ vh


@dataclass(frozen=True, eq=False)
class Subspace:
    """Closed subspace of ``C^n`` given by an orthonormal basis (``n x k``)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2:
            raise DomainError("basis must be a 2-D array")
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    k = dim

    def projector(self):
        return self.basis @ self.basis.conj().T

    def is_zero(self):
        return self.dim == 0

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n):
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def span(cls, vectors, *, tols: ToleranceConfig = DEFAULT_TOLS):
        """Orthonormalize the columns of ``vectors`` with the shared rank rule."""
        a = np.asarray(vectors, dtype=complex)
        if a.ndim == 1:
            a = a[:, None]
        if a.shape[1] == 0:
            return cls.zero(a.shape[0])
        uu, sv, _ = np.linalg.svd(a, full_matrices=False)
        rank = _rank(sv, tols)
        return cls(uu[:, :rank])

    def orthogonal_complement(self):
        n = self.ambient_dim
        if self.dim == 0:
            return Subspace.full(n)
        uu, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(uu[:, self.dim:])

    def check(self, tol=1e-10):
        gram = self.basis.conj().T @ self.basis
        return op_norm(gram - np.eye(self.dim)) <= tol


def _rank(sv, tols):
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > tols.rank_rel * sv[0]))


def _same_ambient(v, w):
    if v.ambient_dim != w.ambient_dim:
        raise DomainError(
            f"subspaces live in different spaces ({v.ambient_dim} vs {w.ambient_dim})"
        )


def subspace_sum(v: Subspace, w: Subspace, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Orthonormal basis of ``V + W``."""
    _same_ambient(v, w)
    return Subspace.span(np.hstack([v.basis, w.basis]), tols=tols)


def subspace_intersect(v: Subspace, w: Subspace, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Orthonormal basis of ``V ∩ W``.

    Vectors ``(x, y)`` in the numerical null space of ``[V, -W]`` give common
    vectors ``V x = W y``.  The rank rule is the one used by
    :func:`subspace_sum`, so ``dim(V+W) + dim(V∩W) = dim V + dim W`` exactly.
    """
    _same_ambient(v, w)
    n = v.ambient_dim
    if v.dim == 0 or w.dim == 0:
        return Subspace.zero(n)
    stacked = np.hstack([v.basis, -w.basis])
    _, sv, vh = np.linalg.svd(stacked, full_matrices=True)
    rank = _rank(sv, tols)
    null = vh[rank:].conj().T
    if null.shape[1] == 0:
        return Subspace.zero(n)
    common = v.basis @ null[: v.dim] + w.basis @ null[v.dim:]
    uu, _, _ = np.linalg.svd(common, full_matrices=False)
    return Subspace(uu[:, : null.shape[1]])


def subspace_distance(v: Subspace, w: Subspace):
    """Largest principal angle between ``V`` and ``W`` (π/2 if dimensions differ).

    Zero exactly when the subspaces coincide; used for every
    "same subspace" comparison in the package.
    """
    _same_ambient(v, w)
    if v.dim != w.dim:
        return float(np.pi / 2)
    if v.dim == 0 or v.dim == v.ambient_dim:
        return 0.0
    # sine of the largest angle = ||(I - P_V) W||
    resid = w.basis - v.basis @ (v.basis.conj().T @ w.basis)
    s = min(1.0, op_norm(resid))
    return float(np.arcsin(s))


def contains(big: Subspace, small: Subspace):
    """Sine of the largest angle between ``small`` and its projection on ``big``.

    Zero when ``small ⊆ big``.
    """
    _same_ambient(big, small)
    if small.dim == 0:
        return 0.0
    resid = small.basis - big.basis @ (big.basis.conj().T @ small.basis)
    return float(min(1.0, op_norm(resid)))
