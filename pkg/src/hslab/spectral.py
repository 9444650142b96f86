"""Spectra, Brown measures and the power-limit operator of a matrix.

For a matrix the Brown measure is the normalized eigenvalue counting
measure.  Eigenvalues produced by the QR algorithm split multiple
eigenvalues, so nearby eigenvalues are merged into atoms with the
single-linkage rule ``|z - w| <= cluster_tol``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .errors import BoundaryAmbiguity, DomainError
from .kernel import SchurForm, as_cmatrix, op_norm, schur
from .regions import Region
from .tolerances import DEFAULT_TOLS, ToleranceConfig

__all__ = [
    "BrownMeasure",
    "SpectralData",
    "brown_measure",
    "spectral_data",
    "cluster_eigenvalues",
    "region_mass",
    "spectral_radius",
    "is_quasinilpotent",
    "PowerLimit",
    "power_limit",
    "DecomposabilityReport",
    "decomposability_check",
]


def cluster_eigenvalues(eigs, tol):
    """Merge eigenvalues into atoms by single linkage at distance ``tol``.

    Returns
    -------
    centers : ndarray of complex
        Atom locations (cluster means), sorted by real then imaginary part.
    labels : ndarray of int
        Atom index of every input eigenvalue.
    """
    eigs = np.asarray(eigs, dtype=complex)
    if eigs.size == 0:
        return eigs.copy(), np.zeros(0, dtype=int)
    if eigs.size == 1:
        raw = np.zeros(1, dtype=int)
    else:
        pts = np.column_stack([eigs.real, eigs.imag])
        raw = fcluster(linkage(pts, method="single"), t=tol, criterion="distance") - 1
    n_atoms = raw.max() + 1
    centers = np.array([eigs[raw == a].mean() for a in range(n_atoms)])
    order = np.lexsort((centers.imag, centers.real))
    relabel = np.empty(n_atoms, dtype=int)
    relabel[order] = np.arange(n_atoms)
    return centers[order], relabel[raw]


@dataclass(frozen=True)
class BrownMeasure:
    """Atomic probability measure ``sum_j w_j delta(z_j)`` on the plane.

    Attributes
    ----------
    locations : ndarray of complex
        Atom locations.
    counts : ndarray of int
        Algebraic multiplicities; ``weights = counts / n``.
    n : int
        Dimension of the source matrix.
    labels : ndarray of int
        Atom index of each eigenvalue, aligned with the Schur diagonal the
        measure was built from.
    """

    locations: np.ndarray
    counts: np.ndarray
    n: int
    labels: np.ndarray = field(repr=False, default=None)

    @property
    def weights(self):
        return self.counts / self.n

    @property
    def atoms(self):
        return [(complex(z), float(c) / self.n) for z, c in zip(self.locations, self.counts)]

    def __len__(self):
        return len(self.locations)

    def integrate_log(self, lam):
        """``∫ log|z - lam| dμ(z)``."""
        return float(np.sum(self.weights * np.log(np.abs(self.locations - lam))))

    def mask(self, region: Region):
        """Boolean mask over atoms: atom location lies in ``region``."""
        return np.array([region.contains(complex(z)) for z in self.locations], dtype=bool)

    def eigen_mask(self, region: Region):
        """Boolean mask over eigenvalues (via their atoms)."""
        return self.mask(region)[self.labels]

    def same_atoms(self, other, tol):
        """True if both measures have matching atoms and weights."""
        if len(self) != len(other) or self.n != other.n:
            return False
        used = np.zeros(len(other), dtype=bool)
        for z, c in zip(self.locations, self.counts):
            d = np.abs(other.locations - z)
            d[used] = np.inf
            j = int(np.argmin(d))
            if d[j] > tol or other.counts[j] != c:
                return False
            used[j] = True
        return True


@dataclass(frozen=True)
class SpectralData:
    """Schur form of a matrix together with its clustered Brown measure."""

    t: np.ndarray
    schur: SchurForm
    measure: BrownMeasure
    norm: float
    cluster_tol: float


def spectral_data(t, *, tols: ToleranceConfig = DEFAULT_TOLS):
    t = as_cmatrix(t)
    s = schur(t, tols=tols)
    norm = op_norm(t)
    ctol = tols.cluster_tol(norm)
    centers, labels = cluster_eigenvalues(np.diag(s.r), ctol)
    counts = np.bincount(labels, minlength=len(centers))
    mu = BrownMeasure(centers, counts, t.shape[0], labels)
    return SpectralData(t, s, mu, norm, ctol)


def brown_measure(t, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Normalized eigenvalue counting measure of ``t`` with clustered atoms."""
    return spectral_data(t, tols=tols).measure


def region_mass(mu: BrownMeasure, b: Region):
    """Exact mass ``μ(b)`` as a :class:`fractions.Fraction`.

    Raises
    ------
    BoundaryAmbiguity
        If an atom cannot be classified (point-set capture band).
    """
    total = 0
    for z, c in zip(mu.locations, mu.counts):
        z = complex(z)
        if b.ambiguous(z):
            raise BoundaryAmbiguity(f"atom {z!r} is ambiguous for region {b.expr()}")
        if b.contains(z):
            total += int(c)
    return Fraction(total, mu.n)


def spectral_radius(t, *, tols: ToleranceConfig = DEFAULT_TOLS):
    s = schur(t, tols=tols)
    return float(np.max(np.abs(np.diag(s.r))))


def is_quasinilpotent(t, tol=1e-8, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Matrix-scale quasinilpotency: every eigenvalue within ``tol`` of 0."""
    return spectral_radius(t, tols=tols) <= tol


@dataclass(frozen=True)
class PowerLimit:
    """``A_n = |t^n|^{1/n}`` with the bookkeeping of the scaled power.

    Attributes
    ----------
    matrix : ndarray
        ``A_n`` (Hermitian positive semidefinite).
    n : int
    log_scale : float
        ``t^n = exp(log_scale) * M`` with ``||M||_op = 1``.
    rescaled : bool
        True when the unscaled power would leave the floating-point range.
    """

    matrix: np.ndarray
    n: int
    log_scale: float
    rescaled: bool

    @property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def _scaled_power(t, n):
    """``t^n`` as ``(M, L)`` with ``t^n = e^L M``, by repeated squaring."""
    size = t.shape[0]
    result, log_r = np.eye(size, dtype=complex), 0.0
    base, log_b = t.copy(), 0.0
    k = n
    while True:
        if k & 1:
            result = result @ base
            log_r += log_b
            nr = op_norm(result)
            if nr == 0.0:
                return result, -math.inf
            result /= nr
            log_r += math.log(nr)
        k >>= 1
        if not k:
            break
        base = base @ base
        log_b *= 2
        nb = op_norm(base)
        if nb == 0.0:
            return np.zeros_like(t), -math.inf
        base /= nb
        log_b += math.log(nb)
    return result, log_r


def power_limit(t, n, *, tols: ToleranceConfig = DEFAULT_TOLS):
    """Approximant ``A_n = |t^n|^{1/n}`` of the power-limit operator.

    ``t^n`` is formed by repeated squaring, normalizing after every product,
    so large ``n`` never overflows.  The root is taken on the singular
    values of the normalized power: with ``t^n = e^L U diag(s) V^*``,
    ``A_n = e^{L/n} V diag(s^{1/n}) V^*``.
    """
    t = as_cmatrix(t)
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    n = int(n)
    m, log_scale = _scaled_power(t, n)
    size = t.shape[0]
    if log_scale == -math.inf:
        return PowerLimit(np.zeros((size, size), dtype=complex), n, log_scale, False)
    _, sv, vh = np.linalg.svd(m)
    roots = np.exp(log_scale / n) * sv ** (1.0 / n)
    a = (vh.conj().T * roots) @ vh
    a = (a + a.conj().T) / 2
    big = math.log(np.finfo(float).max) / 2
    return PowerLimit(a, n, log_scale, abs(log_scale) > big)


@dataclass(frozen=True)
class DecomposabilityReport:
    region: str
    passed: bool
    range_spectrum: np.ndarray
    complement_spectrum: np.ndarray
    range_ok: bool
    complement_ok: bool
    tol: float
    max_violation: float


def _closure_violation(region, zs, tol):
    worst = 0.0
    for z in zs:
        z = complex(z)
        if region.contains(z):
            continue
        worst = max(worst, region.boundary_distance(z))
    return worst


def decomposability_check(t, b: Region, *, tols: ToleranceConfig = DEFAULT_TOLS, data=None):
    """Check that both HS compressions of ``t`` have spectra in ``closure(b)``.

    The compression to ``P(t,b)`` is the leading Schur block after moving the
    ``b`` atoms forward; the compression to the orthogonal complement of
    ``P(t, b^c)`` is the trailing block after moving the ``b^c`` atoms forward.
    """
    from .hs import reordered_for

    data = data or spectral_data(t, tols=tols)
    tol = data.cluster_tol
    s_in, k_in = reordered_for(data, b, tols=tols)
    s_out, k_out = reordered_for(data, b.complement(), tols=tols)
    range_spec = np.diag(s_in.r)[:k_in].copy()
    comp_spec = np.diag(s_out.r)[k_out:].copy()
    v1 = _closure_violation(b, range_spec, tol)
    v2 = _closure_violation(b, comp_spec, tol)
    return DecomposabilityReport(
        region=b.expr(),
        passed=v1 <= tol and v2 <= tol,
        range_spectrum=range_spec,
        complement_spectrum=comp_spec,
        range_ok=v1 <= tol,
        complement_ok=v2 <= tol,
        tol=tol,
        max_violation=max(v1, v2),
    )
