"""Deterministic examples and seeded random-matrix models.

Random models use ``numpy.random.Generator`` (PCG64).  Per-trial streams
come from ``SeedSequence(master, spawn_key=(trial,))`` so results do not
depend on the order in which trials run.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainError
from .kernel import as_cmatrix, tr2_norm
from .regions import Annulus

__all__ = [
    "example_tk",
    "example_tk_sum",
    "example_diag2",
    "rng_for",
    "trial_rng",
    "ginibre",
    "uniform_annulus_sampler",
    "make_sampler",
    "dt_sample",
    "circular_free_poisson",
    "free_poisson_pdf",
    "free_poisson_cdf",
    "rdiag_norm_check",
    "ModelConfig",
    "Thm52Config",
    "Thm52Report",
    "zeta_series",
    "thm52_experiment",
    "annulus_partition",
    "delta_sequence_planner",
    "verify_plan",
    "thread_count",
]


# ----------------------------------------------------------- deterministic


def example_tk(k):
    """``k x k`` matrix with diagonal ``(-1, ..., -1, 0)`` and ones above it."""
    k = int(k)
    if k < 1:
        raise DomainError("k must be positive")
    t = np.diag(np.r_[-np.ones(k - 1), 0.0]).astype(complex)
    t += np.diag(np.ones(k - 1), 1)
    return t


def example_tk_sum(k_max, k_min=1):
    """Block diagonal ``T_{k_min} ⊕ ... ⊕ T_{k_max}`` (``T_1 = [0]``)."""
    blocks = [example_tk(k) for k in range(int(k_min), int(k_max) + 1)]
    return _block_diag(blocks)


def example_diag2(n_blocks):
    """Block diagonal sum of ``[[0, 1], [0, 1/n]]`` for ``n = 1..n_blocks``."""
    n_blocks = int(n_blocks)
    if n_blocks < 1:
        raise DomainError("n_blocks must be positive")
    blocks = [np.array([[0.0, 1.0], [0.0, 1.0 / n]], dtype=complex) for n in range(1, n_blocks + 1)]
    return _block_diag(blocks)


def _block_diag(blocks):
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


# ----------------------------------------------------------- random models


def rng_for(seed):
    """Generator from an int, a ``SeedSequence`` or an existing ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_rng(master_seed, trial):
    """Independent stream for one trial of a master seed."""
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(trial),)))


def thread_count():
    """Worker cap from ``HSLAB_THREADS`` (default 1)."""
    raw = os.environ.get("HSLAB_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"HSLAB_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)


def _complex_gaussian(rng, shape, var):
    scale = math.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def ginibre(n, seed=None):
    """``n x n`` matrix of i.i.d. complex Gaussians with variance ``1/n``."""
    rng = rng_for(seed)
    return _complex_gaussian(rng, (n, n), 1.0 / n)


def uniform_annulus_sampler(r, s):
    """Sampler of the uniform law on ``{r <= |z| <= s}`` (``|z|^2`` is uniform)."""
    if not 0 <= r <= s:
        raise DomainError("need 0 <= r <= s")

    def sample(rng, size):
        rad = np.sqrt(rng.uniform(r * r, s * s, size))
        phase = rng.uniform(0.0, 2.0 * np.pi, size)
        return rad * np.exp(1j * phase)

    sample.spec = {"law": "uniform_annulus", "r": float(r), "s": float(s)}
    return sample


def make_sampler(spec):
    """Build a diagonal-law sampler from a descriptor dictionary.

    Supported laws: ``uniform_annulus`` (``r``, ``s``), ``uniform_disk``
    (``radius``), ``point`` (``z`` as ``[re, im]`` or real), ``atoms``
    (``points`` as ``[[re, im], ...]`` and ``weights``).
    """
    if callable(spec):
        return spec
    law = spec.get("law")
    if law == "uniform_annulus":
        return uniform_annulus_sampler(float(spec["r"]), float(spec["s"]))
    if law == "uniform_disk":
        return uniform_annulus_sampler(0.0, float(spec["radius"]))
    if law == "point":
        z = spec.get("z", 0.0)
        z = complex(*z) if isinstance(z, (list, tuple)) else complex(z)

        def sample(rng, size):
            return np.full(size, z, dtype=complex)

        sample.spec = dict(spec)
        return sample
    if law == "atoms":
        pts = np.array([complex(*p) if isinstance(p, (list, tuple)) else complex(p) for p in spec["points"]])
        w = np.asarray(spec.get("weights", np.ones(len(pts))), dtype=float)
        w = w / w.sum()

        def sample(rng, size):
            return pts[rng.choice(len(pts), size=size, p=w)]

        sample.spec = dict(spec)
        return sample
    raise ConfigError(f"unknown diagonal law {law!r}")


def dt_sample(mu_sampler, c, n, seed=None):
    """Upper triangular ``D + c·G``: i.i.d. diagonal from ``mu_sampler`` and
    strictly upper Gaussian entries of variance ``1/n`` scaled by ``c``.

    The diagonal is drawn first, then the Gaussian part, from one stream.
    """
    if c < 0:
        raise DomainError("c must be nonnegative")
    rng = rng_for(seed)
    sampler = make_sampler(mu_sampler)
    d = np.asarray(sampler(rng, n), dtype=complex)
    g = _complex_gaussian(rng, (n, n), 1.0 / n)
    z = np.triu(g, 1) * c
    z[np.diag_indices(n)] = d
    return z


def circular_free_poisson(c, n, seed=None):
    """DT model with uniform diagonal on ``{sqrt(c-1) <= |z| <= sqrt(c)}``."""
    if c < 1:
        raise DomainError("circular free Poisson needs c >= 1")
    return dt_sample(uniform_annulus_sampler(math.sqrt(c - 1.0), math.sqrt(c)), 1.0, n, seed)


def _fp_edges(c):
    return (math.sqrt(c) - 1.0) ** 2, (math.sqrt(c) + 1.0) ** 2


def free_poisson_pdf(t, c):
    """Density ``sqrt((b-t)(t-a)) / (2πt)`` on ``[a, b]`` (``c >= 1``)."""
    a, b = _fp_edges(c)
    t = np.asarray(t, dtype=float)
    inside = (t > a) & (t < b)
    out = np.zeros_like(t)
    ti = t[inside]
    out[inside] = np.sqrt((b - ti) * (ti - a)) / (2 * np.pi * ti)
    return out


def free_poisson_cdf(x, c):
    """Distribution function of the free Poisson law of rate ``c >= 1``."""
    if c < 1:
        raise DomainError("free Poisson CDF implemented for c >= 1")
    a, b = _fp_edges(c)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        if xi <= a:
            out[i] = 0.0
        elif xi >= b:
            out[i] = 1.0
        else:
            val, _ = integrate.quad(lambda s: float(free_poisson_pdf(s, c)), a, xi, limit=200)
            out[i] = min(1.0, max(0.0, val))
    return out


def rdiag_norm_check(z, k_max):
    """Relative gaps ``|‖z^k‖₂ - ‖z‖₂^k| / ‖z‖₂^k`` for ``k = 1..k_max``."""
    z = as_cmatrix(z)
    base = tr2_norm(z)
    rows = []
    p = np.eye(z.shape[0], dtype=complex)
    for k in range(1, int(k_max) + 1):
        p = p @ z
        ref = base**k
        rows.append((k, abs(tr2_norm(p) - ref) / ref))
    return rows


@dataclass(frozen=True)
class ModelConfig:
    """Sampling recipe for one of the supported models."""

    kind: str
    dim: int = 64
    c: float = 1.0
    mu_spec: dict = field(default_factory=dict)
    seed: int = 0
    trials: int = 1

    KINDS = ("example_tk", "example_diag2", "ginibre", "dt", "circular_free_poisson", "thm52_block")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if int(self.dim) < 1:
            raise ConfigError("dim must be positive")
        if self.kind == "circular_free_poisson" and self.c < 1:
            raise ConfigError("circular free Poisson needs c >= 1")
        if int(self.trials) < 1:
            raise ConfigError("trials must be positive")

    def sample(self, trial=0):
        if self.kind == "example_tk":
            return example_tk(self.dim)
        if self.kind == "example_diag2":
            return example_diag2(self.dim)
        rng = trial_rng(self.seed, trial)
        if self.kind == "ginibre":
            return ginibre(self.dim, rng)
        if self.kind == "dt":
            return dt_sample(self.mu_spec or {"law": "point", "z": 0.0}, self.c, self.dim, rng)
        if self.kind == "circular_free_poisson":
            return circular_free_poisson(self.c, self.dim, rng)
        raise ConfigError("thm52_block samples are produced by thm52_experiment")


# ------------------------------------------------------------ block experiment


def _check_chain(n_partition, delta1, delta2):
    inv = Fraction(1, int(n_partition)) if isinstance(delta1, Fraction) else 1.0 / n_partition
    if not (inv < delta2 < delta1 < 1 - inv):
        raise DomainError(
            f"need 1/N < delta2 < delta1 < 1 - 1/N, got N={n_partition}, "
            f"delta1={delta1}, delta2={delta2}"
        )


@dataclass(frozen=True)
class Thm52Config:
    """Parameters of the two-block ζ experiment.

    ``series_len`` of ``None`` picks the truncation adaptively per trial.
    """

    c: float = 2.0
    n_partition: int = 10
    delta1: float = 0.5
    delta2: float = 0.4
    matrix_dim: int = 256
    series_len: int | None = None
    seed: int = 0
    trials: int = 20
    tail_target: float = 0.02
    singular_floor: float = 1e-8

    def __post_init__(self):
        if self.c < 1:
            raise ConfigError("c must be at least 1")
        if int(self.n_partition) <= 2:
            raise ConfigError("n_partition must exceed 2")
        try:
            _check_chain(self.n_partition, self.delta1, self.delta2)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        if int(self.matrix_dim) < 32:
            raise ConfigError("matrix_dim must be at least 32")
        if self.series_len is not None and int(self.series_len) < 1:
            raise ConfigError("series_len must be positive")
        if int(self.trials) < 1:
            raise ConfigError("trials must be positive")

    @property
    def predictions(self):
        c, n = float(self.c), self.n_partition
        d1, d2 = float(self.delta1), float(self.delta2)
        zeta_sq = 1.0 / (n * (d1 - d2))
        return {
            "a1_sq": c - d1,
            "a2inv_sq": 1.0 / (c - d2),
            "zeta_sq": zeta_sq,
            "cos_theta": math.sqrt(zeta_sq / (1.0 + zeta_sq)),
        }

    def to_dict(self):
        out = {}
        for k, v in self.__dict__.items():
            out[k] = str(v) if isinstance(v, Fraction) else v
        return out


@dataclass(frozen=True)
class Thm52Report:
    """Monte Carlo estimates of the ζ experiment with per-trial values."""

    config: Thm52Config
    est_a1_sq: float
    est_a2inv_sq: float
    est_zeta_sq: float
    est_cos_theta: float
    predictions: dict
    per_trial: dict
    discarded: int
    witness_x: tuple = field(repr=False, default=None)
    witness_y: tuple = field(repr=False, default=None)

    def rows(self):
        """One dictionary per kept trial, in trial order."""
        keys = list(self.per_trial)
        return [dict(zip(keys, vals)) for vals in zip(*(self.per_trial[k] for k in keys))]


def _hs_inner(x, y):
    """Normalized Hilbert-Schmidt inner product ``tr(y^* x)/m`` summed over a tuple."""
    return sum(np.vdot(b, a) for a, b in zip(x, y)) / x[0].shape[0]


def zeta_series(a1, b, a2_inv, k_terms):
    """``Σ_{k<K} a1^k (b a2^{-1}) a2^{-k}`` by binary doubling of partial sums.

    Uses ``S_{p+q} = S_p + A^p S_q B^p`` with ``A = a1/γ`` and ``B = γ a2^{-1}``,
    ``γ`` balancing the spectral radii so powers stay in range.  The value
    does not depend on ``γ``.
    """
    k_terms = int(k_terms)
    if k_terms < 1:
        raise DomainError("need at least one term")
    rho_a = float(np.max(np.abs(np.linalg.eigvals(a1))))
    rho_b = float(np.max(np.abs(np.linalg.eigvals(a2_inv))))
    gamma = math.sqrt(rho_a / rho_b) if rho_a > 0 and rho_b > 0 else 1.0
    A = a1 / gamma
    B = a2_inv * gamma
    x0 = b @ a2_inv
    # partial sum of length 1 and its powers
    s_blk, a_blk, b_blk = x0.copy(), A.copy(), B.copy()
    total, a_acc, b_acc = None, None, None
    k = k_terms
    while True:
        if k & 1:
            if total is None:
                total, a_acc, b_acc = s_blk.copy(), a_blk.copy(), b_blk.copy()
            else:
                total = total + a_acc @ s_blk @ b_acc
                a_acc = a_acc @ a_blk
                b_acc = b_blk @ b_acc
        k >>= 1
        if not k:
            break
        s_blk = s_blk + a_blk @ s_blk @ b_blk
        a_blk = a_blk @ a_blk
        b_blk = b_blk @ b_blk
    return total


def _choose_terms(q, target):
    if not 0 < q < 1:
        return None
    return max(1, math.ceil(math.log(target / (1.0 + target)) / math.log(q)))


def _thm52_trial(cfg, trial):
    m = int(cfg.matrix_dim)
    n = int(cfg.n_partition)
    c, d1, d2 = float(cfg.c), float(cfg.delta1), float(cfg.delta2)
    rng = trial_rng(cfg.seed, trial)
    a1 = circular_free_poisson(n * (c - d1), m, rng) / math.sqrt(n)
    a2 = circular_free_poisson(n * (c - d2) + 1.0, m, rng) / math.sqrt(n)
    b = ginibre(m, rng) / math.sqrt(n)
    smin = float(np.linalg.svd(a2, compute_uv=False)[-1])
    if smin < cfg.singular_floor:
        return None
    a2_inv = np.linalg.inv(a2)
    a1_sq = tr2_norm(a1) ** 2
    a2inv_sq = tr2_norm(a2_inv) ** 2
    q = a1_sq * a2inv_sq
    q_source = "norm_ratio"
    if not q < 1:
        q = float(np.max(np.abs(np.linalg.eigvals(a1)))) * float(np.max(np.abs(np.linalg.eigvals(a2_inv))))
        q = q * q
        q_source = "spectral_ratio"
    if cfg.series_len is not None:
        k_terms = int(cfg.series_len)
    else:
        k_terms = _choose_terms(q, cfg.tail_target)
        if k_terms is None:
            return None
    zeta = zeta_series(a1, b, a2_inv, k_terms)
    qk = q**k_terms if q < 1 else math.inf
    tail = qk / (1.0 - qk) if qk < 1 else math.inf
    zeta_sq = tr2_norm(zeta) ** 2
    ident = np.eye(m, dtype=complex)
    x = (zeta, ident)
    y = (zeta, np.zeros_like(zeta))
    nx = math.sqrt(_hs_inner(x, x).real)
    ny = math.sqrt(_hs_inner(y, y).real)
    cos = abs(_hs_inner(x, y)) / (nx * ny)
    return {
        "trial": trial,
        "a1_sq": a1_sq,
        "a2inv_sq": a2inv_sq,
        "zeta_sq": zeta_sq,
        "cos_theta": float(cos),
        "ratio_q": q,
        "ratio_source": q_source,
        "series_len": k_terms,
        "tail_bound": tail,
        "tail_certified": tail <= 0.05,
        "a2_smin": smin,
        "_x": x,
        "_y": y,
    }


def thm52_experiment(cfg: Thm52Config, *, threads=None, keep_witness=True):
    """Monte Carlo reproduction of the two-block ζ construction.

    Each trial samples independent ``a1``, ``a2``, ``b`` (independence as the
    finite-size proxy for freeness), sums the ζ series up to an adaptive
    length and measures ``cos θ`` between ``x = (ζ, 1)`` and ``y = (ζ, 0)``
    in the normalized Hilbert-Schmidt inner product.
    """
    workers = threads or thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: _thm52_trial(cfg, i), range(cfg.trials)))
    else:
        results = [_thm52_trial(cfg, i) for i in range(cfg.trials)]
    kept = [r for r in results if r is not None]
    discarded = len(results) - len(kept)
    if not kept:
        raise DomainError("every trial was discarded")
    keys = [k for k in kept[0] if not k.startswith("_")]
    per_trial = {k: [r[k] for r in kept] for k in keys}
    wx = kept[0]["_x"] if keep_witness else None
    wy = kept[0]["_y"] if keep_witness else None
    return Thm52Report(
        config=cfg,
        est_a1_sq=float(np.mean(per_trial["a1_sq"])),
        est_a2inv_sq=float(np.mean(per_trial["a2inv_sq"])),
        est_zeta_sq=float(np.mean(per_trial["zeta_sq"])),
        est_cos_theta=float(np.mean(per_trial["cos_theta"])),
        predictions=cfg.predictions,
        per_trial=per_trial,
        discarded=discarded,
        witness_x=wx,
        witness_y=wy,
    )


# ------------------------------------------------------------ partitions, planner


def _squared_radii(c, n_partition, delta1, delta2):
    inv = Fraction(1, int(n_partition))
    c = Fraction(c) if isinstance(delta1, Fraction) else c
    if not isinstance(delta1, Fraction):
        inv = 1.0 / n_partition
    return (c - delta1 - inv, c - delta1), (c - delta2, c - delta2 + inv)


def annulus_partition(c, n_partition, delta1, delta2):
    """Closed annuli ``E1`` (inner) and ``E2`` (outer) of squared widths ``1/N``.

    ``E1 = {c-δ1-1/N <= |z|^2 <= c-δ1}``, ``E2 = {c-δ2 <= |z|^2 <= c-δ2+1/N}``.
    """
    _check_chain(n_partition, delta1, delta2)
    (l1, h1), (l2, h2) = _squared_radii(c, n_partition, delta1, delta2)
    if l1 < 0:
        raise DomainError("inner annulus has negative squared radius")
    e1 = Annulus(math.sqrt(float(l1)), math.sqrt(float(h1)))
    e2 = Annulus(math.sqrt(float(l2)), math.sqrt(float(h2)))
    return e1, e2


def verify_plan(plan, c=1):
    """Check every inequality of a δ-sequence exactly; returns a list of failures."""
    bad = []
    c = Fraction(c)
    intervals = []
    for idx, (n, d1, d2) in enumerate(plan, start=1):
        inv = Fraction(1, n)
        if not (inv < d2 < d1 < 1 - inv):
            bad.append(f"step {idx}: chain 1/N < d2 < d1 < 1 - 1/N fails")
        val = n * (d1 - d2)
        if idx >= 2 and not val < Fraction(1, idx - 1):
            bad.append(f"step {idx}: N(d1 - d2) = {val} is not below 1/{idx - 1}")
        if idx >= 2:
            pn, _, pd2 = plan[idx - 2]
            if not n > pn:
                bad.append(f"step {idx}: N does not increase")
            if not d1 < pd2 - Fraction(1, pn) - inv:
                bad.append(f"step {idx}: d1 is not below d2(prev) - 1/N(prev) - 1/N")
            if not val < pn * (plan[idx - 2][1] - pd2):
                bad.append(f"step {idx}: N(d1 - d2) does not decrease")
        (l1, h1), (l2, h2) = _squared_radii(c, n, d1, d2)
        intervals += [(l1, h1), (l2, h2)]
    intervals.sort()
    for (a0, b0), (a1, b1) in zip(intervals, intervals[1:]):
        if not b0 < a1:
            bad.append(f"annuli [{a0}, {b0}] and [{a1}, {b1}] intersect")
    return bad


def _extend(plan_head, caps):
    out = list(plan_head)
    for n_next in caps:
        n, d1, d2 = out[-1]
        target = n * (d1 - d2) / 2
        width = target / n_next
        hi = d2 - Fraction(1, n) - Fraction(1, n_next)
        d1n = hi - width / 8
        d2n = d1n - width
        if not d2n > Fraction(1, n_next):
            return None
        out.append((n_next, d1n, d2n))
    return out


def delta_sequence_planner(c=1, k_steps=3):
    """Sequence ``(N_k, δ1^(k), δ2^(k))`` in exact rationals.

    Starts at ``(3, 5/9, 4/9)``.  Each step halves ``N(δ1 - δ2)`` and places
    the new pair just below ``δ2 - 1/N_k - 1/N_{k+1}`` so every annulus lies
    inside the previous ones.  The ``N_k`` are the smallest consecutive
    integers (ending at a common cap) for which all inequalities hold, which
    keeps the Monte Carlo parameters as moderate as possible.

    Raises
    ------
    RuntimeError
        If the resulting plan violates an inequality (a bug, never expected).
    """
    k_steps = int(k_steps)
    if k_steps < 1:
        raise DomainError("k_steps must be positive")
    head = [(3, Fraction(5, 9), Fraction(4, 9))]
    if k_steps == 1:
        plan = head
    else:
        plan = None
        cap = 3 + (k_steps - 1)
        while plan is None:
            caps = [cap - (k_steps - j) for j in range(2, k_steps + 1)]
            if caps[0] > 3:
                plan = _extend(head, caps)
            cap += 1
            if cap > 10**7:
                raise RuntimeError("planner failed to find a feasible sequence")
    bad = verify_plan(plan, c)
    if bad:
        raise RuntimeError("planner produced an invalid sequence: " + "; ".join(bad))
    return plan
