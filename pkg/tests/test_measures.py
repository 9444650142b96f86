import math

import numpy as np
import pytest

from hslab.errors import DegenerateMeasure
from hslab.kernel import op_norm
from hslab.measures import (
    build_spectral_measure,
    normal_form,
    scalar_nilpotent_split,
    similarity_from_measure,
    spectrality_report,
)
from hslab.models import example_diag2, example_tk, example_tk_sum, ginibre
from hslab.spectral import brown_measure

from pool import pool_matrix
from suites import decomposition_suite, measure_suite


def diagonalizable(ev, seed):
    rng = np.random.default_rng(seed)
    n = len(ev)
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return x @ np.diag(ev) @ np.linalg.inv(x), x


class TestMeasure:
    def test_normal_matrix(self):
        q, _ = np.linalg.qr(ginibre(4, 1))
        t = q @ np.diag([1.0, 2.0, 2.0, -1j]) @ q.conj().T
        table = build_spectral_measure(t)
        assert table.bound_M == pytest.approx(1.0)
        for x in table.idempotents:
            assert op_norm(x.e - x.e.conj().T) < 1e-12

    def test_diag2_block_growth(self):
        norms = []
        for n in (2, 8, 32):
            t = np.array([[0.0, 1.0], [0.0, 1.0 / n]])
            table = build_spectral_measure(t)
            j0 = int(np.argmin(np.abs(table.locations)))
            # closed form: e({0}) = [[1, -n], [0, 0]]
            assert np.allclose(table.idempotents[j0].e, [[1, -n], [0, 0]])
            norms.append(table.idempotents[j0].norm_e)
        assert norms[0] < norms[1] < norms[2]
        assert norms[2] == pytest.approx(math.sqrt(1 + 32**2))

    def test_eigenvector_oracle(self):
        ev = np.array([1.0, 1.0, -0.5j, 2.0, 2.0, 0.3])
        t, x = diagonalizable(ev, 3)
        table = build_spectral_measure(t)
        xi = np.linalg.inv(x)
        for j, lam in enumerate(table.locations):
            sel = np.isclose(ev, lam, atol=1e-6).astype(float)
            ref = x @ np.diag(sel) @ xi
            assert op_norm(table.idempotents[j].e - ref) < 1e-7 * op_norm(ref)

    def test_table_residuals(self):
        t, _ = pool_matrix(7)
        res = build_spectral_measure(t).residuals()
        assert max(res.values()) < 1e-8

    def test_sampled_plan(self):
        t = np.diag(np.arange(14.0))
        table = build_spectral_measure(t, seed=5)
        assert table.plan["mode"] == "sampled" and table.plan["seed"] == 5
        assert table.bound_M == pytest.approx(1.0)

    @pytest.mark.parametrize("index", range(1, 200, 29))
    def test_measure_suite_sample(self, index):
        t, _ = pool_matrix(index)
        assert measure_suite(t, index) == []


class TestSimilarity:
    def test_normal_gives_identity(self):
        table = build_spectral_measure(np.diag([1.0, 2.0, 3.0]))
        assert np.allclose(similarity_from_measure(table), np.eye(3))

    def test_two_by_two_hand(self):
        t = np.array([[0.0, 1.0], [0.0, 1.0]])  # idempotents [[1,-1],[0,0]] and [[0,1],[0,1]]
        table = build_spectral_measure(t)
        e = np.array([[1.0, 1.0], [0.0, 0.0]])
        f = np.eye(2) - e
        g = e.T @ e + f.T @ f
        w, v = np.linalg.eigh(g)
        ref = v @ np.diag(np.sqrt(w)) @ v.T
        # the table uses e({0}) = [[1,-1],[0,0]]; both Gram sums agree up to a sign flip
        flip = np.diag([1.0, -1.0])
        assert np.allclose(similarity_from_measure(table), flip @ ref @ flip)

    def test_degenerate(self):
        from hslab.angles import ObliqueIdempotent
        from hslab.kernel import Subspace
        from hslab.measures import SpectralMeasureTable

        z = np.zeros((2, 2), dtype=complex)
        x = ObliqueIdempotent(z, Subspace.zero(2), Subspace.full(2), 0.0)
        table = SpectralMeasureTable(2, np.array([0j]), [x], 0.0, {}, z)
        with pytest.raises(DegenerateMeasure):
            similarity_from_measure(table)


class TestSplit:
    def test_jordan(self):
        j = np.diag([1.0, 1.0], 1)
        r = scalar_nilpotent_split(j)
        assert np.allclose(r.s, 0) and np.allclose(r.q, j)

    def test_normal(self):
        r = scalar_nilpotent_split(np.diag([1.0, 2.0]))
        assert np.allclose(r.s, np.diag([1.0, 2.0])) and np.allclose(r.q, 0)

    @pytest.mark.parametrize("k", [2, 5, 12])
    def test_tk(self, k):
        r = scalar_nilpotent_split(example_tk(k))
        assert r.passed()
        mu = brown_measure(r.s)
        assert np.allclose(mu.locations, [-1, 0]) and list(mu.counts) == [k - 1, 1]
        # Jordan-form oracle: s has kernel span(1,...,1) and s + 1 has range span(1,...,1)
        ones = np.ones(k)
        assert np.linalg.norm(r.s @ ones) < 1e-10
        assert np.linalg.norm(np.linalg.matrix_power(r.q, k)) < 1e-10

    def test_brown_measure_transfer(self):
        t, _ = pool_matrix(11)
        r = scalar_nilpotent_split(t)
        assert brown_measure(r.s).same_atoms(brown_measure(t), 1e-6)


class TestNormalForm:
    def test_normal(self):
        t = np.diag([1.0, 2.0j])
        nf = normal_form(t)
        assert np.allclose(nf.a, np.eye(2)) and np.allclose(nf.n_normal, t) and np.allclose(nf.q_prime, 0)

    def test_diag2_block_five(self):
        t = np.array([[0.0, 1.0], [0.0, 0.2]])
        nf = normal_form(t)
        assert np.allclose(np.sort_complex(np.linalg.eigvals(nf.n_normal)), [0, 0.2])
        assert nf.residuals["normality"] < 1e-8
        e_norm = build_spectral_measure(t).bound_M
        assert e_norm / 2 < nf.cond_a < 4 * e_norm

    def test_random(self):
        t = ginibre(8, 2)
        nf = normal_form(t)
        assert nf.residuals["similarity"] < 1e-7 * op_norm(t)
        assert nf.passed()

    @pytest.mark.parametrize("index", range(3, 200, 31))
    def test_pool_sample(self, index):
        t, _ = pool_matrix(index)
        fails, _ = decomposition_suite(t)
        assert fails == []


class TestSpectrality:
    def test_normal(self):
        rep = spectrality_report(np.diag([1.0, 2.0, 3.0]))
        assert rep.kappa_hat == pytest.approx(math.pi / 2)
        assert rep.bound_M == pytest.approx(1.0) and rep.cond_a == pytest.approx(1.0)
        assert rep.decomposable and rep.atom_angles_ok and rep.wermer_relation

    def test_diag2_trend(self):
        reps = [spectrality_report(example_diag2(n)) for n in (4, 16, 64)]
        assert reps[0].kappa_hat > reps[1].kappa_hat > reps[2].kappa_hat
        assert reps[0].bound_M < reps[1].bound_M < reps[2].bound_M
        assert all(r.wermer_relation and r.atom_angles_ok for r in reps)

    def test_tk_trend(self):
        reps = [spectrality_report(example_tk_sum(k, 2)) for k in (4, 8, 16)]
        assert reps[0].kappa_hat > reps[1].kappa_hat > reps[2].kappa_hat
        assert reps[0].bound_M < reps[1].bound_M < reps[2].bound_M
        assert all(r.wermer_relation for r in reps)
