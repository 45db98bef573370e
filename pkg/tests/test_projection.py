import json

import numpy as np
import pytest

from conftest import pooled_gram, toy_gram, two_cluster_data
from kerndiv.errors import DegenerateDataError
from kerndiv.projection import (
    ProjectionWeights,
    fit_fisher,
    fit_svm,
    make_weights,
    means_weights,
    project_means,
    project_with_weights,
)


def mmd_double_sum(g, n1, n2):
    k = g.values
    kpp = k[:n1, :n1].sum() / n1**2
    kqq = k[n1:, n1:].sum() / n2**2
    kpq = k[:n1, n1:].sum() / (n1 * n2)
    return kpp - 2.0 * kpq + kqq


class TestProjectMeans:
    def test_two_singleton_groups(self):
        # T = sqrt(2 - 2c) = 1 at c = 0.5; xp = ((1-c)/T, -(1-c)/T)
        xp = project_means(toy_gram(0.5), 1, 1)
        np.testing.assert_allclose(xp.xp, [0.5, -0.5], atol=1e-15)
        np.testing.assert_array_equal(xp.group, ["P", "Q"])

    def test_duplicated_sample_errors(self, rng):
        data = rng.normal(size=(10, 2))
        g = pooled_gram(np.vstack([data, data]))
        with pytest.raises(DegenerateDataError, match="indistinguishable"):
            project_means(g, 10, 10)

    def test_mean_gap_equals_embedding_gap(self, rng):
        for _ in range(5):
            data, n1, n2 = two_cluster_data(rng, n1=17, n2=23, shift=0.5)
            g = pooled_gram(data)
            xp = project_means(g, n1, n2)
            t = np.sqrt(mmd_double_sum(g, n1, n2))
            gap = xp.xp[:n1].mean() - xp.xp[n1:].mean()
            assert gap == pytest.approx(t, rel=1e-12)

    def test_unbalanced_groups(self, rng):
        data, n1, n2 = two_cluster_data(rng, n1=5, n2=50, shift=1.0)
        xp = project_means(pooled_gram(data), n1, n2)
        assert len(xp.xp) == 55
        assert np.isfinite(xp.xp).all()


class TestProjectWithWeights:
    def test_single_atom_direction(self, rng):
        data, n1, n2 = two_cluster_data(rng, n1=6, n2=6)
        g = pooled_gram(data)
        w = ProjectionWeights(
            alphas=np.array([1.0]), reference_indices=np.array([3]), norm=1.0, method="means"
        )
        xp = project_with_weights(g, w, n1, n2)
        np.testing.assert_allclose(xp.xp, g.values[:, 3], atol=0)

    def test_alpha_rescaling_invariance(self, rng):
        data, n1, n2 = two_cluster_data(rng, n1=12, n2=9)
        g = pooled_gram(data)
        alphas = rng.normal(size=8)
        idx = np.arange(8)
        w1 = make_weights(g, alphas, idx, "fisher")
        w2 = make_weights(g, 10.0 * alphas, idx, "fisher")
        xp1 = project_with_weights(g, w1, n1, n2)
        xp2 = project_with_weights(g, w2, n1, n2)
        np.testing.assert_allclose(xp1.xp, xp2.xp, atol=1e-12)

    def test_matches_project_means_with_canonical_weights(self, rng):
        for _ in range(5):
            data, n1, n2 = two_cluster_data(rng, n1=14, n2=19, shift=0.8)
            g = pooled_gram(data)
            w = means_weights(g, n1, n2)
            direct = project_means(g, n1, n2)
            via = project_with_weights(g, w, n1, n2)
            np.testing.assert_allclose(via.xp, direct.xp, atol=1e-10)

    def test_out_of_range_index(self, rng):
        data, n1, n2 = two_cluster_data(rng, n1=4, n2=4)
        g = pooled_gram(data)
        w = ProjectionWeights(
            alphas=np.array([1.0]), reference_indices=np.array([99]), norm=1.0, method="means"
        )
        with pytest.raises(ValueError):
            project_with_weights(g, w, n1, n2)

    def test_norm_consistency_invariant(self, rng):
        data, _, _ = two_cluster_data(rng, n1=10, n2=10)
        g = pooled_gram(data)
        alphas = rng.normal(size=20)
        w = make_weights(g, alphas, np.arange(20), "fisher")
        quad = alphas @ g.values @ alphas
        assert w.norm**2 == pytest.approx(quad, rel=1e-8)


class TestFitFisher:
    def test_separated_clusters_positive_gap(self, rng):
        data, n1, n2 = two_cluster_data(rng, shift=1.5)
        g = pooled_gram(data)
        w = fit_fisher(g, n1, n2)
        xp = project_with_weights(g, w, n1, n2)
        assert xp.xp[:n1].mean() - xp.xp[n1:].mean() > 0.1

    def test_beats_random_directions(self, rng):
        data, n1, n2 = two_cluster_data(rng, n1=25, n2=25, shift=0.6)
        g = pooled_gram(data)
        w = fit_fisher(g, n1, n2)
        xp = project_with_weights(g, w, n1, n2)

        def ratio(v):
            p, q = v[:n1], v[n1:]
            return (p.mean() - q.mean()) ** 2 / (p.var() + q.var())

        fitted = ratio(xp.xp)
        for _ in range(100):
            a = rng.normal(size=g.n)
            v = project_with_weights(g, make_weights(g, a, np.arange(g.n), "fisher"), n1, n2)
            assert fitted >= ratio(v.xp) - 1e-12

    def test_no_class_structure_degenerates_or_gives_tiny_gap(self, rng):
        # Q is an exact copy of P: either the fit reports a degenerate
        # direction or the projected group means coincide.
        data = rng.normal(size=(15, 3))
        pooled = np.vstack([data, data])
        g = pooled_gram(pooled)
        try:
            w = fit_fisher(g, 15, 15)
        except DegenerateDataError:
            return
        xp = project_with_weights(g, w, 15, 15)
        gap = abs(xp.xp[:15].mean() - xp.xp[15:].mean())
        assert gap <= 1e-6

    def test_lambda_zero_singular_error(self, rng):
        data, n1, n2 = two_cluster_data(rng)
        g = pooled_gram(data)
        with pytest.raises(DegenerateDataError, match="positive"):
            fit_fisher(g, n1, n2, lam=0.0)

    def test_orientation_convention(self, rng):
        # swap the groups: fitted direction must still give mu_p >= mu_q
        data, n1, n2 = two_cluster_data(rng, shift=1.0)
        flipped = np.vstack([data[n1:], data[:n1]])
        g = pooled_gram(flipped)
        w = fit_fisher(g, n2, n1)
        xp = project_with_weights(g, w, n2, n1)
        assert xp.xp[:n2].mean() >= xp.xp[n2:].mean()

    def test_norm_positive(self, rng):
        data, n1, n2 = two_cluster_data(rng)
        w = fit_fisher(pooled_gram(data), n1, n2)
        assert w.norm > 0


class TestFitSvm:
    def test_two_point_problem_equal_alphas(self):
        w = fit_svm(toy_gram(0.5), 1, 1, cost=10.0)
        assert len(w.alphas) == 2
        np.testing.assert_allclose(np.abs(w.alphas), [2.0, 2.0], atol=1e-6)
        assert w.alphas[0] > 0 > w.alphas[1]

    def test_kkt_feasibility(self, rng):
        data, n1, n2 = two_cluster_data(rng, n1=30, n2=25, shift=0.4)
        w = fit_svm(pooled_gram(data), n1, n2, cost=1.0)
        raw = np.abs(w.alphas)
        assert np.all(raw > 0), "stored alphas are support vectors only"
        assert np.all(raw <= 1.0 + 1e-12)
        assert abs(w.alphas.sum()) <= 1e-6

    def test_separated_clusters_nonzero_gap(self, rng):
        data, n1, n2 = two_cluster_data(rng, shift=1.5)
        g = pooled_gram(data)
        w = fit_svm(g, n1, n2, cost=1.0)
        xp = project_with_weights(g, w, n1, n2)
        assert xp.xp[:n1].mean() - xp.xp[n1:].mean() > 0.1

    def test_orientation_convention(self, rng):
        data, n1, n2 = two_cluster_data(rng, shift=1.0)
        flipped = np.vstack([data[n1:], data[:n1]])
        g = pooled_gram(flipped)
        w = fit_svm(g, n2, n1, cost=1.0)
        xp = project_with_weights(g, w, n2, n1)
        assert xp.xp[:n2].mean() >= xp.xp[n2:].mean()


class TestSerialization:
    def test_json_round_trip(self, rng):
        data, n1, n2 = two_cluster_data(rng)
        g = pooled_gram(data)
        for w in (fit_fisher(g, n1, n2), fit_svm(g, n1, n2), means_weights(g, n1, n2)):
            blob = json.dumps(w.to_json())
            back = ProjectionWeights.from_json(json.loads(blob))
            assert back.method == w.method
            assert back.norm == w.norm
            np.testing.assert_array_equal(back.alphas, w.alphas)
            np.testing.assert_array_equal(back.reference_indices, w.reference_indices)
            xp1 = project_with_weights(g, w, n1, n2)
            xp2 = project_with_weights(g, back, n1, n2)
            np.testing.assert_array_equal(xp1.xp, xp2.xp)
