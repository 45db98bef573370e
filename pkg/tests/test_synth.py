import numpy as np

from kerndiv.seeding import substream
from kerndiv.synth import featsel_dataset, gaussian_sampler, gaussian_scenarios


class TestGaussianSampler:
    def test_shape_and_moments(self):
        gen = gaussian_sampler(2.0, 4.0, dim=3)
        x = gen(substream(5, 0), 20_000)
        assert x.shape == (20_000, 3)
        assert abs(x.mean() - 2.0) < 0.05
        assert abs(x.var() - 4.0) < 0.15

    def test_vector_mean(self):
        gen = gaussian_sampler([0.0, 1.0], 1.0)
        x = gen(substream(5, 0), 5000)
        assert gen.dim == 2
        assert abs(x[:, 1].mean() - x[:, 0].mean() - 1.0) < 0.1

    def test_deterministic(self):
        gen = gaussian_sampler(0.0, 1.5, dim=4)
        a = gen(substream(9, 1), 10)
        b = gen(substream(9, 1), 10)
        assert np.array_equal(a, b)


class TestScenarios:
    def test_keys_and_dims(self):
        sc = gaussian_scenarios()
        assert set(sc) == {"variance", "mean"}
        for p, q in sc.values():
            assert p.dim == 25 and q.dim == 25
        assert sc["variance"][1].describe["var"] == 1.7
        assert sc["mean"][1].describe["mean"][0] == 0.1


class TestFeatselDataset:
    def test_shape_and_labels(self):
        data = featsel_dataset(n_per_class=50, dim=40, seed=3)
        assert data.n == 100
        assert data.dim == 40
        assert (data.group == "P").sum() == 50

    def test_decoy_structure(self):
        data = featsel_dataset(n_per_class=200, dim=30, seed=4)
        p_rows, q_rows = data.split()
        # Decoy feature: class-signed clusters plus a common central mass.
        assert p_rows[:, 0].max() > 4.0
        assert q_rows[:, 0].min() < -4.0
        central = np.abs(p_rows[:, 0]) < 2.0
        assert 0.15 < central.mean() < 0.45
        # Decoys share the central rows (redundancy is per-row, not per-feature).
        central_other = np.abs(p_rows[:, 1]) < 2.0
        assert np.array_equal(central, central_other)

    def test_strong_features_shifted(self):
        data = featsel_dataset(n_per_class=200, dim=30, seed=4)
        p_rows, q_rows = data.split()
        gap = q_rows[:, 5:10].mean() - p_rows[:, 5:10].mean()
        assert abs(gap - 2.8) < 0.2
        noise_gap = q_rows[:, 10:].mean() - p_rows[:, 10:].mean()
        assert abs(noise_gap) < 0.1

    def test_deterministic(self):
        a = featsel_dataset(n_per_class=20, dim=15, seed=8)
        b = featsel_dataset(n_per_class=20, dim=15, seed=8)
        assert np.array_equal(a.data, b.data)
