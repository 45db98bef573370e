import numpy as np
import pytest

from kerndiv.kernel import GramMatrix, KernelSpec, SampleSet, gram_matrix, median_heuristic


@pytest.fixture
def rng():
    return np.random.default_rng(777)


def pooled_gram(data, family="gaussian", bandwidth=None):
    """Gram matrix over pooled rows; median-heuristic bandwidth by default."""
    s = SampleSet(np.asarray(data, dtype=float))
    if bandwidth is None:
        bandwidth = median_heuristic(s)
    return gram_matrix(KernelSpec(family, bandwidth), s)


def two_cluster_data(rng, n1=40, n2=40, d=3, shift=2.0):
    """Well-separated Gaussian clusters; returns (pooled array, n1, n2)."""
    p = rng.normal(0.0, 1.0, (n1, d)) + shift
    q = rng.normal(0.0, 1.0, (n2, d)) - shift
    return np.vstack([p, q]), n1, n2


def toy_gram(c=0.5):
    """2x2 Gaussian-kernel gram with cross value c (one sample per group)."""
    values = np.array([[1.0, c], [c, 1.0]])
    return GramMatrix(values=values, spec=KernelSpec("gaussian", 1.0))
