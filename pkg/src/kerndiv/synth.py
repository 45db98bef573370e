"""Seeded synthetic data generators for experiments and benchmarks.

Samplers are callables (rng, n) -> (n, d) array so the experiment
harnesses control all randomness through their own substreams.
"""

import numpy as np

from .kernel import SampleSet
from .seeding import DEFAULT_SEED, substream

TABLE_DIM = 25
TABLE_N_PER_GROUP = 250


class GaussianSampler:
    """Isotropic Gaussian N(mean, var * I) sampler.

    A plain class rather than a closure so instances survive pickling,
    which the process-parallel experiment runner relies on.
    """

    def __init__(self, mean_vec, var):
        self._mean = np.asarray(mean_vec, dtype=np.float64)
        self._std = float(np.sqrt(var))
        self.dim = self._mean.size
        self.describe = {"family": "gaussian", "mean": [float(m) for m in self._mean],
                         "var": float(var)}

    def __call__(self, rng, n):
        return rng.normal(self._mean, self._std, size=(int(n), self.dim))


def gaussian_sampler(mean, var=1.0, dim=None) -> GaussianSampler:
    """Build a GaussianSampler from a scalar (repeated over `dim`
    coordinates) or vector mean; `var` is the shared per-coordinate
    variance."""
    if np.isscalar(mean):
        if dim is None:
            raise ValueError("dim is required when mean is a scalar")
        mean_vec = np.full(int(dim), float(mean))
    else:
        mean_vec = np.asarray(mean, dtype=np.float64)
        if dim is not None and dim != mean_vec.size:
            raise ValueError("dim disagrees with mean vector length")
    if var <= 0:
        raise ValueError("var must be positive")
    return GaussianSampler(mean_vec, var)


def gaussian_scenarios(dim=TABLE_DIM):
    """The two Gaussian pairs of the type-II experiments.

    "variance": pure scale difference, per-coordinate variance 1.5
                vs 1.7 with equal means.
    "mean":     pure location shift, means 0 vs 0.1 per coordinate
                with shared per-coordinate variance 1.5.

    Reading the scale parameters as standard deviations instead makes
    the variance pair separable to the point that every measure's
    type-II error collapses to ~0 at the packaged sample sizes, which
    defeats the comparison the experiment exists for.
    """
    return {
        "variance": (gaussian_sampler(0.0, 1.5, dim), gaussian_sampler(0.0, 1.7, dim)),
        "mean": (gaussian_sampler(0.0, 1.5, dim), gaussian_sampler(0.1, 1.5, dim)),
    }


def featsel_dataset(
    n_per_class=150,
    dim=100,
    decoys=5,
    strong=5,
    shift=2.8,
    central_fraction=0.3,
    cluster_center=5.0,
    cluster_std=0.3,
    seed=DEFAULT_SEED,
) -> SampleSet:
    """Labeled data separating tight from loose Bayes-error bounds.

    Three feature types:
      * `decoys` redundant features: a shared per-row latent makes a
        `central_fraction` of rows uninformative (both classes at 0)
        while the rest sit in clean class-signed clusters at
        +-cluster_center. Each such feature alone has Bayes error
        central_fraction / 2, concentrated at ratio bins {0, 1/2, 1}
        where every admissible generator scores it identically.
      * `strong` plain shifted features: N(0,1) vs N(shift,1) per class.
        Their Bayes error is lower, but the mass sits at intermediate
        ratio values that loose generators over-penalize.
      * the rest: N(0,1) noise in both classes.

    A tight generator therefore ranks the shifted features above the
    decoys; a loose one inverts that ordering and selects a worse set.
    """
    if decoys + strong > dim:
        raise ValueError("informative features exceed dimension")
    rng = substream(seed, 0)
    n = int(n_per_class)
    rows = []
    for sign in (+1.0, -1.0):
        block = rng.normal(size=(n, dim))
        central = rng.random(n) < central_fraction
        for j in range(decoys):
            cluster = np.where(central, 0.0, sign * cluster_center)
            block[:, j] = cluster + rng.normal(0.0, cluster_std, size=n)
        if sign < 0:
            block[:, decoys:decoys + strong] += shift
        rows.append(block)
    data = np.vstack(rows)
    group = np.array(["P"] * n + ["Q"] * n)
    return SampleSet(data=data, group=group)
