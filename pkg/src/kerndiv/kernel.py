"""Kernel evaluation, Gram-matrix assembly, and median-heuristic bandwidth.

The Gaussian kernel is parametrized as exp(-r^2 / (2 sigma^2)) and the
Laplace kernel as exp(-|x - y|_1 / sigma), with sigma the bandwidth in
input-space distance units. Bandwidth selection uses the median of all
pairwise Euclidean distances over the pooled sample.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DegenerateDataError

FAMILIES = ("gaussian", "laplace")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth; defines k(.,.) and the RKHS embedding."""

    family: str
    bandwidth: float

    def __post_init__(self):
        fam = str(self.family).lower()
        if fam not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", fam)
        bw = float(self.bandwidth)
        if not np.isfinite(bw) or bw <= 0.0:
            raise ValueError(f"bandwidth must be a positive real, got {self.bandwidth!r}")
        object.__setattr__(self, "bandwidth", bw)


@dataclass
class SampleSet:
    """An n x d matrix of observations with optional P/Q group labels."""

    data: np.ndarray
    group: np.ndarray | None = None

    def __post_init__(self):
        arr = np.ascontiguousarray(np.atleast_2d(np.asarray(self.data, dtype=np.float64)))
        if arr.ndim != 2:
            raise ValueError(f"data must be 2-D, got shape {arr.shape}")
        n, d = arr.shape
        if n < 1 or d < 1:
            raise ValueError(f"need at least one row and one column, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("data contains non-finite entries")
        self.data = arr
        if self.group is not None:
            g = np.asarray(self.group)
            if g.shape != (n,):
                raise ValueError(f"group must have shape ({n},), got {g.shape}")
            labels = set(np.unique(g).tolist())
            if not labels <= {"P", "Q"}:
                raise ValueError(f"group labels must be 'P' or 'Q', got {sorted(labels)}")
            self.group = g.astype("U1")

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def dim(self):
        return self.data.shape[1]

    def split(self):
        """Return (P rows, Q rows); requires group labels."""
        if self.group is None:
            raise ValueError("sample set has no group labels")
        return self.data[self.group == "P"], self.data[self.group == "Q"]


@dataclass(frozen=True)
class GramMatrix:
    """Dense n x n kernel matrix together with the KernelSpec that built it."""

    values: np.ndarray
    spec: KernelSpec

    @property
    def n(self):
        return self.values.shape[0]


def eval_kernel(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Evaluate k(x, y) for a single pair of d-vectors. Result in (0, 1]."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("non-finite input vector")
    diff = x - y
    if spec.family == "gaussian":
        return float(np.exp(-diff.dot(diff) / (2.0 * spec.bandwidth**2)))
    return float(np.exp(-np.abs(diff).sum() / spec.bandwidth))


def gram_matrix(spec: KernelSpec, s: SampleSet) -> GramMatrix:
    """Assemble the dense Gram matrix; symmetry is exact by construction."""
    x = s.data
    if spec.family == "gaussian":
        d2 = cdist(x, x, "sqeuclidean")
        k = np.exp(-d2 / (2.0 * spec.bandwidth**2))
    else:
        d1 = cdist(x, x, "cityblock")
        k = np.exp(-d1 / spec.bandwidth)
    # mirror the upper triangle so values[i][j] == values[j][i] bit-for-bit
    iu = np.triu_indices(s.n, 1)
    k[(iu[1], iu[0])] = k[iu]
    np.fill_diagonal(k, 1.0)
    return GramMatrix(values=k, spec=spec)


def median_heuristic(s_pooled: SampleSet) -> float:
    """Median pairwise Euclidean distance over the pooled sample.

    Even-length distance lists use the average of the two middle order
    statistics. All-identical points leave no distance scale and raise.
    """
    if s_pooled.n < 2:
        raise ValueError("median heuristic needs at least 2 rows")
    dists = pdist(s_pooled.data)
    med = float(np.median(dists))
    if med <= 0.0:
        raise DegenerateDataError(
            "degenerate sample: all pairwise distances are zero (or median is zero)"
        )
    return med
