"""Scalar two-sample measures on projected coordinates.

MMD in both formulations (Gram double sum and squared projected mean
gap), projected moments, the closed-form Bhattacharyya score for fitted
1-D Gaussians, and the general empirical kernel score

    S_hat = (1/n) sum_i C(P^p(x^p_i) / (P^p(x^p_i) + Q^p(x^p_i))),
    KD_hat = 1/2 - S_hat,

for any admissible concave generator C and a per-group density model on
the projected line.

Sign note: the Bhattacharyya score is S = (1/2) e^(-B) with B >= 0, so
S <= 1/2 and the divergence 1/2 - S is nonnegative. A positive exponent
would invert both properties.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .concave import ConcaveFn
from .errors import DegenerateDataError, KerndivError
from .kernel import GramMatrix
from .projection import ProjectedSamples

DENSITY_FLOOR = 1e-300
DEFAULT_BINS = 10

MEASURES = ("MMD", "KD", "BKD")
DENSITY_KINDS = ("gaussian", "hist")


@dataclass(frozen=True)
class ProjectedStats:
    """Group means and population variances of projected coordinates."""

    mu_p: float
    mu_q: float
    var_p: float
    var_q: float

    def __post_init__(self):
        vals = (self.mu_p, self.mu_q, self.var_p, self.var_q)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("projected moments must be finite")
        if self.var_p < 0 or self.var_q < 0:
            raise ValueError("variances must be nonnegative")


@dataclass(frozen=True)
class DensityModel:
    """Per-group density on the projected line.

    kind "gaussian" carries a mean and population variance per group;
    kind "hist" carries shared bin edges and per-group bin probabilities.
    """

    kind: str
    mean_p: float | None = None
    var_p: float | None = None
    mean_q: float | None = None
    var_q: float | None = None
    edges: np.ndarray | None = None
    prob_p: np.ndarray | None = None
    prob_q: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            params = (self.mean_p, self.var_p, self.mean_q, self.var_q)
            if any(p is None or not math.isfinite(p) for p in params):
                raise ValueError("gaussian model needs finite mean/variance per group")
            if self.var_p <= 0 or self.var_q <= 0:
                raise DegenerateDataError("gaussian density model needs positive variance")
        elif self.kind == "hist":
            if self.edges is None or self.prob_p is None or self.prob_q is None:
                raise ValueError("histogram model needs edges and per-group probabilities")
            edges = np.asarray(self.edges, dtype=np.float64)
            if edges.ndim != 1 or edges.size < 2 or not (np.diff(edges) > 0).all():
                raise ValueError("bin edges must be strictly increasing")
            for name in ("prob_p", "prob_q"):
                prob = np.asarray(getattr(self, name), dtype=np.float64)
                if prob.shape != (edges.size - 1,):
                    raise ValueError(f"{name} must have one entry per bin")
                if (prob < 0).any() or abs(prob.sum() - 1.0) > 1e-12:
                    raise ValueError(f"{name} must be a probability vector")
                object.__setattr__(self, name, prob)
            object.__setattr__(self, "edges", edges)
        else:
            raise ValueError(f"unknown density kind {self.kind!r}; choose from {DENSITY_KINDS}")

    def _gaussian_pdf(self, x, mean, var):
        return np.exp(-((x - mean) ** 2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)

    def _bin_index(self, x):
        idx = np.searchsorted(self.edges, x, side="right") - 1
        return np.clip(idx, 0, self.edges.size - 2)

    def density(self, group: str, x):
        """Model density (or bin probability) of group 'P' or 'Q' at x."""
        x = np.asarray(x, dtype=np.float64)
        if group not in ("P", "Q"):
            raise ValueError("group must be 'P' or 'Q'")
        if self.kind == "gaussian":
            if group == "P":
                return self._gaussian_pdf(x, self.mean_p, self.var_p)
            return self._gaussian_pdf(x, self.mean_q, self.var_q)
        prob = self.prob_p if group == "P" else self.prob_q
        return prob[self._bin_index(x)]

    def eta(self, x):
        """Floored density ratio P^p / (P^p + Q^p), always inside [0, 1].

        Bins (or tails) where both groups carry no mass come out at 1/2:
        equal floors make the evidence uninformative by construction.
        """
        p = np.maximum(self.density("P", x), DENSITY_FLOOR)
        q = np.maximum(self.density("Q", x), DENSITY_FLOOR)
        if not (np.isfinite(p).all() and np.isfinite(q).all()):
            raise KerndivError("density model produced non-finite values")
        return p / (p + q)

    def to_json(self):
        if self.kind == "gaussian":
            return {
                "kind": self.kind,
                "mean_p": self.mean_p,
                "var_p": self.var_p,
                "mean_q": self.mean_q,
                "var_q": self.var_q,
            }
        return {
            "kind": self.kind,
            "edges": [float(e) for e in self.edges],
            "prob_p": [float(v) for v in self.prob_p],
            "prob_q": [float(v) for v in self.prob_q],
        }


@dataclass(frozen=True)
class DivergenceResult:
    """A named scalar measure with its auxiliary quantities."""

    value: float
    measure: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}")
        if self.measure == "MMD":
            if self.value < -1e-12:
                raise ValueError("MMD must be nonnegative")
        elif not -1e-9 <= self.value <= 0.5 + 1e-9:
            raise ValueError(f"{self.measure} out of [0, 1/2]: {self.value}")

    def to_json(self):
        return {
            "measure": self.measure,
            "value": float(self.value),
            "details": {k: float(v) if isinstance(v, (int, float, np.floating)) else v
                        for k, v in self.details.items()},
        }


def _group_values(xp: ProjectedSamples):
    p = xp.p_values
    q = xp.q_values
    if p.size == 0 or q.size == 0:
        raise ValueError("projected samples must contain both groups")
    return p, q


def mmd_standard(gram: GramMatrix, n1: int, n2: int) -> float:
    """Biased MMD estimate as the three Gram double sums."""
    if n1 < 1 or n2 < 1:
        raise ValueError("both groups must be nonempty")
    if n1 + n2 != gram.n:
        raise ValueError(f"n1 + n2 = {n1 + n2} does not match gram size {gram.n}")
    k = gram.values
    kpp = k[:n1, :n1].sum() / (n1 * n1)
    kpq = k[:n1, n1:].sum() / (n1 * n2)
    kqq = k[n1:, n1:].sum() / (n2 * n2)
    value = kpp - 2.0 * kpq + kqq
    if value < -1e-12:
        raise KerndivError(f"MMD estimate {value:.3e} negative beyond rounding tolerance")
    return max(value, 0.0)


def mmd_projected(xp: ProjectedSamples) -> float:
    """Squared gap of the projected group means; equals the Gram double
    sum when xp comes from the canonical mean-difference direction."""
    p, q = _group_values(xp)
    return float((p.mean() - q.mean()) ** 2)


def projected_moments(xp: ProjectedSamples) -> ProjectedStats:
    """Per-group mean and population (1/n) variance of the coordinates."""
    p, q = _group_values(xp)
    return ProjectedStats(
        mu_p=float(p.mean()),
        mu_q=float(q.mean()),
        var_p=float(p.var()),
        var_q=float(q.var()),
    )


def bhattacharyya_kd(stats: ProjectedStats) -> DivergenceResult:
    """Closed-form divergence of the two fitted projected Gaussians.

    B = (1/4) log((1/4)(vp/vq + vq/vp + 2)) + (1/4)(mu_p - mu_q)^2/(vp + vq),
    S = (1/2) e^(-B), value = 1/2 - S.
    """
    if stats.var_p <= 0 or stats.var_q <= 0:
        raise DegenerateDataError(
            "degenerate projected distribution: zero variance makes the "
            "Bhattacharyya statistic undefined"
        )
    ratio = stats.var_p / stats.var_q
    b = 0.25 * math.log(0.25 * (ratio + 1.0 / ratio + 2.0))
    b += 0.25 * (stats.mu_p - stats.mu_q) ** 2 / (stats.var_p + stats.var_q)
    score = 0.5 * math.exp(-b)
    return DivergenceResult(
        value=max(0.5 - score, 0.0),
        measure="BKD",
        details={
            "B": b,
            "S": score,
            "mu_p": stats.mu_p,
            "mu_q": stats.mu_q,
            "var_p": stats.var_p,
            "var_q": stats.var_q,
        },
    )


def fit_density(xp: ProjectedSamples, kind: str, bins: int = DEFAULT_BINS) -> DensityModel:
    """Fit the per-group density model on the projected coordinates.

    Histogram bins share edges spanning the pooled range so the two
    groups are always comparable bin by bin.
    """
    kind = str(kind).lower()
    if kind == "histogram":
        kind = "hist"
    p, q = _group_values(xp)
    if kind == "gaussian":
        st = projected_moments(xp)
        if st.var_p <= 0 or st.var_q <= 0:
            raise DegenerateDataError("zero variance group: gaussian density model undefined")
        return DensityModel(kind="gaussian", mean_p=st.mu_p, var_p=st.var_p,
                            mean_q=st.mu_q, var_q=st.var_q)
    if kind == "hist":
        if bins < 1:
            raise ValueError("bins must be >= 1")
        lo = float(xp.xp.min())
        hi = float(xp.xp.max())
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
        counts_p, _ = np.histogram(p, bins=edges)
        counts_q, _ = np.histogram(q, bins=edges)
        return DensityModel(kind="hist", edges=edges,
                            prob_p=counts_p / p.size, prob_q=counts_q / q.size)
    raise ValueError(f"unknown density kind {kind!r}; choose from {DENSITY_KINDS}")


def kernel_score_empirical(xp: ProjectedSamples, model: DensityModel, c: ConcaveFn) -> DivergenceResult:
    """Empirical kernel score and divergence over all pooled points."""
    _group_values(xp)
    eta = model.eta(xp.xp)
    score = float(np.mean(c(eta)))
    value = 0.5 - score
    if not -1e-9 <= value <= 0.5 + 1e-9:
        raise KerndivError(f"empirical divergence {value:.3e} outside [0, 1/2]")
    return DivergenceResult(
        value=min(max(value, 0.0), 0.5),
        measure="KD",
        details={"S": score, "concave": c.name, "model": model.kind},
    )
