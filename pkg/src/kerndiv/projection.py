"""Projection directions for embedded samples and the projected coordinates.

Three constructions of the direction Phi(w): the canonical difference of
empirical mean embeddings, the kernel Fisher discriminant, and a kernel
SVM. Each yields coordinates x^p_i = <Phi(w), Phi(x_i)> / ||Phi(w)||
computed entirely through the Gram matrix. The pooled convention puts
the n1 P-rows first.

All directions are oriented so the projected P-mean is >= the projected
Q-mean; divergences are sign-invariant, this just fixes reports.
"""

from dataclasses import dataclass

import numpy as np

from . import smo
from .errors import DegenerateDataError
from .kernel import GramMatrix

MEAN_GAP_TOL = 1e-12

DEFAULT_FISHER_SCALE = 1e-3
DEFAULT_SVM_COST = 1.0


@dataclass(frozen=True)
class ProjectionWeights:
    """Dual coefficients defining Phi(w) = sum_j alpha_j Phi(x_j)."""

    alphas: np.ndarray
    reference_indices: np.ndarray
    norm: float
    method: str

    def to_json(self):
        return {
            "method": self.method,
            "alphas": [float(a) for a in self.alphas],
            "reference_indices": [int(i) for i in self.reference_indices],
            "norm": float(self.norm),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            alphas=np.asarray(obj["alphas"], dtype=np.float64),
            reference_indices=np.asarray(obj["reference_indices"], dtype=np.int64),
            norm=float(obj["norm"]),
            method=str(obj["method"]),
        )


@dataclass(frozen=True)
class ProjectedSamples:
    """Projected coordinates x^p with per-entry group labels."""

    xp: np.ndarray
    group: np.ndarray

    def __post_init__(self):
        xp = np.asarray(self.xp, dtype=np.float64)
        group = np.asarray(self.group).astype("U1")
        if xp.shape != group.shape or xp.ndim != 1:
            raise ValueError("xp and group must be 1-D arrays of equal length")
        if not np.isfinite(xp).all():
            raise ValueError("projected coordinates must be finite")
        object.__setattr__(self, "xp", xp)
        object.__setattr__(self, "group", group)

    @classmethod
    def from_counts(cls, xp, n1, n2):
        group = np.array(["P"] * n1 + ["Q"] * n2)
        return cls(xp=xp, group=group)

    @property
    def p_values(self):
        return self.xp[self.group == "P"]

    @property
    def q_values(self):
        return self.xp[self.group == "Q"]


def _check_counts(gram: GramMatrix, n1: int, n2: int):
    if n1 < 1 or n2 < 1:
        raise ValueError("both groups must be nonempty")
    if n1 + n2 != gram.n:
        raise ValueError(f"n1 + n2 = {n1 + n2} does not match gram size {gram.n}")


def project_means(gram: GramMatrix, n1: int, n2: int) -> ProjectedSamples:
    """Project every pooled sample onto the mean-embedding difference.

    x^p_i = [(1/n1) sum_{j in P} K_ij - (1/n2) sum_{j in Q} K_ij] / T,
    with T the square root of the biased MMD estimate.
    """
    _check_counts(gram, n1, n2)
    k = gram.values
    diff = k[:, :n1].sum(axis=1) / n1 - k[:, n1:].sum(axis=1) / n2
    t_squared = diff[:n1].mean() - diff[n1:].mean()
    if t_squared <= MEAN_GAP_TOL:
        raise DegenerateDataError(
            "indistinguishable embedded means: the canonical direction is undefined "
            f"(T^2 = {t_squared:.3e} <= {MEAN_GAP_TOL})"
        )
    xp = diff / np.sqrt(t_squared)
    return ProjectedSamples.from_counts(xp, n1, n2)


def make_weights(gram: GramMatrix, alphas, reference_indices, method: str) -> ProjectionWeights:
    """Bundle dual coefficients with their RKHS norm (computed via the gram)."""
    alphas = np.asarray(alphas, dtype=np.float64)
    idx = np.asarray(reference_indices, dtype=np.int64)
    if alphas.shape != idx.shape:
        raise ValueError("alphas and reference_indices must have equal length")
    if idx.size and (idx.min() < 0 or idx.max() >= gram.n):
        raise ValueError("reference index out of range")
    sub = gram.values[np.ix_(idx, idx)]
    norm_sq = float(alphas @ sub @ alphas)
    # alpha' K alpha cancels almost completely for degenerate directions,
    # leaving float noise that can land slightly above zero; anything below
    # the cancellation scale of the quadratic form is treated as zero
    noise_floor = 1e-12 * float(np.abs(alphas).sum()) ** 2 * float(np.abs(sub).max(initial=0.0))
    if not np.isfinite(norm_sq) or norm_sq <= noise_floor:
        raise DegenerateDataError(f"projection direction has zero RKHS norm (norm^2 = {norm_sq:.3e})")
    return ProjectionWeights(alphas=alphas, reference_indices=idx, norm=float(np.sqrt(norm_sq)), method=method)


def means_weights(gram: GramMatrix, n1: int, n2: int) -> ProjectionWeights:
    """The canonical direction as explicit weights: 1/n1 on P, -1/n2 on Q."""
    _check_counts(gram, n1, n2)
    alphas = np.concatenate([np.full(n1, 1.0 / n1), np.full(n2, -1.0 / n2)])
    return make_weights(gram, alphas, np.arange(gram.n), "means")


def project_with_weights(gram: GramMatrix, w: ProjectionWeights, n1: int, n2: int) -> ProjectedSamples:
    """x^p_i = sum_j alpha_j K(x_i, x_j) / ||Phi(w)|| over the reference set."""
    _check_counts(gram, n1, n2)
    idx = np.asarray(w.reference_indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= gram.n):
        raise ValueError("reference index out of range")
    if w.norm <= 0:
        raise DegenerateDataError("projection weights have nonpositive norm")
    xp = gram.values[:, idx] @ np.asarray(w.alphas, dtype=np.float64) / w.norm
    return ProjectedSamples.from_counts(xp, n1, n2)


def _oriented(gram, alphas, idx, method, n1, n2) -> ProjectionWeights:
    w = make_weights(gram, alphas, idx, method)
    xp = project_with_weights(gram, w, n1, n2)
    if xp.p_values.mean() < xp.q_values.mean():
        w = ProjectionWeights(alphas=-w.alphas, reference_indices=w.reference_indices,
                              norm=w.norm, method=w.method)
    return w


def fit_fisher(gram: GramMatrix, n1: int, n2: int, lam: float | None = None) -> ProjectionWeights:
    """Kernel Fisher discriminant dual coefficients.

    Solves (N + lam I) alpha = M1 - M2 with M_c the per-class mean kernel
    columns and N the within-class dual scatter. lam defaults to
    1e-3 * mean(diag(N)); the unregularized system is always singular
    (N has rank at most n-2), so lam = 0 raises.
    """
    _check_counts(gram, n1, n2)
    if n1 < 2 or n2 < 2:
        raise ValueError("fisher direction needs at least 2 samples per group")
    k = gram.values
    kp = k[:, :n1]
    kq = k[:, n1:]
    m1 = kp.mean(axis=1)
    m2 = kq.mean(axis=1)
    scatter = kp @ kp.T + kq @ kq.T - n1 * np.outer(m1, m1) - n2 * np.outer(m2, m2)
    if lam is None:
        lam = DEFAULT_FISHER_SCALE * float(scatter.diagonal().mean())
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 0.0:
        sv = np.linalg.svd(scatter, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise DegenerateDataError(
                "within-class scatter is singular at lambda = 0; pass a positive lambda"
            )
    system = scatter + lam * np.eye(gram.n)
    alphas = np.linalg.solve(system, m1 - m2)
    return _oriented(gram, alphas, np.arange(gram.n), "fisher", n1, n2)


def fit_svm(
    gram: GramMatrix,
    n1: int,
    n2: int,
    cost: float = DEFAULT_SVM_COST,
    tol: float = smo.DEFAULT_TOL,
    max_iter: int | None = None,
) -> ProjectionWeights:
    """Soft-margin kernel SVM direction, P labeled +1 and Q labeled -1.

    Returns the signed dual coefficients alpha_j * y_j restricted to the
    support vectors.
    """
    _check_counts(gram, n1, n2)
    y = np.concatenate([np.ones(n1), -np.ones(n2)])
    sol = smo.solve_dual(gram.values, y, cost=cost, tol=tol, max_iter=max_iter)
    support = sol.alpha > 1e-12
    if not support.any():
        raise DegenerateDataError("SVM dual returned no support vectors")
    signed = sol.alpha[support] * y[support]
    return _oriented(gram, signed, np.flatnonzero(support), "svm", n1, n2)
