"""Histogram minimum-risk feature scoring and the noise-augmented
feature-selection harness.

Per feature, both classes are histogrammed over shared equal-width
edges (pooled min to max) and the discretized minimum risk

    R = sum_b ((p_b + q_b) / 2) * C(p_b / (p_b + q_b))

is the score; lower risk means a tighter bound on the Bayes error of
the feature. Equal class priors throughout. The selection harness adds
multiplicative Gaussian noise, ranks features per generator, keeps the
top percentage, and compares linear-classifier test errors across
generators by average rank.
"""

import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.stats import rankdata

from . import smo
from .concave import ConcaveFn
from .kernel import SampleSet
from .seeding import DEFAULT_SEED, substream

DEFAULT_BINS = 10


def _min_risk(values_p, values_q, bins, c):
    values_p = np.asarray(values_p, dtype=np.float64).ravel()
    values_q = np.asarray(values_q, dtype=np.float64).ravel()
    if values_p.size == 0 or values_q.size == 0:
        raise ValueError("both classes must be nonempty")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if not (np.isfinite(values_p).all() and np.isfinite(values_q).all()):
        raise ValueError("feature values must be finite")
    lo = min(values_p.min(), values_q.min())
    hi = max(values_p.max(), values_q.max())
    if hi <= lo:
        return 0.5, True
    edges = np.linspace(lo, hi, bins + 1)
    pb = np.histogram(values_p, bins=edges)[0] / values_p.size
    qb = np.histogram(values_q, bins=edges)[0] / values_q.size
    mass = pb + qb
    occupied = mass > 0
    eta = pb[occupied] / mass[occupied]
    risk = float(np.sum(0.5 * mass[occupied] * c(eta)))
    return risk, False


def feature_min_risk(values_p, values_q, bins=DEFAULT_BINS, c: ConcaveFn = None) -> float:
    """Discretized minimum risk of a single feature under generator c."""
    if c is None:
        raise ValueError("a concave generator c is required")
    risk, degenerate = _min_risk(values_p, values_q, bins, c)
    if degenerate:
        warnings.warn("single-valued feature: risk fixed at 1/2 (uninformative)")
    return risk


@dataclass(frozen=True)
class FeatureRiskReport:
    """Per-feature risks with ascending ranks (1 = lowest risk)."""

    risks: np.ndarray
    ranks: np.ndarray
    concave: str
    bins: int
    degenerate: list = field(default_factory=list)

    def to_json(self):
        return {
            "concave": self.concave,
            "bins": self.bins,
            "features": [
                {"feature": j, "risk": float(r), "rank": int(k), "degenerate": bool(d)}
                for j, (r, k, d) in enumerate(zip(self.risks, self.ranks, self.degenerate))
            ],
        }

    def csv_rows(self):
        rows = [("feature", "risk", "rank")]
        rows += [(j, float(r), int(k))
                 for j, (r, k) in enumerate(zip(self.risks, self.ranks))]
        return rows

    def top_features(self, count):
        """Indices of the `count` best-ranked features, rank order."""
        order = np.argsort(self.ranks)
        return order[:count]


def rank_features(data: SampleSet, bins=DEFAULT_BINS, c: ConcaveFn = None) -> FeatureRiskReport:
    """Score every column of a labeled sample set and rank ascending.

    Ties keep column order (stable sort), so ranks are always a
    permutation of 1..d.
    """
    if c is None:
        raise ValueError("a concave generator c is required")
    p_rows, q_rows = data.split()
    if p_rows.shape[0] == 0 or q_rows.shape[0] == 0:
        raise ValueError("both classes must be present")
    risks = np.empty(data.dim)
    degenerate = []
    for j in range(data.dim):
        risk, degen = _min_risk(p_rows[:, j], q_rows[:, j], bins, c)
        risks[j] = risk
        degenerate.append(degen)
    if any(degenerate):
        cols = [j for j, d in enumerate(degenerate) if d]
        warnings.warn(f"single-valued features {cols}: risk fixed at 1/2")
    order = np.argsort(risks, kind="stable")
    ranks = np.empty(data.dim, dtype=np.int64)
    ranks[order] = np.arange(1, data.dim + 1)
    return FeatureRiskReport(risks=risks, ranks=ranks, concave=c.name,
                             bins=bins, degenerate=degenerate)


def add_noise(data: SampleSet, scale: float, fraction: float, seed) -> SampleSet:
    """Multiply a random `fraction` of each column by (1 + scale * y),
    y standard normal, rows chosen independently per column.

    `seed` may be an integer (a dedicated substream is derived) or an
    already-constructed Generator.
    """
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    vals = data.data.copy()
    group = None if data.group is None else data.group.copy()
    rows_hit = int(round(fraction * data.n))
    if scale == 0.0 or rows_hit == 0:
        return SampleSet(data=vals, group=group)
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed, 0)
    for j in range(data.dim):
        rows = rng.choice(data.n, size=rows_hit, replace=False)
        noise = rng.standard_normal(rows_hit)
        vals[rows, j] *= 1.0 + scale * noise
    return SampleSet(data=vals, group=group)


def _standardize(train, test):
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std = np.where(std > 1e-12, std, 1.0)
    return (train - mean) / std, (test - mean) / std


def _linear_error(train_x, train_y, test_x, test_y, cost):
    """Test error of a linear max-margin classifier via the dual solver."""
    train_s, test_s = _standardize(train_x, test_x)
    gram = np.ascontiguousarray(train_s @ train_s.T)
    sol = smo.solve_dual(gram, train_y, cost=cost)
    dec = test_s @ train_s.T @ (sol.alpha * train_y) + sol.bias
    pred = np.where(dec >= 0, 1.0, -1.0)
    return float(np.mean(pred != test_y))


def _stratified_folds(group, folds, rng):
    """Shuffled per-class contiguous splits; returns a list of test-index arrays."""
    assignments = [[] for _ in range(folds)]
    for label in ("P", "Q"):
        idx = np.flatnonzero(group == label)
        if idx.size < folds:
            raise ValueError(f"class {label} has {idx.size} rows, fewer than {folds} folds")
        idx = rng.permutation(idx)
        for k, part in enumerate(np.array_split(idx, folds)):
            assignments[k].append(part)
    return [np.sort(np.concatenate(parts)) for parts in assignments]


@dataclass(frozen=True)
class SelectionReport:
    """Average rank per generator over all experiment cells."""

    methods: list
    average_rank: dict
    cells: list

    def to_json(self):
        return {
            "methods": list(self.methods),
            "average_rank": {k: float(v) for k, v in self.average_rank.items()},
            "cells": self.cells,
        }


def selection_experiment(
    data: SampleSet,
    c_list,
    folds: int = 5,
    scales=(0.1, 0.3),
    fractions=(0.25, 0.5, 0.75),
    percents=(0.05, 0.10),
    bins: int = DEFAULT_BINS,
    repetitions: int = 1,
    seed: int = DEFAULT_SEED,
    cost: float = 1.0,
) -> SelectionReport:
    """Compare concave generators as feature-selection criteria.

    For every (repetition, noise setting, fold, percent) cell: add noise,
    rank features on the training split per generator, keep the top
    `percent` of columns, train the linear classifier, record the test
    error, and rank the generators within the cell (ties averaged). The
    headline number is each generator's rank averaged over all cells.
    """
    if data.group is None:
        raise ValueError("labeled data required")
    names = [c.name for c in c_list]
    if len(set(names)) != len(names):
        raise ValueError("generator names must be unique")
    if folds < 2:
        raise ValueError("need at least 2 folds")
    y_all = np.where(data.group == "P", 1.0, -1.0)
    cells = []
    rank_sums = dict.fromkeys(names, 0.0)
    settings = list(product(scales, fractions))
    for rep in range(repetitions):
        for s_idx, (scale, fraction) in enumerate(settings):
            noisy = add_noise(data, scale, fraction, substream(seed, 1, rep, s_idx))
            fold_sets = _stratified_folds(data.group, folds, substream(seed, 2, rep, s_idx))
            for k, test_idx in enumerate(fold_sets):
                train_mask = np.ones(data.n, dtype=bool)
                train_mask[test_idx] = False
                train = SampleSet(data=noisy.data[train_mask], group=data.group[train_mask])
                test_x = noisy.data[test_idx]
                test_y = y_all[test_idx]
                reports = {c.name: rank_features(train, bins=bins, c=c) for c in c_list}
                for percent in percents:
                    keep = max(1, int(round(percent * data.dim)))
                    errors = {}
                    for c in c_list:
                        cols = reports[c.name].top_features(keep)
                        errors[c.name] = _linear_error(
                            train.data[:, cols], y_all[train_mask],
                            test_x[:, cols], test_y, cost,
                        )
                    cell_ranks = rankdata([errors[n] for n in names], method="average")
                    for name, r in zip(names, cell_ranks):
                        rank_sums[name] += r
                    cells.append({
                        "repetition": rep,
                        "scale": float(scale),
                        "fraction": float(fraction),
                        "fold": k,
                        "percent": float(percent),
                        "errors": {n: float(errors[n]) for n in names},
                        "ranks": {n: float(r) for n, r in zip(names, cell_ranks)},
                    })
    total = len(cells)
    average = {name: rank_sums[name] / total for name in names}
    return SelectionReport(methods=names, average_rank=average, cells=cells)
