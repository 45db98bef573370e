"""Bootstrap-calibrated two-sample tests and type-II error experiments.

Calibration permutes the pooled sample's group labels: each iteration
assigns the first n1 permuted rows to P, the rest to Q, and reruns the
full statistic pipeline (projection refit included, unless the frozen
variant is selected). Thresholds come from null order statistics; the
combined multi-statistic tests use either an axis-aligned box or a
one-class nearest-neighbor region in scaled infinity norm.

The two combiners differ sharply in power: the one-class NN radius is a
nearest-neighbor spacing, so its frontier hugs the null sample's outer
edge (roughly a max-statistic threshold) and rejects far less often
than alpha allows, while the box clips each component at its own
jointly calibrated quantile and stays near the nominal level. The box
is the default; the NN combiner stays available via configuration.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .concave import ConcaveFn, parse_concave
from .divergence import (
    DENSITY_KINDS,
    bhattacharyya_kd,
    fit_density,
    kernel_score_empirical,
    mmd_projected,
    mmd_standard,
    projected_moments,
)
from .errors import CalibrationError, KerndivError
from .kernel import FAMILIES, GramMatrix, KernelSpec, SampleSet, gram_matrix, median_heuristic
from .projection import ProjectedSamples, fit_fisher, fit_svm, project_means, project_with_weights
from .seeding import DEFAULT_SEED, substream

MEASURE_NAMES = ("MMD", "KD", "BKD")
PROJECTIONS = ("means", "fisher", "svm")
COMBINERS = ("box", "nn")
DEFAULT_MEASURE_SETS = (("MMD",), ("KD",), ("BKD",), ("MMD", "KD"), ("MMD", "BKD"))

RETRY_FACTOR = 10


def _quantile_rank(iterations: int, alpha: float) -> int:
    """Order-statistic rank ceil((1-alpha)*B), guarded against the float
    product landing epsilon above an integer."""
    rank = math.ceil((1.0 - alpha) * iterations - 1e-9)
    return min(max(rank, 1), iterations)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly inside (0, 1), got {alpha}")


@dataclass(frozen=True)
class StatisticConfig:
    """Everything needed to turn a pooled sample into a statistic vector."""

    measures: tuple = ("MMD",)
    projection: str = "means"
    concave: object = "ls"
    density: str = "gaussian"
    bins: int = 10
    kernel_family: str = "gaussian"
    bandwidth: object = "median"
    fisher_lam: float | None = None
    svm_cost: float = 1.0

    def __post_init__(self):
        measures = tuple(str(m).upper() for m in self.measures)
        if not measures:
            raise ValueError("at least one measure is required")
        for m in measures:
            if m not in MEASURE_NAMES:
                raise ValueError(f"unknown measure {m!r}; choose from {MEASURE_NAMES}")
        if len(set(measures)) != len(measures):
            raise ValueError("measures must be unique")
        object.__setattr__(self, "measures", measures)
        if self.projection not in PROJECTIONS:
            raise ValueError(f"unknown projection {self.projection!r}; choose from {PROJECTIONS}")
        density = "hist" if self.density == "histogram" else self.density
        if density not in DENSITY_KINDS:
            raise ValueError(f"unknown density {density!r}; choose from {DENSITY_KINDS}")
        object.__setattr__(self, "density", density)
        if self.kernel_family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.kernel_family!r}")
        if not isinstance(self.concave, ConcaveFn):
            parse_concave(str(self.concave))
        if self.bandwidth != "median":
            bw = float(self.bandwidth)
            if not bw > 0:
                raise ValueError("bandwidth must be positive or 'median'")
            object.__setattr__(self, "bandwidth", bw)
        if self.bins < 1:
            raise ValueError("bins must be >= 1")

    def concave_fn(self) -> ConcaveFn:
        if isinstance(self.concave, ConcaveFn):
            return self.concave
        return parse_concave(str(self.concave))

    def to_json(self):
        return {
            "measures": list(self.measures),
            "projection": self.projection,
            "concave": self.concave.name if isinstance(self.concave, ConcaveFn) else str(self.concave),
            "density": self.density,
            "bins": self.bins,
            "kernel_family": self.kernel_family,
            "bandwidth": self.bandwidth,
            "fisher_lam": self.fisher_lam,
            "svm_cost": self.svm_cost,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            measures=tuple(obj["measures"]),
            projection=obj["projection"],
            concave=obj["concave"],
            density=obj["density"],
            bins=int(obj["bins"]),
            kernel_family=obj["kernel_family"],
            bandwidth=obj["bandwidth"],
            fisher_lam=obj.get("fisher_lam"),
            svm_cost=float(obj.get("svm_cost", 1.0)),
        )


class StatisticFn:
    """Named statistic vector over a pooled two-sample Gram matrix.

    MMD is always the canonical double-sum estimate; KD and BKD are
    computed on the configured projection's coordinates.
    """

    def __init__(self, config: StatisticConfig):
        self.config = config
        self.names = config.measures
        self._c = config.concave_fn()

    def gram_for(self, data: SampleSet) -> GramMatrix:
        bw = self.config.bandwidth
        if bw == "median":
            bw = median_heuristic(data)
        spec = KernelSpec(family=self.config.kernel_family, bandwidth=float(bw))
        return gram_matrix(spec, data)

    def project(self, gram: GramMatrix, n1: int, n2: int) -> ProjectedSamples:
        cfg = self.config
        if cfg.projection == "means":
            return project_means(gram, n1, n2)
        if cfg.projection == "fisher":
            w = fit_fisher(gram, n1, n2, lam=cfg.fisher_lam)
        else:
            w = fit_svm(gram, n1, n2, cost=cfg.svm_cost)
        return project_with_weights(gram, w, n1, n2)

    def _measure_values(self, measures, xp, mmd_value):
        values = []
        for m in measures:
            if m == "MMD":
                values.append(mmd_value)
            elif m == "KD":
                model = fit_density(xp, self.config.density, bins=self.config.bins)
                values.append(kernel_score_empirical(xp, model, self._c).value)
            else:
                values.append(bhattacharyya_kd(projected_moments(xp)).value)
        return np.asarray(values, dtype=np.float64)

    def from_gram(self, gram: GramMatrix, n1: int, n2: int) -> np.ndarray:
        xp = None
        if any(m in ("KD", "BKD") for m in self.names):
            xp = self.project(gram, n1, n2)
        return self._measure_values(self.names, xp, mmd_standard(gram, n1, n2))

    def from_xp(self, xp: ProjectedSamples, n1: int, n2: int) -> np.ndarray:
        """Evaluate all measures on fixed projected coordinates (frozen
        direction); MMD becomes the squared projected mean gap."""
        return self._measure_values(self.names, xp, mmd_projected(xp))

    def __call__(self, data: SampleSet, n1: int, n2: int) -> np.ndarray:
        return self.from_gram(self.gram_for(data), n1, n2)


def _permutation_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(seed, 0)


def bootstrap_null(
    pooled: SampleSet,
    n1: int,
    n2: int,
    statistic_fn,
    iterations: int,
    seed,
    reuse_gram: bool = True,
    gram: GramMatrix | None = None,
) -> np.ndarray:
    """Null statistic matrix (iterations x m) from label permutations.

    Each iteration permutes the pooled rows and recomputes the statistic
    with the first n1 rows as P. When the statistic function exposes
    from_gram/gram_for, the pooled Gram is computed once and permuted by
    index, which is bit-identical to recomputation. Degenerate
    permutations are retried with fresh ones, up to RETRY_FACTOR x
    iterations attempts in total.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if n1 + n2 != pooled.n:
        raise ValueError("n1 + n2 must match the pooled sample size")
    rng = _permutation_rng(seed)
    fast = reuse_gram and hasattr(statistic_fn, "from_gram")
    if fast and gram is None:
        gram = statistic_fn.gram_for(pooled)
    rows = []
    attempts = 0
    max_attempts = RETRY_FACTOR * iterations
    while len(rows) < iterations:
        if attempts >= max_attempts:
            raise CalibrationError(
                f"bootstrap calibration failed: {len(rows)}/{iterations} usable "
                f"permutations within {RETRY_FACTOR}x attempts ({max_attempts})"
            )
        attempts += 1
        perm = rng.permutation(pooled.n)
        try:
            if fast:
                sub = GramMatrix(values=np.ascontiguousarray(gram.values[np.ix_(perm, perm)]),
                                 spec=gram.spec)
                vec = statistic_fn.from_gram(sub, n1, n2)
            else:
                shuffled = SampleSet(data=pooled.data[perm])
                vec = statistic_fn(shuffled, n1, n2)
        except KerndivError:
            continue
        rows.append(np.atleast_1d(np.asarray(vec, dtype=np.float64)))
    return np.vstack(rows)


def bootstrap_null_frozen(
    xp: ProjectedSamples,
    n1: int,
    n2: int,
    statistic_fn: StatisticFn,
    iterations: int,
    seed,
) -> np.ndarray:
    """Frozen-direction variant: the projection stays fixed and only the
    group assignment of the projected coordinates is permuted."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    rng = _permutation_rng(seed)
    rows = []
    attempts = 0
    max_attempts = RETRY_FACTOR * iterations
    values = xp.xp
    while len(rows) < iterations:
        if attempts >= max_attempts:
            raise CalibrationError(
                f"bootstrap calibration failed: {len(rows)}/{iterations} usable "
                f"permutations within {RETRY_FACTOR}x attempts ({max_attempts})"
            )
        attempts += 1
        perm = rng.permutation(values.size)
        try:
            vec = statistic_fn.from_xp(ProjectedSamples.from_counts(values[perm], n1, n2), n1, n2)
        except KerndivError:
            continue
        rows.append(np.atleast_1d(vec))
    return np.vstack(rows)


@dataclass(frozen=True)
class NullModel:
    """Calibrated rejection region over a null statistic sample."""

    kind: str
    alpha: float
    iterations: int
    threshold: float | None = None
    thresholds: np.ndarray | None = None
    points: np.ndarray | None = None
    scale: np.ndarray | None = None
    radius: float | None = None
    names: tuple | None = None
    seed: int | None = None

    @property
    def dim(self):
        if self.kind == "quantile":
            return 1
        if self.kind == "box":
            return self.thresholds.size
        return self.points.shape[1]

    def summary(self):
        out = {"kind": self.kind, "alpha": self.alpha, "iterations": self.iterations}
        if self.names is not None:
            out["names"] = list(self.names)
        if self.seed is not None:
            out["seed"] = self.seed
        if self.kind == "quantile":
            out["threshold"] = float(self.threshold)
        elif self.kind == "box":
            out["thresholds"] = [float(t) for t in self.thresholds]
        else:
            out["radius"] = float(self.radius)
            out["scale"] = [float(s) for s in self.scale]
            out["null_points"] = int(self.points.shape[0])
        return out

    def to_json(self):
        out = self.summary()
        if self.kind == "nn":
            out["points"] = [[float(v) for v in row] for row in self.points]
        return out

    @classmethod
    def from_json(cls, obj):
        kind = obj["kind"]
        names = tuple(obj["names"]) if "names" in obj else None
        common = dict(kind=kind, alpha=float(obj["alpha"]), iterations=int(obj["iterations"]),
                      names=names, seed=obj.get("seed"))
        if kind == "quantile":
            return cls(threshold=float(obj["threshold"]), **common)
        if kind == "box":
            return cls(thresholds=np.asarray(obj["thresholds"], dtype=np.float64), **common)
        return cls(points=np.asarray(obj["points"], dtype=np.float64),
                   scale=np.asarray(obj["scale"], dtype=np.float64),
                   radius=float(obj["radius"]), **common)


def threshold_quantile(null_stats, alpha: float, names=None, seed=None) -> NullModel:
    """Upper order-statistic threshold at rank ceil((1-alpha)*B)."""
    arr = np.asarray(null_stats, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("need at least one null statistic")
    _check_alpha(alpha)
    rank = _quantile_rank(arr.size, alpha)
    threshold = float(np.sort(arr)[rank - 1])
    return NullModel(kind="quantile", alpha=alpha, iterations=arr.size,
                     threshold=threshold, names=_as_names(names, 1), seed=seed)


def _as_names(names, m):
    if names is None:
        return None
    names = tuple(names)
    if len(names) != m:
        raise ValueError(f"expected {m} names, got {len(names)}")
    return names


def _as_matrix(null_vectors):
    arr = np.asarray(null_vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("null vectors must form a (B, m) matrix")
    if not np.isfinite(arr).all():
        raise ValueError("null vectors must be finite")
    return arr


def _scaled_inf_norm(diff, scale):
    return (np.abs(diff) / scale).max(axis=-1)


def fit_oneclass_nn(null_vectors, alpha: float, names=None, seed=None) -> NullModel:
    """One-class nearest-neighbor region in per-dimension-scaled L-inf.

    Each dimension is standardized by the null sample's standard
    deviation; the radius is the ceil((1-alpha)*B)-th order statistic of
    the leave-one-out NN distances. A test vector is accepted while its
    NN distance to the stored null cloud stays within the radius.
    """
    arr = _as_matrix(null_vectors)
    b, m = arr.shape
    if b < 10:
        raise ValueError(f"need at least 10 null vectors, got {b}")
    _check_alpha(alpha)
    scale = arr.std(axis=0)
    flat = scale == 0.0
    if flat.any():
        warnings.warn(f"zero standard deviation in dimensions {np.flatnonzero(flat).tolist()}; "
                      "scale set to 1 there")
        scale = np.where(flat, 1.0, scale)
    dists = _scaled_inf_norm(arr[:, None, :] - arr[None, :, :], scale)
    np.fill_diagonal(dists, np.inf)
    loo = dists.min(axis=1)
    rank = _quantile_rank(b, alpha)
    radius = float(np.sort(loo)[rank - 1])
    return NullModel(kind="nn", alpha=alpha, iterations=b, points=arr, scale=scale,
                     radius=radius, names=_as_names(names, m), seed=seed)


def fit_axis_box(null_vectors, alpha: float, names=None, seed=None) -> NullModel:
    """Axis-aligned acceptance box calibrated jointly on the null sample.

    All dimensions share one order-statistic rank, starting from the
    marginal ceil((1-alpha)*B) and raised until the fraction of null
    vectors escaping the box is within alpha.
    """
    arr = _as_matrix(null_vectors)
    b, m = arr.shape
    _check_alpha(alpha)
    sorted_cols = np.sort(arr, axis=0)
    budget = alpha * b + 1e-9
    start = _quantile_rank(b, alpha)
    thresholds = sorted_cols[b - 1]
    for rank in range(start, b + 1):
        thresholds = sorted_cols[rank - 1]
        violations = np.any(arr > thresholds, axis=1).sum()
        if violations <= budget:
            break
    return NullModel(kind="box", alpha=alpha, iterations=b, thresholds=thresholds.copy(),
                     names=_as_names(names, m), seed=seed)


@dataclass(frozen=True)
class TestReport:
    """Outcome of a calibrated decision, fully re-checkable."""

    statistic: dict
    decision: str
    alpha: float
    null_model: dict
    seed: int | None = None

    def to_json(self):
        return {
            "statistic": {k: float(v) for k, v in self.statistic.items()},
            "decision": self.decision,
            "alpha": float(self.alpha),
            "null_model": self.null_model,
            "seed": self.seed,
        }


def decide(model: NullModel, observed) -> TestReport:
    """Apply a calibrated null model to an observed statistic vector."""
    obs = np.atleast_1d(np.asarray(observed, dtype=np.float64))
    if obs.ndim != 1 or obs.size != model.dim:
        raise ValueError(f"observed statistic has size {obs.size}, model expects {model.dim}")
    if model.kind == "quantile":
        reject = bool(obs[0] > model.threshold)
    elif model.kind == "box":
        reject = bool(np.any(obs > model.thresholds))
    elif model.kind == "nn":
        dist = float(_scaled_inf_norm(obs[None, :] - model.points, model.scale).min())
        reject = dist > model.radius
    else:
        raise ValueError(f"unknown null model kind {model.kind!r}")
    names = model.names if model.names is not None else tuple(f"stat_{i}" for i in range(obs.size))
    return TestReport(
        statistic={name: float(v) for name, v in zip(names, obs)},
        decision="RejectNull" if reject else "FailToReject",
        alpha=model.alpha,
        null_model=model.summary(),
        seed=model.seed,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for a full type-II (or type-I) error experiment."""

    alpha: float = 0.05
    iterations: int = 100
    projection: str = "means"
    concave: object = "poly:4"
    density: str = "gaussian"
    bins: int = 10
    kernel_family: str = "gaussian"
    bandwidth: object = "median"
    combiner: str = "box"
    fisher_lam: float | None = None
    svm_cost: float = 1.0
    measure_sets: tuple = DEFAULT_MEASURE_SETS
    refit_direction: bool = True
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.combiner not in COMBINERS:
            raise ValueError(f"unknown combiner {self.combiner!r}; choose from {COMBINERS}")
        sets = tuple(tuple(str(m).upper() for m in group) for group in self.measure_sets)
        if not sets or any(len(g) == 0 for g in sets):
            raise ValueError("measure_sets must contain nonempty groups")
        object.__setattr__(self, "measure_sets", sets)
        # Delegate the remaining field validation.
        self.statistic_config()

    def statistic_config(self) -> StatisticConfig:
        needed = tuple(m for m in MEASURE_NAMES
                       if any(m in group for group in self.measure_sets))
        return StatisticConfig(
            measures=needed,
            projection=self.projection,
            concave=self.concave,
            density=self.density,
            bins=self.bins,
            kernel_family=self.kernel_family,
            bandwidth=self.bandwidth,
            fisher_lam=self.fisher_lam,
            svm_cost=self.svm_cost,
        )

    def to_json(self):
        return {
            "alpha": self.alpha,
            "iterations": self.iterations,
            "projection": self.projection,
            "concave": self.concave.name if isinstance(self.concave, ConcaveFn) else str(self.concave),
            "density": self.density,
            "bins": self.bins,
            "kernel_family": self.kernel_family,
            "bandwidth": self.bandwidth,
            "combiner": self.combiner,
            "fisher_lam": self.fisher_lam,
            "svm_cost": self.svm_cost,
            "measure_sets": [list(g) for g in self.measure_sets],
            "refit_direction": self.refit_direction,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            alpha=float(obj["alpha"]),
            iterations=int(obj["iterations"]),
            projection=obj["projection"],
            concave=obj["concave"],
            density=obj["density"],
            bins=int(obj["bins"]),
            kernel_family=obj["kernel_family"],
            bandwidth=obj["bandwidth"],
            combiner=obj["combiner"],
            fisher_lam=obj.get("fisher_lam"),
            svm_cost=float(obj.get("svm_cost", 1.0)),
            measure_sets=tuple(tuple(g) for g in obj["measure_sets"]),
            refit_direction=bool(obj["refit_direction"]),
            seed=int(obj["seed"]),
        )


def _set_label(group):
    return "+".join(m.lower() for m in group)


@dataclass(frozen=True)
class Type2Report:
    """Per-measure rejection and fail-to-reject rates."""

    mode: str
    repetitions: int
    n_per_group: int
    alpha: float
    rates: dict
    config: dict
    seed: int

    def to_json(self):
        return {
            "mode": self.mode,
            "repetitions": self.repetitions,
            "n_per_group": self.n_per_group,
            "alpha": self.alpha,
            "seed": self.seed,
            "config": self.config,
            "rates": self.rates,
        }

    def csv_rows(self):
        rows = [("measure", "reject_percent", "fail_percent")]
        rows += [(label, cell["reject_percent"], cell["fail_percent"])
                 for label, cell in self.rates.items()]
        return rows


def _single_repetition(fn: StatisticFn, generator_p, gen_q, n: int, rep: int,
                       config: ExperimentConfig) -> dict:
    """Decisions for one Monte Carlo repetition, keyed by measure-set
    label. Randomness comes from rep-indexed substreams, so results are
    independent of execution order."""
    data_rng = substream(config.seed, 10, rep)
    pooled = SampleSet(data=np.vstack([generator_p(data_rng, n), gen_q(data_rng, n)]))
    gram = fn.gram_for(pooled)
    boot_rng = substream(config.seed, 20, rep)
    if config.refit_direction:
        observed = fn.from_gram(gram, n, n)
        nulls = bootstrap_null(pooled, n, n, fn, config.iterations, boot_rng, gram=gram)
    else:
        xp = fn.project(gram, n, n)
        observed = fn.from_xp(xp, n, n)
        nulls = bootstrap_null_frozen(xp, n, n, fn, config.iterations, boot_rng)
    needed = fn.names
    out = {}
    for group in config.measure_sets:
        idx = [needed.index(m) for m in group]
        sub = nulls[:, idx]
        if len(idx) == 1:
            model = threshold_quantile(sub[:, 0], config.alpha, names=group, seed=config.seed)
        elif config.combiner == "nn":
            model = fit_oneclass_nn(sub, config.alpha, names=group, seed=config.seed)
        else:
            model = fit_axis_box(sub, config.alpha, names=group, seed=config.seed)
        out[_set_label(group)] = decide(model, observed[idx]).decision == "RejectNull"
    return out


def _repetition_chunk(generator_p, gen_q, n, reps, config):
    """Worker for process pools: reject counts over a repetition chunk."""
    fn = StatisticFn(config.statistic_config())
    counts = dict.fromkeys((_set_label(g) for g in config.measure_sets), 0)
    for rep in reps:
        for label, rejected in _single_repetition(fn, generator_p, gen_q, n, rep, config).items():
            counts[label] += rejected
    return counts


def type2_experiment(generator_p, generator_q, n_per_group: int, repetitions: int,
                     config: ExperimentConfig, jobs: int = 1) -> Type2Report:
    """Monte Carlo error rates of the calibrated tests.

    Per repetition: draw n samples from each generator, calibrate every
    configured measure set on the pooled permutation null, and record
    the decision on the observed split. With distinct generators the
    headline number is the fail-to-reject percentage (type-II error);
    passing generator_q=None draws both groups from generator_p and the
    rejection percentage estimates the type-I error instead.

    jobs > 1 spreads repetitions over worker processes (generators must
    pickle); per-repetition substreams make the report identical to the
    serial run.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if n_per_group < 2:
        raise ValueError("need at least 2 samples per group")
    null_mode = generator_q is None
    gen_q = generator_p if null_mode else generator_q
    labels = [_set_label(g) for g in config.measure_sets]
    n = int(n_per_group)
    if jobs > 1 and repetitions > 1:
        from concurrent.futures import ProcessPoolExecutor

        workers = min(int(jobs), repetitions)
        chunks = [list(range(w, repetitions, workers)) for w in range(workers)]
        rejects = dict.fromkeys(labels, 0)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_repetition_chunk, generator_p, gen_q, n, chunk, config)
                       for chunk in chunks]
            for fut in futures:
                for label, count in fut.result().items():
                    rejects[label] += count
    else:
        rejects = _repetition_chunk(generator_p, gen_q, n, range(repetitions), config)
    rates = {}
    for label in labels:
        r = rejects[label]
        rates[label] = {
            "reject": r,
            "fail": repetitions - r,
            "reject_percent": 100.0 * r / repetitions,
            "fail_percent": 100.0 * (repetitions - r) / repetitions,
        }
    return Type2Report(
        mode="null" if null_mode else "alternative",
        repetitions=repetitions,
        n_per_group=n,
        alpha=config.alpha,
        rates=rates,
        config=config.to_json(),
        seed=config.seed,
    )
