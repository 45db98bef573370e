"""Command-line front end: data ingestion, experiment orchestration,
and report emission.

Subcommands: divergence, test, reproduce, concave, rank-features.
Every report embeds the fully resolved run configuration plus the seed,
and re-running that embedded configuration (see argv_from_config)
reproduces the report byte for byte. Exit codes: 0 success, 1 usage
error, 2 data or numeric error.
"""

import argparse
import math
import sys

import numpy as np

from .concave import parse_concave, validate_concave
from .dataio import read_samples, write_csv, write_json
from .divergence import (
    bhattacharyya_kd,
    fit_density,
    kernel_score_empirical,
    mmd_standard,
    projected_moments,
)
from .errors import DataFormatError, KerndivError
from .hypothesis import (
    COMBINERS,
    PROJECTIONS,
    ExperimentConfig,
    StatisticConfig,
    StatisticFn,
    bootstrap_null,
    decide,
    fit_axis_box,
    fit_oneclass_nn,
    threshold_quantile,
    type2_experiment,
)
from .kernel import FAMILIES, SampleSet
from .projection import fit_fisher, fit_svm, project_means, project_with_weights
from .risk import rank_features, selection_experiment
from .seeding import DEFAULT_SEED
from .synth import TABLE_DIM, TABLE_N_PER_GROUP, featsel_dataset, gaussian_scenarios

MEASURE_TOKENS = {
    "mmd": ("MMD",),
    "kd": ("KD",),
    "bkd": ("BKD",),
    "mmd+kd": ("MMD", "KD"),
    "mmd+bkd": ("MMD", "BKD"),
}
SCENARIO_ORDER = ("variance", "mean")
LABEL_ORDER = ("mmd", "kd", "bkd", "mmd+kd", "mmd+bkd")
DEFAULT_CONCAVE_LIST = ("ls", "log", "exp", "logcos", "cosh", "sec", "poly:4")


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bandwidth_arg(tok):
    if tok == "median":
        return "median"
    try:
        value = float(tok)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bandwidth must be a positive number or 'median', got {tok!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return value


def _density_arg(tok):
    """Returns (original token, kind, bins)."""
    t = str(tok).lower()
    if t == "gaussian":
        return (t, "gaussian", 10)
    if t in ("hist", "histogram"):
        return (t, "hist", 10)
    if t.startswith("hist:"):
        try:
            bins = int(t.split(":", 1)[1])
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad bin count in {tok!r}; expected hist:B") from None
        if bins < 2:
            raise argparse.ArgumentTypeError("hist needs at least 2 bins")
        return (t, "hist", bins)
    raise argparse.ArgumentTypeError(f"unknown density {tok!r}; choose gaussian or hist:B")


def _concave_arg(tok):
    try:
        parse_concave(tok)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return str(tok).strip().lower()


def _concave_list_arg(tok):
    names = [t.strip().lower() for t in str(tok).split(",") if t.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty concave list")
    for name in names:
        _concave_arg(name)
    return tuple(names)


def _float_list_arg(tok):
    try:
        values = tuple(float(t) for t in str(tok).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {tok!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty float list")
    return values


def _add_input_flags(p):
    p.add_argument("--p", metavar="CSV", help="file with the P sample, one row per observation")
    p.add_argument("--q", metavar="CSV", help="file with the Q sample")
    p.add_argument("--data", metavar="CSV",
                   help="single labeled file with a 'group' column of P/Q values")
    p.add_argument("--header", action="store_true",
                   help="--p/--q files start with a header row")


def _add_statistic_flags(p):
    p.add_argument("--kernel", choices=FAMILIES, default="gaussian")
    p.add_argument("--bandwidth", type=_bandwidth_arg, default="median",
                   help="kernel bandwidth, or 'median' for the median heuristic")
    p.add_argument("--projection", choices=PROJECTIONS, default="means")
    p.add_argument("--fisher-lam", type=float, default=None,
                   help="ridge term for the fisher projection")
    p.add_argument("--svm-cost", type=float, default=1.0)
    p.add_argument("--measure", choices=sorted(MEASURE_TOKENS), default="mmd")
    p.add_argument("--concave", type=_concave_arg, default="ls",
                   help="ls|log|exp|logcos|cosh|sec|poly:N")
    p.add_argument("--density", type=_density_arg, default=("gaussian", "gaussian", 10),
                   help="projected density model: gaussian or hist:B")


# Per-command config fields, in the order argv_from_config replays them.
_CONFIG_FIELDS = {
    "divergence": ("p", "q", "data", "header", "kernel", "bandwidth", "projection",
                   "fisher_lam", "svm_cost", "measure", "concave", "density", "seed", "out"),
    "test": ("p", "q", "data", "header", "kernel", "bandwidth", "projection",
             "fisher_lam", "svm_cost", "measure", "concave", "density",
             "alpha", "iterations", "combiner", "seed", "out"),
    "reproduce:gauss-table6": ("reps", "n_per_group", "dim", "alpha", "iterations",
                               "combiner", "kernel", "bandwidth", "projection", "concave",
                               "density", "seed", "out", "csv"),
    "reproduce:featsel": ("reps", "folds", "n_per_class", "concave_list", "bins",
                          "scales", "fractions", "percents", "seed", "out", "csv"),
    "concave": ("kind", "grid", "seed", "out"),
    "rank-features": ("data", "concave", "bins", "seed", "out", "csv"),
}
_POSITIONAL = {"reproduce": "which", "concave": "kind"}


def _config_key(args):
    if args.command == "reproduce":
        return f"reproduce:{args.which}"
    return args.command


def _config_from_args(args):
    cfg = {"command": args.command}
    if args.command == "reproduce":
        cfg["which"] = args.which
    for name in _CONFIG_FIELDS[_config_key(args)]:
        value = getattr(args, name)
        if name == "density":
            value = value[0]
        if isinstance(value, tuple):
            value = list(value)
        cfg[name] = value
    return cfg


def argv_from_config(config) -> list:
    """Rebuild the argument vector that produces `config`; running it
    re-emits the original report byte for byte."""
    command = config["command"]
    argv = [command]
    positional = _POSITIONAL.get(command)
    if positional:
        argv.append(str(config[positional]))
    key = command if command != "reproduce" else f"reproduce:{config['which']}"
    for name in _CONFIG_FIELDS[key]:
        if name == positional:
            continue
        value = config.get(name)
        if value is None:
            continue
        flag = "--" + name.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
            continue
        if isinstance(value, (list, tuple)):
            argv += [flag, ",".join(str(v) for v in value)]
            continue
        argv += [flag, str(value)]
    return argv


def _load_two_sample(args):
    if args.data is not None:
        if args.p is not None or args.q is not None:
            raise UsageError("--data cannot be combined with --p/--q")
        s = read_samples(args.data, header=True)
        if s.group is None:
            raise DataFormatError(f"{args.data}: single-file input needs a 'group' column")
        p_rows, q_rows = s.split()
        if len(p_rows) == 0 or len(q_rows) == 0:
            raise DataFormatError(f"{args.data}: need rows for both groups P and Q")
    else:
        if args.p is None or args.q is None:
            raise UsageError("provide --p and --q, or a labeled --data file")
        p_rows = read_samples(args.p, header=args.header).data
        q_rows = read_samples(args.q, header=args.header).data
        if p_rows.shape[1] != q_rows.shape[1]:
            raise DataFormatError(
                f"dimension mismatch: {args.p} has {p_rows.shape[1]} feature columns, "
                f"{args.q} has {q_rows.shape[1]}")
    pooled = SampleSet(data=np.vstack([p_rows, q_rows]))
    return pooled, len(p_rows), len(q_rows)


def _statistic_config(args, measures):
    _, kind, bins = args.density
    return StatisticConfig(
        measures=measures,
        projection=args.projection,
        concave=args.concave,
        density=kind,
        bins=bins,
        kernel_family=args.kernel,
        bandwidth=args.bandwidth,
        fisher_lam=args.fisher_lam,
        svm_cost=args.svm_cost,
    )


def _cmd_divergence(args):
    cfg = _config_from_args(args)
    pooled, n1, n2 = _load_two_sample(args)
    measures = MEASURE_TOKENS[args.measure]
    fn = StatisticFn(_statistic_config(args, measures))
    gram = fn.gram_for(pooled)
    mmd_value = mmd_standard(gram, n1, n2)
    out_measures = {}
    projection = {"method": args.projection}
    if any(m in ("KD", "BKD") for m in measures):
        _, kind, bins = args.density
        if args.projection == "means":
            xp = project_means(gram, n1, n2)
            t = math.sqrt(mmd_value)
        elif args.projection == "fisher":
            w = fit_fisher(gram, n1, n2, lam=args.fisher_lam)
            t = w.norm
            xp = project_with_weights(gram, w, n1, n2)
        else:
            w = fit_svm(gram, n1, n2, cost=args.svm_cost)
            t = w.norm
            xp = project_with_weights(gram, w, n1, n2)
        st = projected_moments(xp)
        projection.update({
            "t": t,
            "mu_p": st.mu_p, "mu_q": st.mu_q,
            "var_p": st.var_p, "var_q": st.var_q,
            "sigma_p": math.sqrt(st.var_p), "sigma_q": math.sqrt(st.var_q),
        })
        if "KD" in measures:
            model = fit_density(xp, kind, bins=bins)
            c = parse_concave(args.concave)
            out_measures["kd"] = kernel_score_empirical(xp, model, c).to_json()
        if "BKD" in measures:
            out_measures["bkd"] = bhattacharyya_kd(st).to_json()
    if "MMD" in measures:
        out_measures["mmd"] = {"measure": "MMD", "value": mmd_value}
    write_json(args.out, {
        "config": cfg,
        "seed": args.seed,
        "n_p": n1,
        "n_q": n2,
        "kernel": gram.spec.family,
        "bandwidth": gram.spec.bandwidth,
        "projection": projection,
        "measures": out_measures,
    })


def _cmd_test(args):
    cfg = _config_from_args(args)
    pooled, n1, n2 = _load_two_sample(args)
    measures = MEASURE_TOKENS[args.measure]
    fn = StatisticFn(_statistic_config(args, measures))
    gram = fn.gram_for(pooled)
    observed = fn.from_gram(gram, n1, n2)
    nulls = bootstrap_null(pooled, n1, n2, fn, args.iterations, args.seed, gram=gram)
    if len(measures) == 1:
        model = threshold_quantile(nulls[:, 0], args.alpha, names=measures, seed=args.seed)
    elif args.combiner == "nn":
        model = fit_oneclass_nn(nulls, args.alpha, names=measures, seed=args.seed)
    else:
        model = fit_axis_box(nulls, args.alpha, names=measures, seed=args.seed)
    report = decide(model, observed)
    write_json(args.out, {"config": cfg, **report.to_json()})


def _cmd_reproduce(args):
    if args.which == "gauss-table6":
        if args.reps is None:
            args.reps = 200
        cfg = _config_from_args(args)
        _, kind, bins = args.density
        ecfg = ExperimentConfig(
            alpha=args.alpha,
            iterations=args.iterations,
            projection=args.projection,
            concave=args.concave,
            density=kind,
            bins=bins,
            kernel_family=args.kernel,
            bandwidth=args.bandwidth,
            combiner=args.combiner,
            seed=args.seed,
        )
        scenarios = gaussian_scenarios(dim=args.dim)
        scen_out = {}
        for name in SCENARIO_ORDER:
            gen_p, gen_q = scenarios[name]
            result = type2_experiment(gen_p, gen_q, args.n_per_group, args.reps,
                                      ecfg, jobs=args.jobs)
            scen_out[name] = result.to_json()
        write_json(args.out, {"config": cfg, "seed": args.seed, "scenarios": scen_out})
        if args.csv:
            rows = [("scenario", "measure", "type2_percent", "reject_percent")]
            for name in SCENARIO_ORDER:
                rates = scen_out[name]["rates"]
                for label in LABEL_ORDER:
                    cell = rates[label]
                    rows.append((name, label, cell["fail_percent"], cell["reject_percent"]))
            write_csv(args.csv, rows)
    else:
        if args.reps is None:
            args.reps = 10
        cfg = _config_from_args(args)
        data = featsel_dataset(n_per_class=args.n_per_class, seed=args.seed)
        c_list = [parse_concave(tok) for tok in args.concave_list]
        report = selection_experiment(
            data, c_list,
            folds=args.folds,
            scales=args.scales,
            fractions=args.fractions,
            percents=args.percents,
            bins=args.bins,
            repetitions=args.reps,
            seed=args.seed,
        )
        write_json(args.out, {"config": cfg, "seed": args.seed, "report": report.to_json()})
        if args.csv:
            rows = [("method", "average_rank")]
            rows += [(c.name, report.average_rank[c.name]) for c in c_list]
            write_csv(args.csv, rows)


def _cmd_concave(args):
    cfg = _config_from_args(args)
    c = parse_concave(args.kind)
    grid = np.linspace(0.0, 1.0, args.grid)
    values = np.asarray(c(grid), dtype=np.float64)
    write_json(args.out, {
        "config": cfg,
        "seed": args.seed,
        "name": c.name,
        "parameters": c.describe(),
        "validation": validate_concave(c),
        "curve": {"eta": [float(e) for e in grid], "value": [float(v) for v in values]},
    })


def _cmd_rank_features(args):
    cfg = _config_from_args(args)
    s = read_samples(args.data, header=True)
    if s.group is None:
        raise DataFormatError(f"{args.data}: a 'group' column is required")
    report = rank_features(s, bins=args.bins, c=parse_concave(args.concave))
    write_json(args.out, {"config": cfg, "seed": args.seed, "report": report.to_json()})
    if args.csv:
        write_csv(args.csv, report.csv_rows())


def _build_parser():
    parser = _Parser(prog="kerndiv",
                     description="Kernel divergence measures and calibrated two-sample tests")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p_div = sub.add_parser("divergence", help="compute divergence measures for two samples")
    _add_input_flags(p_div)
    _add_statistic_flags(p_div)
    p_div.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_div.add_argument("--out", required=True, metavar="JSON")
    p_div.set_defaults(func=_cmd_divergence)

    p_test = sub.add_parser("test", help="bootstrap-calibrated two-sample test")
    _add_input_flags(p_test)
    _add_statistic_flags(p_test)
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--iterations", type=int, default=100,
                        help="bootstrap iterations for threshold calibration")
    p_test.add_argument("--combiner", choices=COMBINERS, default="box",
                        help="joint region for multi-measure tests")
    p_test.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_test.add_argument("--out", required=True, metavar="JSON")
    p_test.set_defaults(func=_cmd_test)

    p_rep = sub.add_parser("reproduce", help="run a packaged experiment")
    p_rep.add_argument("which", choices=("gauss-table6", "featsel"))
    p_rep.add_argument("--reps", type=int, default=None,
                       help="Monte Carlo repetitions (default 200 for gauss-table6, 10 for featsel)")
    p_rep.add_argument("--n-per-group", type=int, default=TABLE_N_PER_GROUP)
    p_rep.add_argument("--dim", type=int, default=TABLE_DIM)
    p_rep.add_argument("--alpha", type=float, default=0.05)
    p_rep.add_argument("--iterations", type=int, default=100)
    p_rep.add_argument("--combiner", choices=COMBINERS, default="box")
    p_rep.add_argument("--kernel", choices=FAMILIES, default="gaussian")
    p_rep.add_argument("--bandwidth", type=_bandwidth_arg, default="median")
    p_rep.add_argument("--projection", choices=PROJECTIONS, default="means")
    p_rep.add_argument("--concave", type=_concave_arg, default="poly:4")
    p_rep.add_argument("--density", type=_density_arg, default=("gaussian", "gaussian", 10))
    p_rep.add_argument("--folds", type=int, default=5)
    p_rep.add_argument("--n-per-class", type=int, default=150)
    p_rep.add_argument("--concave-list", type=_concave_list_arg, default=DEFAULT_CONCAVE_LIST)
    p_rep.add_argument("--bins", type=int, default=10)
    p_rep.add_argument("--scales", type=_float_list_arg, default=(0.1, 0.3))
    p_rep.add_argument("--fractions", type=_float_list_arg, default=(0.25, 0.5, 0.75))
    p_rep.add_argument("--percents", type=_float_list_arg, default=(0.05, 0.1))
    p_rep.add_argument("--jobs", type=int, default=1,
                       help="worker processes; results do not depend on this")
    p_rep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_rep.add_argument("--out", required=True, metavar="JSON")
    p_rep.add_argument("--csv", default=None, metavar="CSV", help="also write the table as CSV")
    p_rep.set_defaults(func=_cmd_reproduce)

    p_con = sub.add_parser("concave", help="emit a concave generator's parameters and curve")
    p_con.add_argument("kind", type=_concave_arg)
    p_con.add_argument("--grid", type=int, default=101)
    p_con.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_con.add_argument("--out", required=True, metavar="JSON")
    p_con.set_defaults(func=_cmd_concave)

    p_rank = sub.add_parser("rank-features", help="rank feature columns by minimum risk")
    p_rank.add_argument("--data", required=True, metavar="CSV",
                        help="labeled file with a 'group' column")
    p_rank.add_argument("--concave", type=_concave_arg, default="ls")
    p_rank.add_argument("--bins", type=int, default=10)
    p_rank.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_rank.add_argument("--out", required=True, metavar="JSON")
    p_rank.add_argument("--csv", default=None, metavar="CSV")
    p_rank.set_defaults(func=_cmd_rank_features)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (KerndivError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
