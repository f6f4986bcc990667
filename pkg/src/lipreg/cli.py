"""Command-line entry point.

Subcommands: fit, predict, bound, spanner-stats, experiment. Exit codes:
0 success, 1 data error, 2 usage error, 3 internal budget exhaustion.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiment, extension, modelio, spanner, srm
from .bounds import BoundParams, total_bound
from .errors import BudgetExhaustedError, DataError
from .metric import Dataset, estimate_ddim, normalize_diameter

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="lipreg",
                                  description="Lipschitz regression in metric spaces")
    top.add_argument("--seed", type=int, default=0)
    top.add_argument("--format", choices=("text", "csv"), default="text")
    sub = top.add_subparsers(dest="command", required=True)

    def add_data_args(p):
        p.add_argument("--points", help="CSV with header id,x1..xd,label")
        p.add_argument("--matrix", help="CSV distance matrix (with --labels)")
        p.add_argument("--labels", help="CSV with header id,label, for --matrix")
        p.add_argument("--metric", choices=("l1", "l2", "linf"), default="l2")

    fit = sub.add_parser("fit", help="fit a hypothesis and write a model file")
    add_data_args(fit)
    fit.add_argument("--q", type=int, choices=(1, 2), default=1)
    fit.add_argument("--eta", type=float, default=0.1)
    fit.add_argument("--delta", type=float, default=0.05, help="confidence level")
    fit.add_argument("--spanner-delta", type=float, default=0.25)
    fit.add_argument("--lipschitz", type=float, default=None,
                     help="skip model selection and fit at this fixed budget")
    fit.add_argument("--model", required=True, help="output model file")

    pred = sub.add_parser("predict", help="evaluate a fitted model at new points")
    pred.add_argument("--model", required=True)
    pred.add_argument("--queries", required=True,
                      help="CSV id,x1..xd (or id,d1..dn with a matrix-mode model)")
    pred.add_argument("--output", default="-", help="output CSV path, - for stdout")

    bound = sub.add_parser("bound", help="print the risk report for given parameters")
    bound.add_argument("--n", type=int, required=True)
    bound.add_argument("--lipschitz", type=float, required=True)
    bound.add_argument("--q", type=int, choices=(1, 2), default=1)
    bound.add_argument("--ddim", type=float, default=1.0)
    bound.add_argument("--delta", type=float, default=0.05)
    bound.add_argument("--eta", type=float, default=0.1)
    bound.add_argument("--empirical-risk", type=float, default=0.0)

    stats = sub.add_parser("spanner-stats", help="build a spanner and print statistics")
    add_data_args(stats)
    stats.add_argument("--spanner-delta", type=float, default=0.25)

    exp = sub.add_parser("experiment", help="run the consistency harness")
    exp.add_argument("--generator", choices=experiment.GENERATORS, default="cube-l2")
    exp.add_argument("--dim", type=int, default=1)
    exp.add_argument("--schedule", default="50,100,200,400",
                     help="comma-separated increasing sample sizes")
    exp.add_argument("--noise", type=float, default=0.0)
    exp.add_argument("--target", choices=experiment.TARGETS, default="linear")
    exp.add_argument("--q", type=int, choices=(1, 2), default=1)
    exp.add_argument("--eta", type=float, default=0.1)
    exp.add_argument("--lipschitz-rule", default="log",
                     help='"log" or "fixed:<value>"')
    exp.add_argument("--test-draws", type=int, default=2000)
    exp.add_argument("--output", required=True, help="output CSV path")
    exp.add_argument("--figure", default=None, help="optional rendered plot path")

    return top


def _load_dataset(args) -> tuple[Dataset, list[str]]:
    if args.points and args.matrix:
        raise DataError("give either --points or --matrix, not both")
    if args.points:
        coords, labels, ids = modelio.load_points_csv(args.points)
        return Dataset.from_points(coords, labels, metric=args.metric), ids
    if args.matrix:
        if not args.labels:
            raise DataError("--matrix needs --labels")
        dm, labels, ids = modelio.load_matrix_csv(args.matrix, args.labels)
        return Dataset.from_matrix(dm, labels), ids
    raise DataError("no input data: give --points or --matrix")


def _cmd_fit(args) -> int:
    raw, ids = _load_dataset(args)
    d = normalize_diameter(raw)
    sp_graph = spanner.build_spanner(d, args.spanner_delta)
    ddim = estimate_ddim(d) if d.n > 1 else 0.0
    if args.lipschitz is not None:
        _, values = srm.search_r(d, sp_graph, args.lipschitz, args.q, args.eta)
        params = BoundParams(n=d.n, L=args.lipschitz, q=args.q, ddim=ddim,
                             delta_conf=args.delta, eta=args.eta)
        risk = srm.empirical_risk(values, d.labels, args.q)
        h = srm.Hypothesis(values=values, lipschitz_budget=args.lipschitz,
                           eta=args.eta, q=args.q,
                           risk_report=total_bound(min(1.0, risk), params, args.eta))
    else:
        h = srm.search_L(d, sp_graph, args.q, args.eta, args.delta, ddim)
    text = modelio.serialize_model(h, d, ids, args.delta, args.spanner_delta)
    with open(args.model, "w") as fh:
        fh.write(text)
    sys.stdout.write(modelio.format_report(h.risk_report, args.format))
    return EXIT_OK


def _cmd_predict(args) -> int:
    with open(args.model) as fh:
        h, d, _, meta = modelio.parse_model(fh.read())
    matrix_mode = meta["metric"] == "matrix"
    qids, rows = modelio.load_queries_csv(args.queries, matrix_mode, n=int(meta["points"]))
    if len(qids) == 0:
        raise DataError("query file has no rows")
    if not matrix_mode and rows.shape[1] != d.points.shape[1]:
        raise DataError("query dimension does not match the model's points")
    predictor = extension.build_predictor(h, d, h.eta)
    # model coordinates are stored in the normalized frame; queries arrive raw
    preds = predictor.predict_many(rows * d.scale)
    out = sys.stdout if args.output == "-" else open(args.output, "w")
    try:
        out.write("id,prediction\n")
        for qid, v in zip(qids, preds):
            out.write(f"{qid},{v:.9g}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_bound(args) -> int:
    params = BoundParams(n=args.n, L=args.lipschitz, q=args.q, ddim=args.ddim,
                         delta_conf=args.delta, eta=args.eta)
    rep = total_bound(args.empirical_risk, params, args.eta)
    sys.stdout.write(modelio.format_report(rep, args.format))
    return EXIT_OK


def _cmd_spanner_stats(args) -> int:
    raw, _ = _load_dataset(args)
    d = normalize_diameter(raw)
    g = spanner.build_spanner(d, args.spanner_delta)
    degrees = np.zeros(g.n, dtype=int)
    for i, j in g.edges:
        degrees[i] += 1
        degrees[j] += 1
    rows = [
        ("points", g.n),
        ("edges", len(g.edges)),
        ("max_degree", int(degrees.max()) if g.n else 0),
        ("hop_cap", g.hop_cap),
    ]
    if g.n <= 2048 and g.n > 1:
        W = spanner.hop_bounded_distances(g.weight_matrix(), g.hop_cap)
        off = ~np.eye(g.n, dtype=bool) & (d.dmatrix > 0)
        stretch = float((W[off] / d.dmatrix[off]).max()) if off.any() else 1.0
        rows.append(("max_stretch", stretch))
        rows.append(("hop_diameter", g.hop_diameter()))
    if args.format == "csv":
        sys.stdout.write(",".join(k for k, _ in rows) + "\n")
        sys.stdout.write(",".join(_num(v) for _, v in rows) + "\n")
    else:
        width = max(len(k) for k, _ in rows)
        for k, v in rows:
            sys.stdout.write(f"{k:<{width}}  {_num(v)}\n")
    return EXIT_OK


def _num(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else f"{v:.9g}"


def _cmd_experiment(args) -> int:
    try:
        schedule = tuple(int(s) for s in args.schedule.split(","))
    except ValueError as exc:
        raise DataError(f"bad schedule: {exc}") from exc
    cfg = experiment.ExperimentConfig(
        generator=args.generator, dim=args.dim, n_schedule=schedule,
        noise=args.noise, target=args.target, seed=args.seed, q=args.q,
        eta=args.eta, lipschitz_rule=args.lipschitz_rule,
        test_draws=args.test_draws,
    )
    result = experiment.run_consistency_experiment(cfg)
    with open(args.output, "w") as fh:
        fh.write(result.to_csv())
    if args.figure:
        experiment.render_figure(result, args.figure)
    return EXIT_OK


_COMMANDS = {
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "bound": _cmd_bound,
    "spanner-stats": _cmd_spanner_stats,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (DataError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except BudgetExhaustedError as exc:
        sys.stderr.write(f"solver budget exhausted: {exc}\n")
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
