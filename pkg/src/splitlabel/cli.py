"""Command-line entry points.

Subcommands: ``run`` (one simulated labeling run), ``bench`` (budget and
splitter sweeps), ``boundcheck`` (randomized bound validity), ``serve``
(interactive session service for human labeling).
"""

import argparse
import json
import sys
import time

import numpy as np

from splitlabel import validation
from splitlabel.data import (
    DataError,
    export_labels,
    load_csv,
    simulated_oracle,
    train_eval,
)
from splitlabel.engine import Engine, RunConfig
from splitlabel.splitters import SplitterConfig


def build_config(args):
    return RunConfig(
        budget=args.budget,
        training_ratio=args.training_ratio,
        quality=args.quality,
        splitter=SplitterConfig(kind=args.splitter, seed=args.seed),
        min_split_size=args.min_split_size,
        seed=args.seed,
        early_stop=getattr(args, "early_stop", False),
    )


def _add_run_flags(parser, with_outputs=True):
    parser.add_argument("--data", required=True, help="dataset CSV (may be .gz)")
    parser.add_argument("--training-ratio", type=float, default=0.0,
                        help="probability a label goes to the isolated training set")
    parser.add_argument("--quality", type=float, default=0.85,
                        help="leaf uniformity a majority label must exceed to be inferred")
    parser.add_argument("--splitter", choices=["logistic", "kmeans2"],
                        default="kmeans2")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--min-split-size", type=int, default=10)
    if with_outputs:
        parser.add_argument("--budget", type=int, required=True,
                            help="number of oracle queries allowed")
        parser.add_argument("--out", required=True, help="labels CSV output path")
        parser.add_argument("--metrics", required=True,
                            help="per-step metrics JSONL output path")
        parser.add_argument("--summary", default=None,
                            help="summary JSON path (default: <out>.summary.json)")
        parser.add_argument("--early-stop", action="store_true",
                            help="stop once the best action no longer improves the bound")
        parser.add_argument("--eval-data", default=None,
                            help="held-out CSV for downstream model accuracy")


def cmd_run(args):
    try:
        dataset = load_csv(args.data)
    except DataError as err:
        print(err, file=sys.stderr)
        return 2
    if dataset.truth is None:
        print(f"{args.data}: no label column, cannot simulate an oracle; "
              "use 'serve' for human labeling", file=sys.stderr)
        return 2
    config = build_config(args)
    engine = Engine(config, dataset, simulated_oracle(dataset))

    start = time.perf_counter()
    with open(args.metrics, "w", newline="") as metrics_file:
        def on_step(record, _engine):
            metrics_file.write(json.dumps(record.to_dict()) + "\n")
            metrics_file.flush()

        assignment, _trace = engine.run(on_step=on_step)
    wall_time = time.perf_counter() - start

    export_labels(assignment, args.out)
    counts = assignment.counts()
    summary = {
        "size_of_Y": assignment.size_of_y(),
        "oracle_labels": counts["oracle"],
        "inferred_labels": counts["inferred"],
        "label_accuracy": assignment.accuracy(dataset.truth),
        "model_accuracy": None,
        "num_leaves": len(engine.tree.leaves),
        "budget_used": config.budget - engine.budget,
        "seed": config.seed,
        "wall_time": wall_time,
    }
    if args.eval_data is not None:
        test_dataset = load_csv(args.eval_data)
        mask = np.asarray([s != "none" for s in assignment.sources])
        summary["model_accuracy"] = train_eval(
            dataset.features[mask], assignment.labels[mask],
            test_dataset, config.splitter,
        )
    summary_path = args.summary or args.out + ".summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _csv_cell(value, fmt="%.9g"):
    return "" if value is None else (fmt % value if isinstance(value, float) else str(value))


def cmd_bench(args):
    try:
        dataset = load_csv(args.data)
    except DataError as err:
        print(err, file=sys.stderr)
        return 2
    if dataset.truth is None:
        print(f"{args.data}: benchmark needs a label column", file=sys.stderr)
        return 2
    test_dataset = dataset if args.eval_data is None else load_csv(args.eval_data)

    budgets = [int(b) for b in args.budgets.split(",") if b]
    splitters = [s for s in args.splitters.split(",") if s]
    seeds = [int(s) for s in args.seeds.split(",") if s]
    header = ("budget,splitter,seed,size_of_Y,oracle_labels,inferred_labels,"
              "label_accuracy,model_accuracy,num_leaves,budget_used")
    rows = [header]
    for budget in budgets:
        for splitter in splitters:
            for seed in seeds:
                config = RunConfig(
                    budget=budget, training_ratio=args.training_ratio,
                    quality=args.quality,
                    splitter=SplitterConfig(kind=splitter, seed=seed),
                    min_split_size=args.min_split_size, seed=seed,
                )
                engine = Engine(config, dataset, simulated_oracle(dataset))
                assignment, _ = engine.run()
                counts = assignment.counts()
                mask = np.asarray([s != "none" for s in assignment.sources])
                model_accuracy = None
                if mask.any():
                    model_accuracy = train_eval(
                        dataset.features[mask], assignment.labels[mask],
                        test_dataset, config.splitter,
                    )
                cells = [budget, splitter, seed, assignment.size_of_y(),
                         counts["oracle"], counts["inferred"],
                         assignment.accuracy(dataset.truth), model_accuracy,
                         len(engine.tree.leaves), config.budget - engine.budget]
                rows.append(",".join(_csv_cell(c) for c in cells))
                print(rows[-1])
    with open(args.out, "w", newline="") as fh:
        fh.write("\n".join(rows) + "\n")
    return 0


def cmd_boundcheck(args):
    agreement = validation.grid_agreement(num_stats=args.stats, seed=args.seed)
    print(f"grid agreement over {agreement.num_stats} stats: "
          f"failures {agreement.failures}, "
          f"worst |diff| {agreement.worst_abs_diff:.3g}, "
          f"worst below raw grid {agreement.worst_below_raw_grid:.3g}")
    ok = agreement.failures == 0

    cells = validation.mc_table(trials=args.trials, seed=args.seed)
    # One fully sampled cell: the bound can never exceed n = N correct labels.
    cells.append(validation.mc_cell(0.8, 1000, N=1000, trials=min(args.trials, 500),
                                    seed=args.seed))
    for cell in cells:
        passed = cell.rate <= 0.05
        if cell.n == cell.N:
            passed = cell.violations == 0
        ok = ok and passed
        tag = " (fully sampled)" if cell.n == cell.N else ""
        print(f"mc p={cell.p:.2f} n={cell.n}{tag}: rate {cell.rate:.4f} "
              f"({cell.violations}/{cell.trials}) {'ok' if passed else 'VIOLATION'}")
    return 0 if ok else 1


def cmd_serve(args):
    import uvicorn

    from splitlabel.service import create_app

    datasets = {}
    for path in args.data:
        name = path.rsplit("/", 1)[-1].split(".")[0]
        render_hint = None
        if args.render_hint:
            height, width = args.render_hint.split(",")
            render_hint = (int(height), int(width))
        datasets[name] = load_csv(path, render_hint=render_hint)
    default_config = None
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        splitter = SplitterConfig(**raw.pop("splitter", {"kind": "kmeans2"}))
        default_config = RunConfig(splitter=splitter, **raw)
    app = create_app(datasets, default_config=default_config,
                     checkpoint_dir=args.checkpoint_dir, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="splitlabel",
        description="Budget-constrained active labeling by greedy "
                    "split-and-label bound maximization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="one labeling run against the simulated oracle")
    _add_run_flags(run)
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="sweep budgets x splitters x seeds")
    _add_run_flags(bench, with_outputs=False)
    bench.add_argument("--budgets", default="", help="comma-separated budgets")
    bench.add_argument("--splitters", default="", help="comma-separated splitter kinds")
    bench.add_argument("--seeds", default="", help="comma-separated seeds")
    bench.add_argument("--out", required=True, help="result table CSV path")
    bench.add_argument("--eval-data", default=None)
    bench.set_defaults(func=cmd_bench)

    boundcheck = sub.add_parser(
        "boundcheck", help="randomized bound validity and grid agreement checks"
    )
    boundcheck.add_argument("--trials", type=int, default=2000,
                            help="Monte-Carlo trials per cell")
    boundcheck.add_argument("--stats", type=int, default=1000,
                            help="randomized statistics for grid agreement")
    boundcheck.add_argument("--seed", type=int, default=0)
    boundcheck.set_defaults(func=cmd_boundcheck)

    serve = sub.add_parser("serve", help="host the labeling session service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data", action="append", required=True,
                       help="dataset CSV to register (repeatable)")
    serve.add_argument("--config", default=None,
                       help="JSON file with default run configuration")
    serve.add_argument("--render-hint", default=None,
                       help="height,width for image datasets (e.g. 28,28)")
    serve.add_argument("--checkpoint-dir", default=None,
                       help="directory for per-session state snapshots")
    serve.add_argument("--static", default=None,
                       help="directory with the labeling console build to serve at /")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
