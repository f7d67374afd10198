"""Command-line entry point: ``unfis <command> [flags]``.

Every flag default can be overridden by an environment variable named
``UNFIS_<FLAG>`` (upper case, dashes as underscores), e.g. ``UNFIS_RULES=3``.
Explicit flags win over the environment.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .data import SCHEMA_DIR, SplitSpec, file_checksum, load_csv, normalize, split
from .errors import InvalidParameterError, PersistenceError, UnfisError
from .evaluation import (
    evaluate, format_tables, run_experiment, write_repetitions_csv, write_summary_csv,
)
from .gradients import format_report, gradient_check, report_rows
from .initialization import init_params
from .io import TrainedModel, load_model, save_model
from .optimizers import OPTIMIZERS, TrainConfig, train
from .rules import extract_rules, render_text

ENV_PREFIX = "UNFIS_"


def _env(name, default, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    if cast is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"unfis: error[usage]: bad value {raw!r} for {ENV_PREFIX}{name.upper()}")


def _dataset_flags(p, required=True):
    p.add_argument("--dataset", default=_env("dataset", None), required=required and not _env("dataset", None),
                   help="CSV file with a header row")
    p.add_argument("--schema", default=_env("schema", None),
                   help="schema file; defaults to the bundled schema named after the CSV")
    p.add_argument("--seed", type=int, default=_env("seed", 0, int), help="base seed")
    p.add_argument("--stratified", action="store_true", default=_env("stratified", False, bool))
    p.add_argument("--out", default=_env("out", None), help="output directory for this run")


def _train_flags(p):
    d = TrainConfig()
    p.add_argument("--rules", type=int, default=_env("rules", d.rules, int))
    p.add_argument("--batch", type=int, default=_env("batch", d.batch_size, int))
    p.add_argument("--lambda", dest="damping", type=float, default=_env("lambda", d.damping, float))
    p.add_argument("--eta", type=float, default=_env("eta", d.eta, float),
                   help="GqLM step scale (the lm baseline takes plain steps)")
    p.add_argument("--beta", type=float, default=_env("beta", d.beta, float))
    p.add_argument("--iters", type=int, default=_env("iters", d.iterations, int))
    p.add_argument("--lr", type=float, default=_env("lr", d.learning_rate, float),
                   help="step size of the sgd and momentum baselines")
    p.add_argument("--epsilon", type=float, default=_env("epsilon", d.epsilon, float))
    p.add_argument("--init-logit", type=float, default=_env("init_logit", d.init_logit, float),
                   help="initial selection logit of every gate")
    p.add_argument("--fnn", action="store_true", default=_env("fnn", False, bool),
                   help="disable fuzzy selection (structured-rule baseline)")


def _optimizer_flag(p):
    p.add_argument("--optimizer", choices=OPTIMIZERS, default=_env("optimizer", "gqlm"))


def build_parser():
    parser = argparse.ArgumentParser(prog="unfis", description="UNFIS neuro-fuzzy classifier")
    parser.add_argument("--version", action="version", version=f"unfis {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model on one split")
    _dataset_flags(p)
    _train_flags(p)
    _optimizer_flag(p)
    p.add_argument("--threshold", type=float, default=_env("threshold", 0.5, float))

    p = sub.add_parser("eval", help="evaluate a saved model")
    p.add_argument("--model", required=True)
    _dataset_flags(p)
    p.add_argument("--all", action="store_true", help="evaluate on every row instead of the test split")

    p = sub.add_parser("experiment", help="repeated random-split experiment")
    _dataset_flags(p)
    _train_flags(p)
    _optimizer_flag(p)
    p.add_argument("--reps", type=int, default=_env("reps", 30, int))
    p.add_argument("--with-fnn", action="store_true", default=_env("with_fnn", False, bool),
                   help="also run the structured-rule baseline on the same splits")

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference Jacobian")
    _dataset_flags(p)
    _train_flags(p)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--step", type=float, default=1e-6)
    p.add_argument("--tol", type=float, default=1e-4)

    p = sub.add_parser("inspect", help="print the rules of a saved model or an initialization report")
    p.add_argument("--model", default=None)
    _dataset_flags(p, required=False)
    p.add_argument("--rules", type=int, default=_env("rules", 2, int))
    p.add_argument("--threshold", type=float, default=_env("threshold", 0.5, float))
    p.add_argument("--json", action="store_true", help="print the machine-readable report")

    p = sub.add_parser("compare-optim", help="paired comparison of the optimizers")
    _dataset_flags(p)
    _train_flags(p)
    p.add_argument("--reps", type=int, default=_env("reps", 30, int))
    p.add_argument("--optimizers", default=_env("optimizers", ",".join(OPTIMIZERS)),
                   help="comma-separated subset of " + ",".join(OPTIMIZERS))
    return parser


def _schema_path(args):
    if args.schema:
        return Path(args.schema)
    guess = SCHEMA_DIR / f"{Path(args.dataset).stem}.ini"
    if not guess.exists():
        raise InvalidParameterError(f"no --schema given and no bundled schema named {guess.name}")
    return guess


def _load(args):
    schema = _schema_path(args)
    return load_csv(args.dataset, schema), schema


def _config(args, optimizer=None):
    return TrainConfig(
        batch_size=args.batch, damping=args.damping, eta=args.eta, beta=args.beta,
        iterations=args.iters, rules=args.rules,
        optimizer=optimizer or getattr(args, "optimizer", "gqlm"), seed=args.seed,
        epsilon=args.epsilon, learning_rate=args.lr, selection=not args.fnn,
        init_logit=args.init_logit,
    )


def _out_dir(args, default):
    out = Path(args.out) if args.out else Path("runs") / default
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PersistenceError(f"cannot create {out}: {exc}") from exc
    return out


def _write_snapshot(out, args, schema, config=None):
    snapshot = {
        "version": __version__,
        "command": args.command,
        "flags": {k: v for k, v in vars(args).items() if k != "command"},
        "config": config.to_dict() if config is not None else None,
        "dataset_sha256": file_checksum(args.dataset) if args.dataset else None,
        "schema_sha256": file_checksum(schema) if schema else None,
        "environment": {k: v for k, v in os.environ.items() if k.startswith(ENV_PREFIX)},
    }
    (out / "snapshot.json").write_text(json.dumps(snapshot, indent=1, sort_keys=True) + "\n")


def _prepared_split(args, dataset):
    train_view, test_view = split(dataset, SplitSpec(seed=args.seed, stratified=args.stratified))
    return normalize(train_view, test_view)


def cmd_train(args):
    dataset, schema = _load(args)
    config = _config(args)
    train_view, test_view, stats = _prepared_split(args, dataset)
    params, _ = init_params(train_view.X, train_view.Y, config.rules, seed=args.seed,
                            selection=config.selection, epsilon=config.epsilon,
                            initial_logit=config.init_logit)
    params, history = train(train_view.X, train_view.Y, config, params, test_view.X, test_view.Y)
    model = TrainedModel(params, stats, dataset.class_names, dataset.feature_names,
                         dataset.positive, dataset.name)
    out = _out_dir(args, f"{dataset.name}-train-seed{args.seed}")
    save_model(model, out / "model.json")
    history.write_csv(out / "history.csv")
    report = extract_rules(model, args.threshold)
    (out / "rules.txt").write_text(render_text(report))
    (out / "rules.json").write_text(report.to_json() + "\n")
    _write_snapshot(out, args, schema, config)
    acc, score = evaluate(params, test_view.X, test_view.Y, dataset.positive)
    line = f"{dataset.name}: optimizer={config.optimizer} test accuracy {acc:.2f}%"
    if not np.isnan(score):
        line += f", AUC {score:.4f}"
    print(line)
    print(f"wrote {out}")
    return 0


def cmd_eval(args):
    model = load_model(args.model)
    dataset, _ = _load(args)
    if tuple(dataset.feature_names) != tuple(model.feature_names):
        raise InvalidParameterError("dataset features do not match the model")
    view = dataset if args.all else split(dataset, SplitSpec(seed=args.seed, stratified=args.stratified))[1]
    X = model.normalization.apply(view.X)
    acc, score = evaluate(model.params, X, view.Y, dataset.positive)
    scope = "all rows" if args.all else f"test split (seed {args.seed})"
    line = f"{dataset.name} {scope}: accuracy {acc:.2f}%"
    if not np.isnan(score):
        line += f", AUC {score:.4f}"
    print(line)
    return 0


def cmd_experiment(args):
    dataset, schema = _load(args)
    config = _config(args)
    summaries = [run_experiment(dataset, config, args.reps, args.seed)]
    if args.with_fnn and config.selection:
        summaries.append(run_experiment(dataset, replace(config, selection=False), args.reps, args.seed))
    out = _out_dir(args, f"{dataset.name}-experiment-seed{args.seed}")
    text = format_tables(summaries)
    (out / "summary.txt").write_text(text + "\n")
    write_summary_csv(summaries, out / "summary.csv")
    write_repetitions_csv(summaries, out / "repetitions.csv")
    _write_snapshot(out, args, schema, config)
    print(text)
    print(f"wrote {out}")
    return 0


def cmd_gradcheck(args):
    dataset, schema = _load(args)
    config = _config(args)
    train_view, _, _ = _prepared_split(args, dataset)
    params, _ = init_params(train_view.X, train_view.Y, config.rules, seed=args.seed,
                            selection=config.selection, epsilon=config.epsilon,
                            initial_logit=config.init_logit)
    samples = train_view.X[: args.samples]
    report = gradient_check(params, samples, args.step, args.tol)
    print(format_report(report))
    if args.out:
        out = _out_dir(args, "")
        with open(out / "gradcheck.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["block", "max_abs", "max_rel", "verdict"])
            writer.writeheader()
            writer.writerows(report_rows(report))
    return 0 if all(r.passed for r in report) else 1


def cmd_inspect(args):
    if args.model:
        model = load_model(args.model)
        report = extract_rules(model, args.threshold)
        print(report.to_json() if args.json else render_text(report))
        return 0
    if not args.dataset:
        raise InvalidParameterError("inspect needs --model or --dataset")
    dataset, _ = _load(args)
    train_view, _, _ = _prepared_split(args, dataset)
    _, init_report = init_params(train_view.X, train_view.Y, args.rules, seed=args.seed)
    print(init_report.to_text(list(dataset.feature_names)))
    return 0


def cmd_compare_optim(args):
    names = [n.strip() for n in args.optimizers.split(",") if n.strip()]
    unknown = [n for n in names if n not in OPTIMIZERS]
    if unknown or not names:
        raise InvalidParameterError(f"unknown optimizer(s): {', '.join(unknown) or '(none)'}")
    dataset, schema = _load(args)
    config = _config(args, optimizer="gqlm")
    summaries = [
        run_experiment(dataset, replace(config, optimizer=name), args.reps, args.seed, label=name)
        for name in names
    ]
    out = _out_dir(args, f"{dataset.name}-compare-seed{args.seed}")
    lines = [f"{'optimizer':<10}{'accuracy (%)':>18}{'AUC':>18}"]
    for s in summaries:
        (am, asd), (um, usd) = s.accuracy, s.auc
        auc_txt = "-" if np.isnan(um) else f"{um:.4f}+/-{usd:.4f}"
        lines.append(f"{s.label:<10}{f'{am:.2f}+/-{asd:.2f}':>18}{auc_txt:>18}")
    text = "\n".join(lines)
    (out / "compare.txt").write_text(text + "\n")
    write_summary_csv(summaries, out / "compare.csv")
    write_repetitions_csv(summaries, out / "repetitions.csv")
    _write_snapshot(out, args, schema, config)
    print(text)
    print(f"wrote {out}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "experiment": cmd_experiment,
    "gradcheck": cmd_gradcheck,
    "inspect": cmd_inspect,
    "compare-optim": cmd_compare_optim,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UnfisError as exc:
        print(f"unfis: error[{exc.category}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"unfis: error[io]: {exc}", file=sys.stderr)
        return PersistenceError.exit_code


if __name__ == "__main__":
    sys.exit(main())
