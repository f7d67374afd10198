"""Accuracy, AUC and active-feature tables for UNFIS and its FNN baseline.

    python scripts/reproduce_tables.py [--data data] [--reps 30] [--out runs/tables]

Runs every dataset present in ``--data`` with the default configuration
(R=2, M=32, lambda=1e3, eta=1e-3, beta=0.9, 100 iterations) on paired splits.
"""

import argparse
import time
from dataclasses import replace
from pathlib import Path

from unfis.data import bundled_schema, load_csv
from unfis.evaluation import format_tables, run_experiment, write_repetitions_csv, write_summary_csv
from unfis.optimizers import TrainConfig

DATASETS = ("haberman", "cryotherapy", "heart", "autism", "iris", "thyroid", "wine")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="data")
    parser.add_argument("--reps", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="runs/tables")
    parser.add_argument("--init-logit", type=float, default=TrainConfig().init_logit)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = TrainConfig(init_logit=args.init_logit)
    everything = []
    for name in DATASETS:
        path = Path(args.data) / f"{name}.csv"
        if not path.exists():
            print(f"== {name}: {path} not found, skipped\n")
            continue
        dataset = load_csv(path, bundled_schema(name))
        started = time.perf_counter()
        pair = [
            run_experiment(dataset, config, args.reps, args.seed),
            run_experiment(dataset, replace(config, selection=False), args.reps, args.seed),
        ]
        everything += pair
        print(f"== {name} ({time.perf_counter() - started:.0f} s)")
        print(format_tables(pair) + "\n")
    if everything:
        write_summary_csv(everything, out / "summary.csv")
        write_repetitions_csv(everything, out / "repetitions.csv")
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
