"""Paired comparison of GqLM, LM, SGD and Momentum on the multiclass datasets.

    python scripts/compare_optimizers.py [--data data] [--reps 30] [--lr 1e-2]
"""

import argparse
from dataclasses import replace
from pathlib import Path

from unfis.data import bundled_schema, load_csv
from unfis.evaluation import run_experiment, write_summary_csv
from unfis.optimizers import OPTIMIZERS, TrainConfig


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="data")
    parser.add_argument("--datasets", default="iris,wine,thyroid,heart,haberman")
    parser.add_argument("--reps", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lr", type=float, default=TrainConfig().learning_rate)
    parser.add_argument("--out", default="runs/optimizers")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = TrainConfig(learning_rate=args.lr)
    rows = []
    print(f"{'dataset':<12}" + "".join(f"{o:>18}" for o in OPTIMIZERS))
    for name in args.datasets.split(","):
        path = Path(args.data) / f"{name}.csv"
        if not path.exists():
            print(f"{name:<12} (not found)")
            continue
        dataset = load_csv(path, bundled_schema(name))
        summaries = [run_experiment(dataset, replace(config, optimizer=o), args.reps, args.seed, label=o)
                     for o in OPTIMIZERS]
        rows += summaries
        print(f"{name:<12}" + "".join(f"{s.accuracy[0]:>11.2f}+/-{s.accuracy[1]:<5.2f}" for s in summaries))
    if rows:
        write_summary_csv(rows, out / "optimizers.csv")
        print(f"wrote {out / 'optimizers.csv'}")


if __name__ == "__main__":
    main()
