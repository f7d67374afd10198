"""Shared builders for the test suite."""

import os
from pathlib import Path

import numpy as np

from unfis.core import ModelParams
from unfis.data import bundled_schema, load_csv
from unfis.sources import EXPORTABLE, export_dataset

REPO = Path(__file__).resolve().parents[1]


def random_params(rng, R, n, C, selection=True, logit_scale=2.0):
    return ModelParams(
        centers=rng.normal(size=(R, n)),
        widths=rng.uniform(0.5, 2.0, size=(R, n)),
        logits=rng.normal(scale=logit_scale, size=(R, n)),
        consequents=rng.normal(size=(R, C, n + 1)),
        thresholds=rng.normal(size=C),
        selection=selection,
    )


def data_dirs():
    dirs = []
    if os.environ.get("UNFIS_DATA_DIR"):
        dirs.append(Path(os.environ["UNFIS_DATA_DIR"]))
    dirs.append(REPO / "data")
    return dirs


def locate_dataset(name, scratch):
    """CSV for ``name``: a user data directory first, else an export into ``scratch``."""
    for d in data_dirs():
        path = d / f"{name}.csv"
        if path.is_file():
            return path
    if name in EXPORTABLE:
        return export_dataset(name, scratch)
    return None


def load_named(name, scratch):
    path = locate_dataset(name, scratch)
    if path is None:
        raise FileNotFoundError(
            f"{name}.csv not found in {', '.join(map(str, data_dirs()))}; "
            f"this dataset has no packaged source and must be supplied"
        )
    return load_csv(path, bundled_schema(name))
