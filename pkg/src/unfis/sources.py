"""Write the benchmark datasets that ship inside installable packages as headed CSVs.

Iris and Wine come from scikit-learn. Statlog Heart and Haberman come from
the KEEL files bundled in the ``keel_ds`` wheel; that package pins an old
numpy, so install it with ``pip install --no-deps keel_ds``. Its files are
read directly and the package is never imported.

Thyroid (three-class), Cryotherapy and Autism are not available from any
package and must be supplied by the user in the format of their schema.
"""

import csv
import importlib.util
from pathlib import Path

from .data import bundled_schema

EXPORTABLE = ("iris", "wine", "heart", "haberman")
USER_SUPPLIED = ("thyroid", "cryotherapy", "autism")


class SourceUnavailable(RuntimeError):
    pass


def _keel_rows(relpath):
    spec = importlib.util.find_spec("keel_ds")
    if spec is None or not spec.submodule_search_locations:
        raise SourceUnavailable("keel_ds is not installed (pip install --no-deps keel_ds)")
    path = Path(list(spec.submodule_search_locations)[0]) / "data" / relpath
    rows = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("@"):
            rows.append([v.strip() for v in line.split(",")])
    return rows


def _iris():
    from sklearn.datasets import load_iris

    d = load_iris()
    names = ["Iris-setosa", "Iris-versicolor", "Iris-virginica"]
    return [[*map(repr, map(float, x)), names[t]] for x, t in zip(d.data, d.target)]


def _wine():
    from sklearn.datasets import load_wine

    d = load_wine()
    return [[str(t + 1), *map(repr, map(float, x))] for x, t in zip(d.data, d.target)]


def _heart():
    rows = []
    for r in _keel_rows("balanced/raw/heart.dat"):
        values = [float(v) for v in r]
        # KEEL stores oldpeak in tenths
        values[9] = values[9] / 10.0
        rows.append([*(repr(v) for v in values[:13]), str(int(values[13]))])
    return rows


def _haberman():
    label = {"negative": "1", "positive": "2"}
    return [[str(int(float(v))) for v in r[:3]] + [label[r[3]]] for r in _keel_rows("imbalanced/raw/haberman.dat")]


READERS = {"iris": _iris, "wine": _wine, "heart": _heart, "haberman": _haberman}


def header(name):
    schema = bundled_schema(name)
    if name == "wine":
        return [schema.label, *schema.features]
    return [*schema.features, schema.label]


def export_dataset(name, dest):
    """Write ``<dest>/<name>.csv``; returns the path."""
    if name not in READERS:
        raise SourceUnavailable(f"no bundled source for dataset '{name}'")
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    path = dest / f"{name}.csv"
    rows = READERS[name]()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header(name))
        writer.writerows(rows)
    return path


def export_all(dest, names=EXPORTABLE):
    written, missing = {}, {}
    for name in names:
        try:
            written[name] = export_dataset(name, dest)
        except SourceUnavailable as exc:
            missing[name] = str(exc)
    return written, missing
