"""Write the packaged benchmark datasets to ``data/`` and verify their checksums.

    python scripts/fetch_datasets.py [--dest data]

Iris and Wine need scikit-learn; Heart and Haberman need the ``keel_ds``
wheel (``pip install --no-deps keel_ds``). Thyroid, Cryotherapy and Autism
have no packaged source; place ``thyroid.csv``, ``cryotherapy.csv`` and
``autism.csv`` in the same directory by hand, with the columns listed in
their schema files under ``src/unfis/schemas``.
"""

import argparse
from pathlib import Path

from unfis.data import bundled_schema, load_csv, verify_checksum
from unfis.sources import USER_SUPPLIED, export_all


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default="data")
    args = parser.parse_args()
    dest = Path(args.dest)
    written, missing = export_all(dest)
    for name, path in written.items():
        d = load_csv(path, bundled_schema(name))
        status = {True: "checksum ok", False: "CHECKSUM MISMATCH", None: "unpinned"}[verify_checksum(path)]
        print(f"{name:<12} {len(d):>5} rows  {d.n_features:>3} features  {d.n_classes} classes  {status}")
    for name, reason in missing.items():
        print(f"{name:<12} not written: {reason}")
    for name in USER_SUPPLIED:
        path = dest / f"{name}.csv"
        print(f"{name:<12} {'present' if path.exists() else 'absent (supply by hand)'}")


if __name__ == "__main__":
    main()
