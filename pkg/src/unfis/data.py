"""Dataset ingestion, seeded splits and z-score normalization.

A dataset is a CSV file with a header row plus a schema file (INI syntax)
declaring each column's role::

    [dataset]
    name = heart
    label = class
    positive = 2
    missing = ?

    [columns]
    age = feature real
    sex = feature category
    class = label

    [category.sex]
    male = 0
    female = 1

Columns not listed are rejected; use ``ignore`` to skip one explicitly.
"""

import configparser
import csv
import hashlib
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import IngestionError

SCHEMA_DIR = Path(__file__).parent / "schemas"
DEFAULT_MISSING = ("", "?", "NA", "nan")


@dataclass(frozen=True)
class Schema:
    name: str
    label: str
    features: tuple
    ignored: tuple = ()
    categories: dict = field(default_factory=dict)
    class_order: tuple = ()
    positive: str = None
    missing: tuple = DEFAULT_MISSING
    path: str = None

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        if not path.is_file():
            raise IngestionError(f"schema file not found: {path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        parser.optionxform = str
        try:
            parser.read(path)
            meta = parser["dataset"]
            columns = parser["columns"]
        except (configparser.Error, KeyError) as exc:
            raise IngestionError(f"malformed schema {path}: {exc}") from exc

        features, ignored, label = [], [], None
        for column, decl in columns.items():
            parts = decl.split()
            role = parts[0] if parts else ""
            if role == "feature":
                features.append(column)
            elif role == "label":
                label = column
            elif role == "ignore":
                ignored.append(column)
            else:
                raise IngestionError(f"column '{column}' has unknown role '{decl}' in {path}")
        label = meta.get("label", label)
        if label is None:
            raise IngestionError(f"schema {path} declares no label column")

        categories = {}
        for section in parser.sections():
            if section.startswith("category."):
                column = section.split(".", 1)[1]
                categories[column] = {k: float(v) for k, v in parser[section].items()}
        for column, decl in columns.items():
            if "category" in decl.split()[1:] and column != label and column not in categories:
                raise IngestionError(f"categorical column '{column}' has no [category.{column}] map")

        order = tuple(v.strip() for v in meta.get("classes", "").split(",") if v.strip())
        missing = meta.get("missing")
        missing = tuple(v.strip() for v in missing.split(",")) if missing else DEFAULT_MISSING
        return cls(
            name=meta.get("name", path.stem), label=label, features=tuple(features),
            ignored=tuple(ignored), categories=categories, class_order=order,
            positive=meta.get("positive") or None, missing=missing, path=str(path),
        )


def bundled_schema(name):
    return Schema.from_file(SCHEMA_DIR / f"{name}.ini")


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    class_names: tuple
    feature_names: tuple
    positive: int = None
    name: str = ""
    source: str = ""
    dropped: int = 0
    indices: np.ndarray = None

    def __len__(self):
        return len(self.X)

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def n_classes(self):
        return self.Y.shape[1]

    @property
    def labels(self):
        return np.argmax(self.Y, axis=1)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        base = self.indices if self.indices is not None else np.arange(len(self))
        return replace(self, X=self.X[idx], Y=self.Y[idx], indices=base[idx])


def one_hot(labels, n_classes):
    return np.eye(n_classes)[np.asarray(labels, dtype=int)]


def load_csv(path, schema):
    """Parse a headed CSV according to ``schema``.

    Rows containing a missing-value marker in a used column are dropped and
    counted in ``Dataset.dropped``.
    """
    if not isinstance(schema, Schema):
        schema = Schema.from_file(schema)
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"dataset file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestionError(f"dataset file is empty: {path}")
    header = [h.strip() for h in rows[0]]
    declared = set(schema.features) | set(schema.ignored) | {schema.label}
    for col, name in enumerate(header):
        if name not in declared:
            raise IngestionError(f"unknown column '{name}'", row=1, column=col + 1)
    for name in declared:
        if name not in header:
            raise IngestionError(f"schema column '{name}' missing from {path}")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if not body:
        raise IngestionError(f"dataset file has no data rows: {path}")

    feat_cols = [header.index(f) for f in schema.features]
    label_col = header.index(schema.label)
    missing = set(schema.missing)
    X, raw_labels, dropped = [], [], 0
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise IngestionError(f"expected {len(header)} cells, found {len(row)}", row=r)
        cells = [row[c].strip() for c in feat_cols]
        label = row[label_col].strip()
        if label in missing or any(c in missing for c in cells):
            dropped += 1
            continue
        values = []
        for name, col, cell in zip(schema.features, feat_cols, cells):
            if name in schema.categories:
                mapping = schema.categories[name]
                if cell not in mapping:
                    raise IngestionError(f"unmapped category '{cell}' for '{name}'", row=r, column=col + 1)
                values.append(mapping[cell])
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise IngestionError(f"cannot parse '{cell}' as a number", row=r, column=col + 1) from None
        X.append(values)
        raw_labels.append(label)
    if not X:
        raise IngestionError(f"no complete rows left in {path} after dropping {dropped}")

    classes = schema.class_order or tuple(sorted(set(raw_labels), key=_label_key))
    lookup = {c: i for i, c in enumerate(classes)}
    for r, label in enumerate(raw_labels):
        if label not in lookup:
            raise IngestionError(f"label '{label}' not declared in schema classes", column=label_col + 1)
    labels = [lookup[v] for v in raw_labels]
    positive = None
    if schema.positive is not None:
        if schema.positive not in lookup:
            raise IngestionError(f"positive label '{schema.positive}' never occurs in {path}")
        positive = lookup[schema.positive]
    return Dataset(
        X=np.asarray(X, dtype=float), Y=one_hot(labels, len(classes)),
        class_names=classes, feature_names=tuple(schema.features), positive=positive,
        name=schema.name, source=str(path), dropped=dropped,
    )


def _label_key(value):
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 0
    repetition: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train fraction must lie in (0, 1)")


def train_size(N, fraction):
    # guard against 0.7 * 150 == 104.99999999999999
    return int(math.floor(fraction * N + 1e-9))


def split(dataset, spec=SplitSpec()):
    """Seeded random train/test split.

    The first ``floor(fraction * N)`` rows of a permutation drawn from
    ``default_rng((seed, repetition))`` form the training view. With
    ``stratified`` the same fraction is taken from every class separately.
    """
    rng = np.random.default_rng((spec.seed, spec.repetition))
    N = len(dataset)
    if spec.stratified:
        train_idx, test_idx = [], []
        labels = dataset.labels
        for c in range(dataset.n_classes):
            members = np.flatnonzero(labels == c)
            members = members[rng.permutation(len(members))]
            k = train_size(len(members), spec.train_fraction)
            train_idx.append(members[:k])
            test_idx.append(members[k:])
        train_idx = np.sort(np.concatenate(train_idx))
        test_idx = np.sort(np.concatenate(test_idx))
    else:
        perm = rng.permutation(N)
        k = train_size(N, spec.train_fraction)
        train_idx, test_idx = perm[:k], perm[k:]
    return dataset.subset(train_idx), dataset.subset(test_idx)


@dataclass(frozen=True)
class Normalization:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=float)
        std = X.std(axis=0)
        # zero-variance features map to 0 and invert exactly
        return cls(mean=X.mean(axis=0), scale=np.where(std > 0, std, 1.0))

    @classmethod
    def identity(cls, n):
        return cls(mean=np.zeros(n), scale=np.ones(n))

    def apply(self, X):
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def invert(self, Z):
        return np.asarray(Z, dtype=float) * self.scale + self.mean


def normalize(train, test):
    """Z-score both views with statistics of the training view only."""
    stats = Normalization.fit(train.X)
    return replace(train, X=stats.apply(train.X)), replace(test, X=stats.apply(test.X)), stats


def file_checksum(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_manifest(path=SCHEMA_DIR / "checksums.txt"):
    manifest = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            digest, name = line.split()
            manifest[name] = digest
    return manifest


def verify_checksum(path, manifest=None):
    """True/False against the manifest entry for this file name, None if unpinned."""
    manifest = load_manifest() if manifest is None else manifest
    expected = manifest.get(Path(path).name)
    if expected is None:
        return None
    return file_checksum(path) == expected
