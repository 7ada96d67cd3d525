"""CSV ingestion for real-world regression tables.

Loads a header-based CSV, keeps only the named feature/target columns,
drops rows with missing cells (counted, not silently), applies optional
per-column transforms, and splits into disjoint train/test subsets.

Five built-in presets encode the column selections used by the bundled
benchmarks; the caller supplies the file path.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .datasets import Dataset

__all__ = [
    "IngestSpec",
    "CsvFormatError",
    "load_csv",
    "split",
    "ingest",
    "preset_spec",
    "preset_names",
    "invert_target",
    "export_csv",
    "PRESETS",
]

_MISSING_TOKENS = {"", "na", "nan", "n/a", "null", "?"}
_TRANSFORMS = ("identity", "ln1p")
_SPLIT_STREAM_CODE = 4


class CsvFormatError(ValueError):
    """Structural problem in the input table (bad column, bad cell, no rows)."""


@dataclass(frozen=True)
class IngestSpec:
    path: str
    target: str
    features: tuple
    n_train: int
    n_test: int
    transforms: dict = field(default_factory=dict)
    split_seed: int = 0
    noise_var: float = None  # None: estimate as 0.1^2 * Var(y_train)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise ValueError("feature list must be non-empty")
        if self.target in self.features:
            raise ValueError("target column cannot also be a feature")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("split counts must be positive")
        for col, tr in self.transforms.items():
            if tr not in _TRANSFORMS:
                raise ValueError(f"unknown transform {tr!r} for column {col!r}")
        if self.noise_var is not None and not self.noise_var >= 0:
            raise ValueError("noise_var must be >= 0")
        if not self.name:
            stem = str(self.path).rsplit("/", 1)[-1]
            object.__setattr__(self, "name", stem.rsplit(".", 1)[0])


def _apply_transform(values, transform, column):
    if transform == "identity":
        return values
    if np.any(values <= -1.0):
        raise CsvFormatError(f"ln1p transform needs values > -1 in column {column!r}")
    return np.log1p(values)


def load_csv(spec):
    """Read the selected columns into a Dataset; noise_var is set to 0 here
    and resolved against the training split by ingest()."""
    columns = list(spec.features) + [spec.target]
    rows = []
    dropped = 0
    with open(spec.path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing_cols = [c for c in columns if c not in header]
        if missing_cols:
            raise CsvFormatError(f"missing columns in {spec.path}: {missing_cols}")
        for line_no, record in enumerate(reader, start=2):
            parsed = []
            skip = False
            for col in columns:
                cell = (record[col] or "").strip()
                if cell.lower() in _MISSING_TOKENS:
                    skip = True
                    break
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvFormatError(
                        f"row {line_no}, column {col!r}: cannot parse {cell!r}"
                    ) from None
                if math.isnan(value):
                    skip = True
                    break
                parsed.append(value)
            if skip:
                dropped += 1
            else:
                rows.append(parsed)
    if not rows:
        raise CsvFormatError(f"no usable rows in {spec.path}")
    table = np.array(rows, dtype=float)
    X = table[:, : len(spec.features)]
    y = table[:, -1]
    for i, col in enumerate(spec.features):
        X[:, i] = _apply_transform(X[:, i], spec.transforms.get(col, "identity"), col)
    y = _apply_transform(y, spec.transforms.get(spec.target, "identity"), spec.target)
    meta = {
        "source": str(spec.path),
        "dropped_rows": dropped,
        "target_transform": spec.transforms.get(spec.target, "identity"),
    }
    return Dataset(X, y, 0.0, name=spec.name, split="full", meta=meta)


def split(dataset, train_n, test_n, seed):
    """Disjoint uniformly random train/test row subsets, deterministic per seed."""
    n = dataset.n
    if train_n + test_n > n:
        raise ValueError(f"requested {train_n}+{test_n} rows but only {n} available")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), _SPLIT_STREAM_CODE])))
    perm = rng.permutation(n)
    idx_train = np.sort(perm[:train_n])
    idx_test = np.sort(perm[train_n : train_n + test_n])
    train = replace(dataset, X=dataset.X[idx_train], y=dataset.y[idx_train], split="train")
    test = replace(dataset, X=dataset.X[idx_test], y=dataset.y[idx_test], split="test")
    return train, test


def ingest(spec):
    """Full pipeline: load, split, and resolve the data-noise estimate."""
    table = load_csv(spec)
    train, test = split(table, spec.n_train, spec.n_test, spec.split_seed)
    if spec.noise_var is not None:
        noise = float(spec.noise_var)
    else:
        noise = 0.01 * float(np.var(train.y, ddof=1))
    train = replace(train, noise_var=noise)
    test = replace(test, noise_var=noise)
    return train, test


def invert_target(transform, y):
    if transform == "identity":
        return np.asarray(y, dtype=float)
    if transform == "ln1p":
        return np.expm1(y)
    raise ValueError(f"unknown transform {transform!r}")


def export_csv(dataset, path, target="y"):
    """Write a Dataset back out in the schema load_csv reads.

    Feature columns are named x1..xd. repr-formatted floats survive the
    round trip exactly, so exported data re-ingests bit-identically.
    """
    d = dataset.dim
    features = [f"x{i + 1}" for i in range(d)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(features + [target])
        for row, target_value in zip(dataset.X, dataset.y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(target_value))])
    return features


# Column selections for the five bundled real-world benchmarks. Counts follow
# the standard train/test partition sizes for each table.
PRESETS = {
    "boston": dict(
        target="medv",
        features=("rm",),
        n_train=354,
        n_test=152,
    ),
    "abalone": dict(
        target="rings",
        features=("length", "diameter", "height", "whole_weight", "shucked_weight"),
        n_train=1880,
        n_test=2297,
    ),
    "naval": dict(
        target="gt_turbine_decay_coefficient",
        features=(
            "gt_shaft_torque",
            "gt_rate_of_revolutions",
            "hp_turbine_exit_temperature",
            "gt_exhaust_gas_pressure",
        ),
        n_train=5370,
        n_test=6564,
    ),
    "forestfire": dict(
        target="area",
        features=("ffmc", "dmc", "dc", "isi", "temp", "rh"),
        n_train=200,
        n_test=317,
        transforms={"area": "ln1p"},
    ),
    "parkinsons": dict(
        target="total_updrs",
        features=("nhr", "hnr", "dfa", "ppe", "rpde"),
        n_train=2643,
        n_test=3232,
    ),
}


def preset_names():
    return list(PRESETS)


def preset_spec(name, path, split_seed=0, noise_var=None):
    """IngestSpec for a bundled preset, pointing at the caller's CSV file."""
    try:
        base = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
    return IngestSpec(
        path=path,
        target=base["target"],
        features=base["features"],
        n_train=base["n_train"],
        n_test=base["n_test"],
        transforms=dict(base.get("transforms", {})),
        split_seed=split_seed,
        noise_var=noise_var,
        name=name,
    )
