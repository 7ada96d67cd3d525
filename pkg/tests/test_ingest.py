"""CSV ingestion: parsing, row drops, transforms, splits, presets, export."""

import numpy as np
import pytest

from uqens.datasets import Dataset
from uqens.generators import sample_dataset
from uqens.ingest import (
    PRESETS,
    CsvFormatError,
    IngestSpec,
    export_csv,
    ingest,
    invert_target,
    load_csv,
    preset_names,
    preset_spec,
    split,
)


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _spec(path, **kw):
    base = dict(path=path, target="t", features=("a", "b"), n_train=2, n_test=1)
    base.update(kw)
    return IngestSpec(**base)


def test_three_row_csv(tmp_path):
    path = _write(tmp_path, "a,b,t\n1,2,3\n4,5,6\n7,8,9\n")
    ds = load_csv(_spec(path))
    assert ds.X.shape == (3, 2)
    assert np.array_equal(ds.X, [[1, 2], [4, 5], [7, 8]])
    assert np.array_equal(ds.y, [3, 6, 9])
    assert ds.meta["dropped_rows"] == 0


def test_extra_columns_ignored(tmp_path):
    path = _write(tmp_path, "junk,a,t,b\nx,1,3,2\ny,4,6,5\n")
    ds = load_csv(_spec(path))
    assert np.array_equal(ds.X, [[1, 2], [4, 5]])
    assert np.array_equal(ds.y, [3, 6])


def test_missing_cells_dropped_and_counted(tmp_path):
    path = _write(tmp_path, "a,b,t\n1,2,3\n,5,6\n7,NA,9\n10,11,?\n13,14,15\n")
    ds = load_csv(_spec(path))
    assert ds.n == 2
    assert ds.meta["dropped_rows"] == 3


def test_unparseable_cell_coordinates(tmp_path):
    path = _write(tmp_path, "a,b,t\n1,2,3\n4,bogus,6\n")
    with pytest.raises(CsvFormatError, match=r"row 3, column 'b'"):
        load_csv(_spec(path))


def test_missing_column_reported(tmp_path):
    path = _write(tmp_path, "a,t\n1,2\n")
    with pytest.raises(CsvFormatError, match="missing columns"):
        load_csv(_spec(path))


def test_all_rows_dropped_is_an_error(tmp_path):
    path = _write(tmp_path, "a,b,t\n,2,3\n4,,6\n")
    with pytest.raises(CsvFormatError, match="no usable rows"):
        load_csv(_spec(path))


def test_ln1p_transform_on_target_only(tmp_path):
    path = _write(tmp_path, "a,b,t\n1,2,0\n4,5,10\n")
    ds = load_csv(_spec(path, transforms={"t": "ln1p"}))
    assert np.array_equal(ds.X, [[1, 2], [4, 5]])
    assert ds.y == pytest.approx(np.log1p([0.0, 10.0]), rel=1e-15)
    assert ds.meta["target_transform"] == "ln1p"
    assert invert_target("ln1p", ds.y) == pytest.approx([0.0, 10.0], rel=1e-12)


def test_ln1p_rejects_out_of_domain(tmp_path):
    path = _write(tmp_path, "a,b,t\n1,2,-3\n")
    with pytest.raises(CsvFormatError, match="ln1p"):
        load_csv(_spec(path, transforms={"t": "ln1p"}))


def test_invert_target_identity_and_unknown():
    assert np.array_equal(invert_target("identity", [1.0, 2.0]), [1.0, 2.0])
    with pytest.raises(ValueError, match="unknown transform"):
        invert_target("sqrt", [1.0])


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError, match="non-empty"):
        IngestSpec(path="x", target="t", features=(), n_train=1, n_test=1)
    with pytest.raises(ValueError, match="feature"):
        IngestSpec(path="x", target="t", features=("t", "a"), n_train=1, n_test=1)
    with pytest.raises(ValueError, match="counts"):
        IngestSpec(path="x", target="t", features=("a",), n_train=0, n_test=1)
    with pytest.raises(ValueError, match="unknown transform"):
        IngestSpec(path="x", target="t", features=("a",), n_train=1, n_test=1, transforms={"t": "exp"})


def test_split_disjoint_for_many_seeds():
    ds = Dataset(X=np.arange(200.0).reshape(100, 2), y=np.arange(100.0), noise_var=0.0, name="s", split="full")
    for seed in range(100):
        train, test = split(ds, 60, 30, seed)
        tr = {tuple(row) for row in train.X}
        te = {tuple(row) for row in test.X}
        assert len(tr) == 60 and len(te) == 30
        assert not tr & te


def test_split_deterministic_and_seed_sensitive():
    ds = Dataset(X=np.arange(100.0).reshape(50, 2), y=np.arange(50.0), noise_var=0.0, name="s", split="full")
    a1, _ = split(ds, 30, 10, 7)
    a2, _ = split(ds, 30, 10, 7)
    b1, _ = split(ds, 30, 10, 8)
    assert np.array_equal(a1.X, a2.X)
    assert not np.array_equal(a1.X, b1.X)


def test_split_overflow_rejected():
    ds = Dataset(X=np.zeros((10, 1)), y=np.zeros(10), noise_var=0.0, name="s", split="full")
    with pytest.raises(ValueError, match="available"):
        split(ds, 8, 3, 0)


def test_ingest_noise_default_is_fraction_of_train_variance(tmp_path):
    rows = ["a,b,t"] + [f"{i},{2 * i},{3.0 * i}" for i in range(40)]
    path = _write(tmp_path, "\n".join(rows) + "\n")
    train, test = ingest(_spec(path, n_train=25, n_test=10))
    assert train.noise_var == pytest.approx(0.01 * np.var(train.y, ddof=1), rel=1e-12)
    assert test.noise_var == train.noise_var


def test_ingest_noise_override(tmp_path):
    rows = ["a,b,t"] + [f"{i},{2 * i},{3.0 * i}" for i in range(10)]
    path = _write(tmp_path, "\n".join(rows) + "\n")
    train, test = ingest(_spec(path, n_train=5, n_test=3, noise_var=0.42))
    assert train.noise_var == 0.42 and test.noise_var == 0.42


# -------------------------------------------------------------------- presets


def test_preset_catalogue():
    assert preset_names() == ["boston", "abalone", "naval", "forestfire", "parkinsons"]


def test_abalone_preset_columns():
    spec = preset_spec("abalone", "whatever.csv")
    assert spec.features == ("length", "diameter", "height", "whole_weight", "shucked_weight")
    assert spec.target == "rings"
    assert (spec.n_train, spec.n_test) == (1880, 2297)


def test_boston_preset_single_feature():
    spec = preset_spec("boston", "b.csv")
    assert spec.features == ("rm",)
    assert spec.target == "medv"
    assert (spec.n_train, spec.n_test) == (354, 152)


def test_forestfire_preset_transform():
    spec = preset_spec("forestfire", "f.csv")
    assert spec.transforms == {"area": "ln1p"}
    assert (spec.n_train, spec.n_test) == (200, 317)


def test_naval_and_parkinsons_sizes():
    naval = preset_spec("naval", "n.csv")
    parkinsons = preset_spec("parkinsons", "p.csv")
    assert (naval.n_train, naval.n_test) == (5370, 6564)
    assert (parkinsons.n_train, parkinsons.n_test) == (2643, 3232)
    assert parkinsons.features == ("nhr", "hnr", "dfa", "ppe", "rpde")
    assert parkinsons.target == "total_updrs"


def test_unknown_preset():
    with pytest.raises(KeyError, match="unknown preset"):
        preset_spec("superconductivity", "s.csv")


def test_preset_split_seed_and_noise_pass_through():
    spec = preset_spec("boston", "b.csv", split_seed=5, noise_var=0.3)
    assert spec.split_seed == 5 and spec.noise_var == 0.3


# --------------------------------------------------------------------- export


def test_export_round_trips_sampled_data(tmp_path):
    train, _ = sample_dataset("ishigami", seed=2)
    path = str(tmp_path / "out.csv")
    features = export_csv(train, path)
    assert features == ["x1", "x2", "x3"]
    back = load_csv(
        IngestSpec(path=path, target="y", features=features, n_train=2, n_test=1)
    )
    assert np.array_equal(back.X, train.X)
    assert np.array_equal(back.y, train.y)
