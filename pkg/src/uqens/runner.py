"""Benchmark runner: config parsing, sweep execution, deterministic outputs.

A sweep is the cross product datasets x methods x seeds. Every run is
reconstructible from its coordinates alone, so workers rebuild data and
models locally and the parent only collects scores; output files are
written once, in sorted order, with round-trip float formatting. Result
bytes therefore never depend on the worker count.

Output layout under out_dir:
    runs.csv       one row per (dataset, method, seed), errors included
    summary.csv    per (dataset, method): mean and 95% CI half-widths
    ranks.csv      per dataset: dense ranks by NLL with CI-overlap ties
    curves/*.tsv   confidence-vs-error curves, ablation curves
    bands/*.tsv    1-d predictive bands on a 400-point grid
    meta.json      timestamp, config echo (the only place a timestamp lives)
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .activations import ACTIVATION_ORDER as _CANONICAL_AF
from .anchoring import PriorSpec, TrainConfig
from .datasets import Dataset
from .ensembles import MethodSpec, predict, train_ensemble
from .generators import GENERATORS, generator_names, sample_dataset
from .ingest import PRESETS, IngestSpec, ingest, preset_spec
from .metrics import (
    MetricsReport,
    aggregate_ci,
    confidence_error_curve,
    default_thresholds,
    gaussian_nll,
    rank_methods,
    rmse,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "run_experiment",
    "run_ablation_m",
    "run_ablation_k",
    "emit_band_data",
    "band_rows",
]

BAND_GRID_POINTS = 400


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


def parse_method(text, rp_beta=1.0, rp_bootstrap=True):
    """Method strings: raf | raf:k=<i> | anchored[:act] | deep[:act] | rp[:act]."""
    text = text.strip()
    kind, _, arg = text.partition(":")
    arg = arg.strip() or None
    try:
        if kind == "raf":
            k = len(_CANONICAL_AF)
            if arg is not None:
                if not arg.startswith("k="):
                    raise ConfigError(f"raf takes k=<int>, got {arg!r}")
                k = int(arg[2:])
            return MethodSpec("raf", af_count=k)
        if kind in ("anchored", "deep", "rp"):
            return MethodSpec(kind, activation=arg, beta=rp_beta, bootstrap=rp_bootstrap)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown method {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple  # dataset references: ("generator", name) | ("ingest", IngestSpec)
    methods: tuple  # MethodSpec
    m: int = 5
    seeds: tuple = (1, 2, 3, 4, 5)
    train: TrainConfig = field(default_factory=TrainConfig)
    prior: PriorSpec = field(default_factory=PriorSpec)
    out_dir: str = "results"
    jobs: int = 1

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("at least one dataset required")
        if not self.methods:
            raise ConfigError("at least one method required")
        if not self.seeds:
            raise ConfigError("at least one seed required")
        if self.m < 2:
            raise ConfigError("m must be >= 2")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


def _dataset_name(ref):
    return ref[1] if ref[0] == "generator" else ref[1].name


def _resolve_dataset(name, data_sections):
    section = data_sections.get(name, {})
    if name in GENERATORS:
        return ("generator", name)
    if name in PRESETS:
        if "path" not in section:
            raise ConfigError(f"preset dataset {name!r} needs [data.{name}] path = ...")
        spec = preset_spec(
            name,
            section["path"],
            split_seed=section.get("split_seed", 0),
            noise_var=section.get("noise_var"),
        )
        if "n_train" in section or "n_test" in section:
            spec = replace(
                spec,
                n_train=section.get("n_train", spec.n_train),
                n_test=section.get("n_test", spec.n_test),
            )
        return ("ingest", spec)
    if section:
        try:
            spec = IngestSpec(
                path=section["path"],
                target=section["target"],
                features=tuple(section["features"]),
                n_train=section["n_train"],
                n_test=section["n_test"],
                transforms=dict(section.get("transforms", {})),
                split_seed=section.get("split_seed", 0),
                noise_var=section.get("noise_var"),
                name=name,
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad [data.{name}] section: {exc}") from exc
        return ("ingest", spec)
    raise ConfigError(f"unknown dataset {name!r} (no generator, preset, or [data.{name}] section)")


def config_from_dict(doc, out_dir=None, seeds=None, jobs=None):
    """Build an ExperimentConfig from a parsed TOML document."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a table")
    known = {"datasets", "methods", "m", "seeds", "out_dir", "jobs", "training", "prior", "rp", "data"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    rp_tbl = doc.get("rp", {})
    methods = []
    for entry in doc.get("methods", ["raf", "anchored", "deep", "rp"]):
        methods.append(
            parse_method(entry, rp_beta=rp_tbl.get("beta", 1.0), rp_bootstrap=rp_tbl.get("bootstrap", True))
        )
    labels = [m.label for m in methods]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate methods: {labels}")

    data_sections = doc.get("data", {})
    names = doc.get("datasets")
    if not names:
        raise ConfigError("config must list datasets")
    datasets = tuple(_resolve_dataset(str(n), data_sections) for n in names)

    tr = doc.get("training", {})
    try:
        train = TrainConfig(
            epochs=tr.get("epochs", 3000),
            learning_rate=tr.get("learning_rate", 1e-2),
            hidden=tuple(tr.get("hidden", (100,))),
            standardize=tr.get("standardize", True),
            noise_var=tr.get("noise_var"),
        )
        pr = doc.get("prior", {})
        prior = PriorSpec(mean=pr.get("mean", 0.0), variance=pr.get("variance", 2.0))
        config = ExperimentConfig(
            datasets=datasets,
            methods=tuple(methods),
            m=int(doc.get("m", 5)),
            seeds=tuple(int(s) for s in (seeds if seeds is not None else doc.get("seeds", (1, 2, 3, 4, 5)))),
            train=train,
            prior=prior,
            out_dir=str(out_dir if out_dir is not None else doc.get("out_dir", "results")),
            jobs=int(jobs if jobs is not None else doc.get("jobs", 1)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return config


def load_config(path, out_dir=None, seeds=None, jobs=None):
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return config_from_dict(doc, out_dir=out_dir, seeds=seeds, jobs=jobs)


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    method: str
    seed: int
    m: int
    n_train: int
    n_test: int
    nll: float  # nan on failure
    rmse: float  # nan on failure
    error: str  # empty on success


def _load_split(ref, seed):
    if ref[0] == "generator":
        return sample_dataset(ref[1], seed)
    return ingest(ref[1])


def _run_one(task):
    """Execute one (dataset, method, seed) run; never raises."""
    ref, method, m, seed, train_cfg, prior = task
    name = _dataset_name(ref)
    try:
        train_ds, test_ds = _load_split(ref, seed)
        model = train_ensemble(train_ds, method, m, prior=prior, config=train_cfg, seed=seed)
        est = predict(model, test_ds.X)
        record = RunRecord(
            dataset=name,
            method=method.label,
            seed=seed,
            m=m,
            n_train=train_ds.n,
            n_test=test_ds.n,
            nll=gaussian_nll(est, test_ds.y),
            rmse=rmse(est.mean, test_ds.y),
            error="",
        )
        payload = (est.mean, est.total_var, test_ds.y)
        return record, payload
    except Exception as exc:  # recorded per run; the sweep continues
        record = RunRecord(
            dataset=name,
            method=method.label,
            seed=seed,
            m=m,
            n_train=-1,
            n_test=-1,
            nll=float("nan"),
            rmse=float("nan"),
            error=f"{type(exc).__name__}: {exc}",
        )
        return record, None


def _execute(config, tasks):
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    return results


def _sweep_tasks(config, m=None, methods=None):
    tasks = []
    for ref in config.datasets:
        for method in methods if methods is not None else config.methods:
            for seed in config.seeds:
                tasks.append((ref, method, m if m is not None else config.m, seed, config.train, config.prior))
    return tasks


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path, header, rows, sep=","):
    lines = [sep.join(header)]
    for row in rows:
        cells = []
        for cell in row:
            text = _fmt(cell)
            if sep in text or '"' in text or "\n" in text:
                text = '"' + text.replace('"', '""') + '"'
            cells.append(text)
        lines.append(sep.join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_runs_csv(path, records):
    header = ["dataset", "method", "seed", "m", "n_train", "n_test", "nll", "rmse", "error"]
    rows = [
        (r.dataset, r.method, r.seed, r.m, r.n_train, r.n_test, r.nll, r.rmse, r.error)
        for r in sorted(records, key=lambda r: (r.dataset, r.method, r.m, r.seed))
    ]
    _write_rows(path, header, rows)


def _aggregate(records, payloads):
    """Per-(dataset, method) MetricsReports from successful runs."""
    groups = {}
    for rec, payload in zip(records, payloads):
        groups.setdefault((rec.dataset, rec.method), []).append((rec, payload))
    reports = {}
    for key in sorted(groups):
        cell = [(r, p) for r, p in groups[key] if not r.error]
        if len(cell) < 2:
            continue
        nlls = [r.nll for r, _ in cell]
        rmses = [r.rmse for r, _ in cell]
        nll_mean, nll_hw = aggregate_ci(nlls)
        rmse_mean, rmse_hw = aggregate_ci(rmses)
        curve = _aggregate_curve([p for _, p in cell])
        reports[key] = MetricsReport(
            dataset=key[0],
            method=key[1],
            nll_mean=nll_mean,
            nll_half_width=nll_hw,
            rmse_mean=rmse_mean,
            rmse_half_width=rmse_hw,
            curve=curve,
            seeds=tuple(r.seed for r, _ in cell),
        )
    return reports


class _Est:
    """Duck-typed estimate view over stored (mean, total_var) arrays."""

    def __init__(self, mean, total_var):
        self.mean = mean
        self.total_var = total_var


def _aggregate_curve(payloads):
    """Average per-seed curves on one threshold grid pooled over seeds."""
    pooled = np.concatenate([1.0 / tv for _, tv, _ in payloads])
    thresholds = default_thresholds(pooled)
    per_seed = [
        confidence_error_curve(_Est(mean, tv), y, thresholds) for mean, tv, y in payloads
    ]
    out = []
    for i, tau in enumerate(thresholds):
        rmses = [c[i].rmse for c in per_seed if not math.isnan(c[i].rmse)]
        coverage = float(np.mean([c[i].coverage for c in per_seed]))
        r = float(np.mean(rmses)) if rmses else float("nan")
        out.append((float(tau), r, coverage))
    return tuple(out)


def _write_summary_csv(path, reports):
    header = ["dataset", "method", "n_seeds", "nll_mean", "nll_half_width", "rmse_mean", "rmse_half_width"]
    rows = [
        (rep.dataset, rep.method, len(rep.seeds), rep.nll_mean, rep.nll_half_width,
         rep.rmse_mean, rep.rmse_half_width)
        for _, rep in sorted(reports.items())
    ]
    _write_rows(path, header, rows)


def _write_ranks_csv(path, reports):
    header = ["dataset", "method", "nll_mean", "nll_half_width", "rank"]
    by_dataset = {}
    for (dataset, method), rep in sorted(reports.items()):
        by_dataset.setdefault(dataset, []).append(rep)
    rows = []
    for dataset in sorted(by_dataset):
        reps = by_dataset[dataset]
        if len(reps) >= 2:
            ranks = rank_methods([(r.nll_mean, r.nll_half_width) for r in reps])
        else:
            ranks = [1] * len(reps)
        for rep, rank in zip(reps, ranks):
            rows.append((dataset, rep.method, rep.nll_mean, rep.nll_half_width, rank))
    _write_rows(path, header, rows)


def _safe_name(label):
    return label.replace(":", "-").replace("/", "-")


def _write_curves(out_dir, reports):
    curve_dir = os.path.join(out_dir, "curves")
    os.makedirs(curve_dir, exist_ok=True)
    paths = []
    for (dataset, method), rep in sorted(reports.items()):
        path = os.path.join(curve_dir, f"{_safe_name(dataset)}__{_safe_name(method)}.tsv")
        _write_rows(path, ["threshold", "rmse", "coverage"], rep.curve, sep="\t")
        paths.append(path)
    return paths


def _write_meta(out_dir, config, extra=None):
    doc = {
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "package_version": __version__,
        "jobs": config.jobs,
        "m": config.m,
        "seeds": list(config.seeds),
        "datasets": [_dataset_name(ref) for ref in config.datasets],
        "methods": [m.label for m in config.methods],
        "training": {
            "epochs": config.train.epochs,
            "learning_rate": config.train.learning_rate,
            "hidden": list(config.train.hidden),
            "standardize": config.train.standardize,
        },
        "prior": {"mean": config.prior.mean, "variance": config.prior.variance},
    }
    if extra:
        doc.update(extra)
    path = os.path.join(out_dir, "meta.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    reports: dict
    out_dir: str
    failed: int

    @property
    def ok(self):
        return self.failed == 0


def run_experiment(config):
    """Full sweep; writes runs/summary/ranks/curves/meta under out_dir."""
    os.makedirs(config.out_dir, exist_ok=True)
    results = _execute(config, _sweep_tasks(config))
    records = [r for r, _ in results]
    payloads = [p for _, p in results]
    reports = _aggregate(records, payloads)
    _write_runs_csv(os.path.join(config.out_dir, "runs.csv"), records)
    _write_summary_csv(os.path.join(config.out_dir, "summary.csv"), reports)
    _write_ranks_csv(os.path.join(config.out_dir, "ranks.csv"), reports)
    _write_curves(config.out_dir, reports)
    _write_meta(config.out_dir, config, extra={"command": "run"})
    failed = sum(1 for r in records if r.error)
    return SweepResult(tuple(records), reports, config.out_dir, failed)


def _ablation(config, axis_name, value_to_runs, method_key=None):
    """Shared ablation driver: value -> (records, reports); emits one TSV per
    (dataset, method) with rows (value, nll_mean, nll_half_width). With
    method_key set, per-value method labels collapse into that one curve
    (the k-ablation varies the label itself)."""
    os.makedirs(config.out_dir, exist_ok=True)
    curve_dir = os.path.join(config.out_dir, "curves")
    os.makedirs(curve_dir, exist_ok=True)
    all_records = []
    rows_by_cell = {}
    for value in value_to_runs:
        records, reports = value_to_runs[value]
        all_records.extend(records)
        for (dataset, method), rep in reports.items():
            cell = (dataset, method_key if method_key is not None else method)
            rows_by_cell.setdefault(cell, []).append(
                (value, rep.nll_mean, rep.nll_half_width)
            )
    for (dataset, method), rows in sorted(rows_by_cell.items()):
        path = os.path.join(
            curve_dir, f"ablate_{axis_name}__{_safe_name(dataset)}__{_safe_name(method)}.tsv"
        )
        _write_rows(path, [axis_name, "nll_mean", "nll_half_width"], rows, sep="\t")
    _write_runs_csv(os.path.join(config.out_dir, "runs.csv"), all_records)
    _write_meta(config.out_dir, config, extra={"command": f"ablate-{axis_name}"})
    failed = sum(1 for r in all_records if r.error)
    return SweepResult(tuple(all_records), {}, config.out_dir, failed)


def run_ablation_m(config, m_values):
    """NLL versus ensemble size."""
    m_values = sorted(set(int(m) for m in m_values))
    if any(m < 2 for m in m_values):
        raise ConfigError("ablation m values must be >= 2")
    value_to_runs = {}
    for m in m_values:
        results = _execute(config, _sweep_tasks(config, m=m))
        records = [r for r, _ in results]
        payloads = [p for _, p in results]
        value_to_runs[m] = (records, _aggregate(records, payloads))
    return _ablation(config, "m", value_to_runs)


def run_ablation_k(config, k_values):
    """NLL versus activation-set cardinality (first k of the canonical order)."""
    k_values = sorted(set(int(k) for k in k_values))
    if any(not 1 <= k <= len(_CANONICAL_AF) for k in k_values):
        raise ConfigError(f"ablation k values must be in [1, {len(_CANONICAL_AF)}]")
    value_to_runs = {}
    for k in k_values:
        # k=1 degenerates to a fixed-activation ensemble on the first
        # canonical activation: every member draws from a singleton set.
        methods = [MethodSpec("raf", af_count=k)]
        results = _execute(config, _sweep_tasks(config, methods=methods))
        records = [r for r, _ in results]
        payloads = [p for _, p in results]
        value_to_runs[k] = (records, _aggregate(records, payloads))
    return _ablation(config, "k", value_to_runs, method_key="raf")


def band_rows(model, train_ds, lo, hi, true_fn=None):
    """Rows for a 1-d predictive band TSV: a dense grid plus train markers."""
    grid = np.linspace(lo, hi, BAND_GRID_POINTS)
    est = predict(model, grid[:, None])
    sd2 = 2.0 * np.sqrt(est.total_var)
    nan = float("nan")
    rows = []
    for i, x in enumerate(grid):
        truth = float(true_fn(np.array([[x]]))[0]) if true_fn is not None else nan
        rows.append(
            ("grid", float(x), float(est.mean[i]), float(est.mean[i] - sd2[i]),
             float(est.mean[i] + sd2[i]), truth, nan)
        )
    for x, y in zip(train_ds.X[:, 0], train_ds.y):
        rows.append(("train", float(x), nan, nan, nan, nan, float(y)))
    return rows


BAND_HEADER = ["kind", "x", "y_pred", "lower", "upper", "y_true_fn", "y_obs"]


def emit_band_data(config):
    """Train on each 1-d dataset and write predictive-band TSVs."""
    os.makedirs(config.out_dir, exist_ok=True)
    band_dir = os.path.join(config.out_dir, "bands")
    os.makedirs(band_dir, exist_ok=True)
    seed = config.seeds[0]
    written = []
    for ref in config.datasets:
        name = _dataset_name(ref)
        train_ds, test_ds = _load_split(ref, seed)
        if train_ds.dim != 1:
            raise ConfigError(f"band data needs a 1-d dataset, {name!r} has dim {train_ds.dim}")
        if ref[0] == "generator":
            gen = GENERATORS[name]
            lo, hi = gen.test_box[0]
            true_fn = gen.fn
        else:
            lo = float(min(train_ds.X.min(), test_ds.X.min()))
            hi = float(max(train_ds.X.max(), test_ds.X.max()))
            true_fn = None
        for method in config.methods:
            model = train_ensemble(
                train_ds, method, config.m, prior=config.prior, config=config.train, seed=seed
            )
            rows = band_rows(model, train_ds, lo, hi, true_fn)
            path = os.path.join(band_dir, f"{_safe_name(name)}__{_safe_name(method.label)}.tsv")
            _write_rows(path, BAND_HEADER, rows, sep="\t")
            written.append(path)
    _write_meta(config.out_dir, config, extra={"command": "band"})
    return written


def list_datasets():
    """Human-readable dataset registry listing."""
    lines = ["synthetic generators:"]
    for name in generator_names():
        g = GENERATORS[name]
        lines.append(
            f"  {name:<16} dim={g.dim:<2} train/test={g.n_train}/{g.n_test}"
            f" noise_sd={g.noise_std} category={g.category}"
        )
    lines.append("real-world CSV presets (need [data.<name>] path in the config):")
    for name, base in PRESETS.items():
        lines.append(
            f"  {name:<16} features={len(base['features'])}"
            f" train/test={base['n_train']}/{base['n_test']} target={base['target']}"
        )
    return "\n".join(lines)
