"""Release gate: one test per shipping criterion, run at the stated
tolerances. Criteria 5 and 6 train full-size ensembles and dominate the
wall-clock; everything here stays deterministic (fixed seeds throughout)."""

import csv
import math
import os
import time

import numpy as np
import pytest

from uqens.activations import ACTIVATION_ORDER
from uqens.anchoring import anchored_loss
from uqens.cli import main
from uqens.ensembles import (
    EnsembleModel,
    MethodSpec,
    _random_init,
    assign_activations,
    predict,
    train_ensemble,
)
from uqens.generators import generator_eval, sample_dataset
from uqens.metrics import aggregate_ci, confidence_error_curve, gaussian_nll, rank_methods, rmse
from uqens.mlp import flatten_params, forward, loss_gradient, unflatten_params
from uqens.runner import load_config, run_experiment

from conftest import identity_scaler


def _est(mean, total_var):
    mean = np.asarray(mean, dtype=float)
    total = np.asarray(total_var, dtype=float)
    from uqens.ensembles import PredictiveEstimate

    return PredictiveEstimate(mean=mean, epistemic_var=total, total_var=total)


# --------------------------------------------------------------- criterion 1


def test_criterion_01_gradient_matches_finite_differences():
    """105 random small nets (d<=3, widths<=5, all 7 activations cycled):
    every gradient coordinate within 1e-4 relative of central differences,
    in under 30 seconds."""
    rng = np.random.default_rng(2024)
    layouts = [(2,), (3,), (4,), (5,), (3, 2), (5, 4)]
    h = 1e-6
    start = time.perf_counter()
    for case in range(105):
        activation = ACTIVATION_ORDER[case % len(ACTIVATION_ORDER)]
        d = 1 + case % 3
        hidden = layouts[case % len(layouts)]
        sizes = (d,) + hidden + (1,)
        net = _random_init(sizes, activation, rng)
        anchor = _random_init(sizes, activation, rng)
        n = int(rng.integers(4, 9))
        X = rng.uniform(-2, 2, (n, d))
        y = rng.standard_normal(n)
        gamma = rng.uniform(0.05, 0.5, net.param_count)
        grad = loss_gradient(net, anchor, gamma, X, y)

        theta = flatten_params(net)

        def loss_at(vec):
            params = unflatten_params(vec, net)
            return anchored_loss(params, anchor, gamma, X, y)

        for i in range(theta.size):
            bump = np.zeros_like(theta)
            bump[i] = h
            fd = (loss_at(theta + bump) - loss_at(theta - bump)) / (2 * h)
            assert abs(grad[i] - fd) <= 1e-4 * max(abs(fd), 1e-3), (
                f"case {case} ({activation}, sizes {sizes}) coordinate {i}: "
                f"analytic {grad[i]!r} vs central-difference {fd!r}"
            )
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"gradient oracle took {elapsed:.1f}s"


# --------------------------------------------------------------- criterion 2


def test_criterion_02_epistemic_variance_equals_two_pass_oracle():
    """Ensemble spread equals an independently computed two-pass sample
    variance within 1e-12 relative, on 10,000 randomized cases."""
    rng = np.random.default_rng(77)
    cases = 0
    while cases < 10_000:
        m = int(rng.integers(2, 9))
        width = int(rng.integers(3, 7))
        members = tuple(
            _random_init((1, width, 1), "tanh", np.random.default_rng(int(rng.integers(1 << 30))))
            for _ in range(m)
        )
        model = EnsembleModel(
            method=MethodSpec("anchored"),
            members=members,
            anchors=members,
            priors=None,
            activations=("tanh",) * m,
            noise_var=float(rng.uniform(0.01, 1.0)),
            scaler=identity_scaler(1),
        )
        X = rng.uniform(-3, 3, (400, 1))
        est = predict(model, X)

        preds = np.stack([forward(net, X) for net in members])
        mu = preds.sum(axis=0) / m
        two_pass = ((preds - mu) ** 2).sum(axis=0) / (m - 1)
        rel = np.abs(est.epistemic_var - two_pass) / two_pass
        assert rel.max() < 1e-12
        assert np.allclose(est.total_var, est.epistemic_var + model.noise_var, rtol=0, atol=0)
        cases += X.shape[0]
    assert cases >= 10_000


# --------------------------------------------------------------- criterion 3


def test_criterion_03_generator_point_checks():
    """Published fixed points: zero minima within 1e-9; forrester(0.5)=sin 2
    and ishigami(pi/2,0,0)=1 within 1e-12."""
    assert abs(generator_eval("rastrigin", [0.0, 0.0, 0.0])) < 1e-9
    assert abs(generator_eval("griewank", [0.0] * 4)) < 1e-9
    assert abs(generator_eval("ackley", [0.0] * 7)) < 1e-9
    assert abs(generator_eval("xsinx", [0.0])) < 1e-9
    assert abs(generator_eval("roos_arnold", [0.5] * 5)) < 1e-9
    assert abs(generator_eval("sum_powers", [0.0] * 6)) < 1e-9
    assert generator_eval("forrester", [0.5]) == pytest.approx(math.sin(2.0), abs=1e-12)
    assert generator_eval("ishigami", [math.pi / 2, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-12)


# --------------------------------------------------------------- criterion 4


def test_criterion_04_activation_assignment_branch():
    """m=7,k=7 reproduces the full ordered activation set; any m<=k gives
    pairwise-distinct activations (checked exhaustively for m in [2,7])."""
    full = ACTIVATION_ORDER
    for seed in range(50):
        rng = np.random.default_rng(seed)
        assert tuple(assign_activations(7, full, rng)) == full
    for m in range(2, 8):
        for k in range(m, 8):
            for seed in range(25):
                rng = np.random.default_rng(1000 * m + 10 * k + seed)
                chosen = assign_activations(m, full[:k], rng)
                assert len(chosen) == m
                assert len(set(chosen)) == m, f"duplicate activations at m={m}, k={k}"
                assert set(chosen) <= set(full[:k])


# ----------------------------------------------------------- criteria 5 to 7


def _mean_nll(dataset_name, method, seeds):
    values = []
    for seed in seeds:
        train_ds, test_ds = sample_dataset(dataset_name, seed)
        model = train_ensemble(train_ds, method, 5, seed=seed)
        est = predict(model, test_ds.X)
        values.append(gaussian_nll(est, test_ds.y))
    return float(np.mean(values))


def _ordering_wins(dataset_name, level_cap=None):
    raf = MethodSpec("raf")
    fixed = MethodSpec("anchored")
    wins = 0
    for rep in range(5):
        seeds = range(5 * rep + 1, 5 * rep + 6)
        raf_nll = _mean_nll(dataset_name, raf, seeds)
        fixed_nll = _mean_nll(dataset_name, fixed, seeds)
        ok = raf_nll < fixed_nll
        if level_cap is not None:
            ok = ok and raf_nll < level_cap
        wins += ok
    return wins


def test_criterion_05_xsinx_nll_beats_fixed_activation_and_stays_low():
    """Mixed-activation ensemble beats the fixed-tanh anchored baseline on
    mean test NLL, staying below 10, in at least 4 of 5 independent
    five-seed repetitions; under 5 minutes."""
    start = time.perf_counter()
    wins = _ordering_wins("xsinx", level_cap=10.0)
    elapsed = time.perf_counter() - start
    assert wins >= 4, f"ordering held in only {wins}/5 repetitions"
    assert elapsed < 300.0, f"took {elapsed:.0f}s"


def test_criterion_06_forrester_nll_ordering():
    """Same five-repetition protocol on the two-cluster forrester data:
    mixed activations beat the fixed baseline in at least 4 of 5; under 5
    minutes."""
    start = time.perf_counter()
    wins = _ordering_wins("forrester")
    elapsed = time.perf_counter() - start
    assert wins >= 4, f"ordering held in only {wins}/5 repetitions"
    assert elapsed < 300.0, f"took {elapsed:.0f}s"


def test_criterion_07_predictive_variance_grows_off_support():
    """Mean total predictive variance over x in [4,6] is at least 3x its
    mean over the training clusters, for at least 4 of 5 seeds."""
    inside = np.concatenate([np.linspace(-2.0, -0.67, 100), np.linspace(0.67, 2.0, 100)])
    outside = np.linspace(4.0, 6.0, 100)
    wins = 0
    ratios = []
    for seed in (1, 2, 3, 4, 5):
        train_ds, _ = sample_dataset("xsinx", seed)
        model = train_ensemble(train_ds, MethodSpec("raf"), 5, seed=seed)
        var_in = predict(model, inside[:, None]).total_var.mean()
        var_out = predict(model, outside[:, None]).total_var.mean()
        ratios.append(var_out / var_in)
        wins += var_out >= 3.0 * var_in
    assert wins >= 4, f"ratios {[f'{r:.1f}' for r in ratios]}"


# --------------------------------------------------------------- criterion 8


def test_criterion_08_runs_csv_byte_identical_across_worker_counts(tmp_path):
    """The same config produces byte-identical runs.csv whether executed
    serially, again serially, or with two worker processes."""
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        'datasets = ["xsinx", "forrester"]\n'
        'methods = ["raf", "anchored", "rp"]\n'
        "m = 3\nseeds = [1, 2]\n\n[training]\nepochs = 150\nhidden = [16]\n"
    )
    blobs = []
    for label, jobs in (("a", 1), ("b", 1), ("c", 2)):
        out = tmp_path / label
        code = main(["run", "--config", str(cfg), "--out", str(out), "--jobs", str(jobs)])
        assert code == 0
        with open(out / "runs.csv", "rb") as fh:
            blobs.append(fh.read())
    assert blobs[0] == blobs[1], "serial rerun differs"
    assert blobs[0] == blobs[2], "two-worker run differs"


# --------------------------------------------------------------- criterion 9


def _write_csv(path, columns):
    names = list(columns)
    n = len(next(iter(columns.values())))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(n):
            writer.writerow([repr(float(columns[c][i])) for c in names])


def _synthesize_presets(root):
    """Five CSVs shaped like the preset schemas, at the natural row counts.
    Targets carry a learnable signal plus noise; the abalone recipe has a
    Bayes RMSE near 2."""
    rng = np.random.default_rng(42)

    n = 506
    rm = rng.uniform(4.0, 9.0, n)
    _write_csv(root / "boston.csv", {
        "rm": rm,
        "medv": np.clip(-22.0 + 8.0 * rm + rng.normal(0, 3.0, n), 5.0, 50.0),
    })

    n = 4177
    length = rng.uniform(0.1, 0.8, n)
    whole = 1.5 * length**3 + rng.normal(0, 0.05, n)
    _write_csv(root / "abalone.csv", {
        "length": length,
        "diameter": 0.8 * length + rng.normal(0, 0.02, n),
        "height": 0.35 * length + rng.normal(0, 0.01, n),
        "whole_weight": whole,
        "shucked_weight": 0.45 * whole + rng.normal(0, 0.02, n),
        "rings": np.clip(np.round(5.0 + 18.0 * length + rng.normal(0, 2.0, n)), 1.0, None),
    })

    n = 11934
    rpm = rng.uniform(1300.0, 3600.0, n)
    torque = rng.uniform(600.0, 72000.0, n)
    _write_csv(root / "naval.csv", {
        "gt_shaft_torque": torque,
        "gt_rate_of_revolutions": rpm,
        "hp_turbine_exit_temperature": rng.uniform(540.0, 1100.0, n),
        "gt_exhaust_gas_pressure": rng.uniform(1.0, 4.5, n),
        "gt_turbine_decay_coefficient": (
            0.975 + 1e-5 * (rpm - 2450.0) / 23.0 - 1e-7 * torque / 720.0
            + rng.normal(0, 0.003, n)
        ),
    })

    n = 517
    burned = rng.random(n) < 0.45
    area = np.where(burned, np.expm1(rng.normal(1.0, 1.2, n)), 0.0)
    _write_csv(root / "forestfire.csv", {
        "ffmc": rng.uniform(80.0, 96.0, n),
        "dmc": rng.uniform(1.0, 290.0, n),
        "dc": rng.uniform(7.0, 860.0, n),
        "isi": rng.uniform(0.0, 56.0, n),
        "temp": rng.uniform(2.0, 33.0, n),
        "rh": rng.uniform(15.0, 100.0, n),
        "area": np.clip(area, 0.0, None),
    })

    n = 5875
    dfa = rng.uniform(0.51, 0.85, n)
    ppe = rng.uniform(0.02, 0.6, n)
    _write_csv(root / "parkinsons.csv", {
        "nhr": rng.uniform(0.0006, 0.2, n),
        "hnr": rng.uniform(10.0, 35.0, n),
        "dfa": dfa,
        "rpde": rng.uniform(0.25, 0.7, n),
        "ppe": ppe,
        "total_updrs": 5.0 + 35.0 * dfa + 20.0 * ppe + rng.normal(0, 2.0, n),
    })


def test_criterion_09_preset_pipeline_end_to_end(tmp_path):
    """All five CSV presets train and score with finite NLL/RMSE at their
    natural split sizes; abalone test RMSE lands in [1.5, 3.5]."""
    _synthesize_presets(tmp_path)
    cfg = tmp_path / "cfg.toml"
    sections = "\n".join(
        f'[data.{name}]\npath = "{tmp_path / f"{name}.csv"}"'
        for name in ("boston", "abalone", "naval", "forestfire", "parkinsons")
    )
    cfg.write_text(
        'datasets = ["boston", "abalone", "naval", "forestfire", "parkinsons"]\n'
        'methods = ["raf"]\nm = 2\nseeds = [1, 2]\n\n'
        "[training]\nepochs = 300\nhidden = [32]\n\n" + sections + "\n"
    )
    config = load_config(str(cfg), out_dir=str(tmp_path / "out"))
    result = run_experiment(config)
    assert result.ok, [r.error for r in result.records if r.error]
    assert len(result.records) == 10
    for rec in result.records:
        assert math.isfinite(rec.nll), f"{rec.dataset}: NLL {rec.nll}"
        assert math.isfinite(rec.rmse), f"{rec.dataset}: RMSE {rec.rmse}"
    abalone = result.reports[("abalone", "raf")]
    assert 1.5 <= abalone.rmse_mean <= 3.5, f"abalone RMSE {abalone.rmse_mean:.3f}"


# -------------------------------------------------------------- criterion 10


def test_criterion_10_metric_unit_examples():
    """The documented metric examples hold exactly or within 1e-9."""
    y = np.array([0.3, -1.2, 4.0])
    assert gaussian_nll(_est(y, np.full(3, 1.0 / (2.0 * math.pi))), y) == pytest.approx(0.0, abs=1e-9)
    single = gaussian_nll(_est([0.0], [1.0]), [1.0])
    assert single == pytest.approx(0.5 * math.log(2 * math.pi) + 0.5, abs=1e-9)

    assert rmse(np.array([4.0, 6.0]), np.array([1.0, 2.0])) == pytest.approx(
        math.sqrt(12.5), abs=1e-9
    )

    est = _est([2.0, 2.0, 5.0, 5.0], [1.0, 1.0, 0.25, 0.25])
    targets = np.array([0.0, 0.0, 5.0, 5.0])
    points = confidence_error_curve(est, targets, [0.0, 2.0, 4.0])
    assert points[0].rmse == pytest.approx(rmse(est.mean, targets), abs=1e-9)
    assert points[0].coverage == 1.0
    assert points[1].rmse == pytest.approx(0.0, abs=1e-9)
    assert points[1].coverage == 0.5
    assert points[2].coverage == 0.0 and math.isnan(points[2].rmse)

    assert aggregate_ci([1.5, 1.5, 1.5]) == (1.5, 0.0)
    mean, half = aggregate_ci([0.0, 2.0])
    assert mean == pytest.approx(1.0, abs=1e-9) and half == pytest.approx(1.96, abs=1e-9)

    assert rank_methods([(1.0, 0.1), (5.0, 0.1)]) == [1, 2]
    assert rank_methods([(1.0, 0.2), (1.1, 0.2)]) == [1, 1]
    assert rank_methods([(2.0, 0.0), (2.0, 0.0), (2.0, 0.0)]) == [1, 1, 1]
