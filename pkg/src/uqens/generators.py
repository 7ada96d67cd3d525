"""Synthetic regression generators with shifted train/test sampling boxes.

Each generator is a deterministic function on a box; datasets are drawn
uniformly inside the training box and a wider testing box (the shift is the
point: test data deliberately leaves the training support). Gaussian
observation noise is added to both splits.
"""

import numpy as np

from .datasets import Dataset
from .puma import link1_acceleration

__all__ = ["GeneratorSpec", "GENERATORS", "generator_names", "generator_eval", "sample_dataset"]


def _xsinx(X):
    x = X[:, 0]
    return x * np.sin(x)


def _forrester(X):
    x = X[:, 0]
    return (6.0 * x - 2.0) ** 2 * np.sin(12.0 * x - 4.0)


def _schaffer(X):
    x1, x2 = X[:, 0], X[:, 1]
    num = np.cos(np.sin(np.abs(x1 * x1 - x2 * x2))) ** 2 - 0.5
    den = (1.0 + 0.001 * (x1 * x1 + x2 * x2)) ** 2
    return 0.5 + num / den


def _pendulum(X):
    # Horizontal tip position of a double pendulum with unit rod lengths.
    return np.sin(X[:, 0]) + np.sin(X[:, 1])


def _rastrigin(X):
    d = X.shape[1]
    return 10.0 * d + np.sum(X * X - 10.0 * np.cos(2.0 * np.pi * X), axis=1)


def _ishigami(X):
    x1, x2, x3 = X[:, 0], X[:, 1], X[:, 2]
    return np.sin(x1) + 7.0 * np.sin(x2) ** 2 + 0.1 * x3**4 * np.sin(x1)


def _environmental(X):
    # Pollutant concentration from two spills observed at s=1, t=40.1,
    # rescaled by sqrt(4 pi). Inputs: spill mass M, diffusion rate D,
    # second-spill location L, second-spill time tau.
    M, D, L, tau = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
    s, t = 1.0, 40.1
    if np.any(tau >= t):
        raise ValueError("second spill must occur before the observation time")
    dt2 = t - tau
    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = M / np.sqrt(4.0 * np.pi * D * t) * np.exp(-(s * s) / (4.0 * D * t))
        c2 = M / np.sqrt(4.0 * np.pi * D * dt2) * np.exp(-((s - L) ** 2) / (4.0 * D * dt2))
    # D -> 0 collapses both plumes to zero concentration at s != spill point.
    c1 = np.where(D > 0, c1, 0.0)
    c2 = np.where(D > 0, c2, 0.0)
    return np.sqrt(4.0 * np.pi) * (c1 + c2)


def _griewank(X):
    d = X.shape[1]
    denom = np.sqrt(np.arange(1, d + 1, dtype=float))
    return np.sum(X * X, axis=1) / 4000.0 - np.prod(np.cos(X / denom), axis=1) + 1.0


def _roos_arnold(X):
    return np.prod(np.abs(4.0 * X - 2.0), axis=1)


def _friedman(X):
    x1, x2, x3, x4, x5 = (X[:, i] for i in range(5))
    return 10.0 * np.sin(np.pi * x1 * x2) + 20.0 * (x3 - 0.5) ** 2 + 10.0 * x4 + 5.0 * x5


def _planar_arm(X):
    # First motor torque of a two-joint planar arm: row one of M(q) qdd + C q d.
    q2 = X[:, 1]
    dq1, dq2 = X[:, 2], X[:, 3]
    ddq1, ddq2 = X[:, 4], X[:, 5]
    a = 0.0625
    m11 = 0.2083 + 0.1250 * np.cos(q2)
    m12 = 0.0417 + 0.0625 * np.cos(q2)
    c11 = -a * np.sin(q2) * dq2
    c12 = a * np.sin(q2) * (dq1 + dq2)
    return m11 * ddq1 + m12 * ddq2 + c11 * dq1 + c12 * dq2


def _sum_powers(X):
    powers = np.arange(2, X.shape[1] + 2, dtype=float)
    return np.prod(np.abs(X) ** powers, axis=1)


def _ackley(X):
    d = X.shape[1]
    a, b, c = 20.0, 0.2, 2.0 * np.pi
    s1 = np.sqrt(np.sum(X * X, axis=1) / d)
    s2 = np.sum(np.cos(c * X), axis=1) / d
    return -a * np.exp(-b * s1) - np.exp(s2) + a + np.e


def _piston(X):
    # Cycle time of a piston; inputs M, S, V0, k, P0, Ta, T0.
    M, S, V0, k, P0, Ta, T0 = (X[:, i] for i in range(7))
    A = P0 * S + 19.62 * M - k * V0 / S
    inner = A * A + 4.0 * k * (P0 * V0 / T0) * Ta
    V = S / (2.0 * k) * (np.sqrt(inner) - A)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = S * S * (P0 * V0 / T0) * Ta / (V * V)
    # V0 -> 0 drives the gas term to infinity and the cycle time to zero.
    term = np.where(V0 > 0, term, np.inf)
    return 2.0 * np.pi * np.sqrt(M / (k + term))


def _robot_arm(X):
    theta = X[:, :4]
    length = X[:, 4:]
    angles = np.cumsum(theta, axis=1)
    u = np.sum(length * np.cos(angles), axis=1)
    v = np.sum(length * np.sin(angles), axis=1)
    return np.hypot(u, v)


def _borehole(X):
    rw, r, Tu, Tl, Hu, Hl, L, Kw = (X[:, i] for i in range(8))
    ln_r = np.log(r / rw)
    frac = 1.0 + 2.0 * L * Tu / (ln_r * rw * rw * Kw) + Tu / Tl
    return 2.0 * np.pi * Tu * (Hu - Hl) / (ln_r * frac)


def _styblinski_tang(X):
    return 0.5 * np.sum(X**4 - 16.0 * X * X + 5.0 * X, axis=1)


def _puma560(X):
    return link1_acceleration(X[:, 0:3], X[:, 3:6], X[:, 6:9])


def _welch(X):
    x = [X[:, i] for i in range(10)]
    return (
        5.0 * x[9] / (1.001 + x[0])
        + 5.0 * (x[3] - x[1]) ** 2
        + x[4]
        + 40.0 * x[8] ** 3
        - 5.0 * x[0]
        + 0.08 * x[2]
        + 0.25 * x[5] ** 2
        + 0.03 * x[6]
        - 0.09 * x[7]
    )


def _wing_weight(X):
    Sw, Wfw, A, sweep_deg, q, lam, tc, Nz, Wdg, Wp = (X[:, i] for i in range(10))
    cos_sweep = np.cos(np.deg2rad(sweep_deg))
    return (
        0.036
        * Sw**0.758
        * Wfw**0.0035
        * (A / cos_sweep**2) ** 0.6
        * q**0.006
        * lam**0.04
        * (100.0 * tc / cos_sweep) ** -0.3
        * (Nz * Wdg) ** 0.49
        + Sw * Wp
    )


class GeneratorSpec:
    """One synthetic benchmark: function, sampling boxes, sizes, noise."""

    def __init__(self, name, fn, train_box, test_box, n_train, n_test,
                 noise_std=0.1, category="O", train_clusters=None):
        self.name = name
        self.fn = fn
        self.train_box = tuple(tuple(map(float, b)) for b in train_box)
        self.test_box = tuple(tuple(map(float, b)) for b in test_box)
        self.n_train = int(n_train)
        self.n_test = int(n_test)
        self.noise_std = float(noise_std)
        self.category = category
        # Optional disjoint 1-d intervals replacing uniform train sampling.
        self.train_clusters = train_clusters

    @property
    def dim(self):
        return len(self.test_box)

    @property
    def noise_var(self):
        return self.noise_std**2


def _box(lo, hi, d):
    return [(lo, hi)] * d


_HALF_PI = np.pi / 2.0

GENERATORS = {}
for spec in [
    GeneratorSpec("xsinx", _xsinx, [(-2.0, 2.0)], [(-6.0, 6.0)], 20, 50,
                  category="T", train_clusters=((-2.0, -0.67), (0.67, 2.0))),
    GeneratorSpec("forrester", _forrester, [(0.0, 1.0)], [(0.0, 1.0)], 20, 50,
                  category="T", train_clusters=((0.2, 0.4), (0.65, 0.85))),
    GeneratorSpec("schaffer", _schaffer, _box(-2, 2, 2), _box(-2.5, 2.5, 2), 1000, 2500,
                  category="MLM"),
    GeneratorSpec("pendulum", _pendulum,
                  _box(-2.0 * np.pi / 3.0, np.pi / 6.0, 2), _box(-np.pi, np.pi, 2),
                  1000, 2500, category="PM"),
    GeneratorSpec("rastrigin", _rastrigin, _box(-5.12, 5.12, 3), _box(-5.5, 5.5, 3),
                  200, 500, category="MLM"),
    GeneratorSpec("ishigami", _ishigami, _box(-_HALF_PI, _HALF_PI, 3),
                  _box(-2.0 * np.pi / 3.0, 2.0 * np.pi / 3.0, 3), 2000, 5000, category="T"),
    GeneratorSpec("environmental", _environmental,
                  [(7, 13), (0.02, 0.12), (0.01, 3), (30.01, 30.295)],
                  [(5, 15), (0.0, 0.15), (0.01, 3.2), (23.71, 31)],
                  200, 500, category="PM"),
    GeneratorSpec("griewank", _griewank, _box(-500, 500, 4), _box(-600, 600, 4),
                  200, 500, category="MLM"),
    GeneratorSpec("roos_arnold", _roos_arnold, _box(0.0, 0.8, 5), _box(0.0, 1.0, 5),
                  200, 500, category="O"),
    GeneratorSpec("friedman", _friedman, _box(0.0, 0.5, 5), _box(0.0, 1.0, 5),
                  200, 500, category="T"),
    GeneratorSpec("planar_arm", _planar_arm,
                  _box(-_HALF_PI, _HALF_PI, 2) + _box(-np.pi, np.pi, 4),
                  _box(-np.pi, np.pi, 2) + _box(-2 * np.pi, 2 * np.pi, 4),
                  200, 500, category="PM"),
    GeneratorSpec("sum_powers", _sum_powers, _box(-0.75, 0.75, 6), _box(-1.0, 1.0, 6),
                  200, 500, category="O"),
    GeneratorSpec("ackley", _ackley, _box(-30, 30, 7), _box(-32.768, 32.768, 7),
                  400, 1000, category="MLM"),
    GeneratorSpec("piston", _piston,
                  [(30, 60), (0.005, 0.020), (0.002, 0.010), (1000, 5000),
                   (90000, 110000), (290, 296), (340, 360)],
                  [(0, 90), (0.005, 0.03), (0.0, 0.015), (10, 6000),
                   (80000, 120000), (285, 300), (300, 400)],
                  200, 500, category="PM"),
    GeneratorSpec("robot_arm", _robot_arm,
                  _box(0.0, np.pi, 4) + _box(0.0, 0.5, 4),
                  _box(0.0, 2.0 * np.pi, 4) + _box(0.0, 1.0, 4),
                  200, 500, category="PM"),
    GeneratorSpec("borehole", _borehole,
                  [(0.05, 0.15), (100, 50000), (63070, 115600), (63.1, 116),
                   (990, 1110), (700, 820), (1120, 1680), (9855, 12045)],
                  [(0.01, 0.2), (90, 50010), (63020, 115650), (60, 120),
                   (950, 1150), (650, 900), (1100, 1700), (9800, 12100)],
                  2000, 5000, category="PM"),
    GeneratorSpec("styblinski_tang", _styblinski_tang, _box(-5, 5, 9), _box(-6, 6, 9),
                  400, 1000, category="O"),
    GeneratorSpec("puma560", _puma560,
                  _box(-1.2 * _HALF_PI, 1.2 * _HALF_PI, 6) + _box(-0.6, 0.6, 3),
                  _box(-1.2 * _HALF_PI, 1.2 * _HALF_PI, 6) + _box(-0.6, 0.6, 3),
                  3693, 4499, noise_std=0.4, category="PM"),
    GeneratorSpec("welch", _welch, _box(-0.5, 0.5, 10), _box(-1.0, 1.0, 10),
                  200, 500, category="O"),
    GeneratorSpec("wing_weight", _wing_weight,
                  [(150, 200), (220, 300), (6, 10), (-10, 10), (16, 45),
                   (0.5, 1), (0.08, 0.18), (2.5, 6), (1700, 2500), (0.025, 0.08)],
                  [(100, 250), (200, 320), (0, 15), (-20, 20), (0, 60),
                   (0.0, 1.5), (0.05, 0.25), (0.5, 8), (1000, 3000), (0.0, 0.1)],
                  2000, 5000, category="PM"),
]:
    GENERATORS[spec.name] = spec

_GENERATOR_INDEX = {name: i for i, name in enumerate(GENERATORS)}


def generator_names():
    return list(GENERATORS)


def _get(name):
    try:
        return GENERATORS[name]
    except KeyError:
        raise KeyError(f"unknown generator {name!r}; known: {', '.join(GENERATORS)}") from None


def generator_eval(name, x):
    """Noise-free function value at a single point."""
    spec = _get(name)
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape != (spec.dim,):
        raise ValueError(f"{name} expects {spec.dim} inputs, got shape {x.shape}")
    return float(spec.fn(x[None, :])[0])


def _stream(name, seed, purpose):
    codes = {"train_x": 0, "train_noise": 1, "test_x": 2, "test_noise": 3}
    ss = np.random.SeedSequence([int(seed), _GENERATOR_INDEX[name], codes[purpose]])
    return np.random.Generator(np.random.PCG64(ss))


def _uniform_box(rng, box, n):
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return rng.uniform(lo, hi, size=(n, len(box)))


def sample_dataset(name, seed):
    """Draw (train, test) datasets; same seed always gives identical data."""
    spec = _get(name)
    rng_x = _stream(name, seed, "train_x")
    if spec.train_clusters is not None:
        n1 = spec.n_train // 2
        parts = [
            rng_x.uniform(lo, hi, size=(cnt, 1))
            for (lo, hi), cnt in zip(spec.train_clusters, (n1, spec.n_train - n1))
        ]
        X_train = np.vstack(parts)
    else:
        X_train = _uniform_box(rng_x, spec.train_box, spec.n_train)
    X_test = _uniform_box(_stream(name, seed, "test_x"), spec.test_box, spec.n_test)

    y_train = spec.fn(X_train) + spec.noise_std * _stream(name, seed, "train_noise").standard_normal(spec.n_train)
    y_test = spec.fn(X_test) + spec.noise_std * _stream(name, seed, "test_noise").standard_normal(spec.n_test)

    meta = {"generator": name, "seed": int(seed), "category": spec.category}
    train = Dataset(X_train, y_train, spec.noise_var, name=name, split="train", meta=meta)
    test = Dataset(X_test, y_test, spec.noise_var, name=name, split="test", meta=meta)
    return train, test
