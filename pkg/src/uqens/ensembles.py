"""Ensemble training and predictive aggregation for four methods.

- "raf":      anchored members, each with a different (or randomly drawn)
              hidden activation from the canonical seven.
- "anchored": anchored members sharing one fixed activation.
- "deep":     randomly initialized members with mean + log-variance heads
              trained under Gaussian NLL; no anchoring.
- "rp":       each member is a trainable net plus a frozen random prior net;
              the sum fits a bootstrap resample under MSE.

Member randomness comes from per-(seed, member, purpose) streams so results
never depend on training order, ensemble size, or scheduling.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from . import adam
from .activations import ACTIVATION_ORDER, ACTIVATIONS
from .anchoring import PriorSpec, Scaler, TrainConfig, TrainingDiverged, train_member
from .datasets import Dataset
from .mlp import (
    MlpParams,
    flatten_params,
    forward,
    forward_multi,
    output_grad_backprop,
    unflatten_params,
)

__all__ = [
    "MethodSpec",
    "EnsembleModel",
    "PredictiveEstimate",
    "assign_activations",
    "train_ensemble",
    "predict",
    "save_model",
    "load_model",
    "MemberTrainingError",
]

LOG_VAR_CLAMP = 10.0  # deep method: log-variance clipped to [-10, 10]

_PURPOSE_CODES = {"assign": 0, "anchor": 1, "init": 2, "bootstrap": 3, "prior_init": 4}


class MemberTrainingError(RuntimeError):
    """Wraps a member failure with its index so sweeps can report precisely."""

    def __init__(self, member_index, cause):
        self.member_index = member_index
        super().__init__(f"member {member_index} failed: {cause}")


@dataclass(frozen=True)
class MethodSpec:
    """Which ensemble flavour to train, plus its per-method knobs.

    `activation` is the fixed hidden activation: required meaning for
    "anchored", the hidden nonlinearity for "deep"/"rp" (default tanh),
    ignored by "raf". `af_count` truncates the canonical activation set to
    its first k entries (the cardinality ablation). `beta`/`bootstrap`
    apply to "rp" only.
    """

    kind: str
    activation: str = None
    beta: float = 1.0
    bootstrap: bool = True
    af_count: int = len(ACTIVATION_ORDER)

    def __post_init__(self):
        if self.kind not in ("raf", "anchored", "deep", "rp"):
            raise ValueError(f"unknown method kind {self.kind!r}")
        if not 1 <= self.af_count <= len(ACTIVATION_ORDER):
            raise ValueError(f"af_count must be in [1, {len(ACTIVATION_ORDER)}]")
        if self.kind == "rp" and self.beta < 0:
            raise ValueError("rp beta must be >= 0")
        default = "tanh" if self.kind in ("anchored", "deep", "rp") else None
        act = self.activation if self.activation is not None else default
        if act is not None and act not in ACTIVATIONS:
            raise ValueError(f"unknown activation {act!r}")
        object.__setattr__(self, "activation", act)

    @property
    def label(self):
        if self.kind == "anchored":
            return f"anchored:{self.activation}"
        if self.kind == "raf" and self.af_count != len(ACTIVATION_ORDER):
            return f"raf:k={self.af_count}"
        return self.kind


@dataclass(frozen=True)
class PredictiveEstimate:
    """Per-point predictive mean and variance split."""

    mean: np.ndarray
    epistemic_var: np.ndarray
    total_var: np.ndarray


@dataclass(frozen=True)
class EnsembleModel:
    method: MethodSpec
    members: tuple  # MlpParams per member
    anchors: tuple  # MlpParams per member, or None (deep/rp)
    priors: tuple  # frozen prior nets for rp, or None
    activations: tuple  # hidden activation per member
    noise_var: float  # data-noise estimate, original target units
    scaler: Scaler

    @property
    def m(self):
        return len(self.members)


def member_stream(seed, member_index, purpose):
    """Independent generator for one member and one purpose."""
    ss = np.random.SeedSequence([int(seed), int(member_index), _PURPOSE_CODES[purpose]])
    return np.random.Generator(np.random.PCG64(ss))


def assign_activations(m, af_set, rng):
    """First k members get af_set in order; the rest draw uniformly from it."""
    af_set = list(af_set)
    if m < 1:
        raise ValueError("m must be >= 1")
    if not af_set:
        raise ValueError("activation set must be non-empty")
    k = len(af_set)
    out = [af_set[j] for j in range(min(m, k))]
    for _ in range(k, m):
        out.append(af_set[int(rng.integers(0, k))])
    return out


def _random_init(layer_sizes, activation, rng):
    """Fan-in scaled normal weights, zero biases (non-anchored baselines)."""
    layers = []
    for i in range(len(layer_sizes) - 1):
        fan_in = layer_sizes[i]
        w = rng.standard_normal((layer_sizes[i + 1], fan_in)) / np.sqrt(fan_in)
        layers.append((w, np.zeros(layer_sizes[i + 1])))
    return MlpParams(tuple(layers), activation)


def _fit(config, params0, grad_fn):
    """Shared full-batch training loop; grad_fn(params) -> flat gradient."""
    theta = flatten_params(params0)
    state = adam.init_state(
        theta.shape[0], lr=config.learning_rate, beta1=config.beta1, beta2=config.beta2, eps=config.eps
    )
    params = params0
    for epoch in range(config.epochs):
        try:
            grad = grad_fn(params)
        except FloatingPointError as exc:
            raise TrainingDiverged(epoch, str(exc)) from exc
        theta, state = adam.optimizer_step(theta, grad, state)
        if not np.all(np.isfinite(theta)):
            raise TrainingDiverged(epoch, "non-finite parameters")
        params = unflatten_params(theta, params0)
    return params


def gaussian_nll_output_grad(out, y):
    """d(mean NLL)/d(outputs) for a (mean, log-variance) head, clamp-aware."""
    n = out.shape[0]
    mu = out[:, 0]
    s_raw = out[:, 1]
    s = np.clip(s_raw, -LOG_VAR_CLAMP, LOG_VAR_CLAMP)
    inv_v = np.exp(-s)
    r = mu - y
    d_mu = r * inv_v / n
    inside = (s_raw > -LOG_VAR_CLAMP) & (s_raw < LOG_VAR_CLAMP)
    d_s = (0.5 - 0.5 * r * r * inv_v) / n * inside
    return np.stack([d_mu, d_s], axis=1)


def _deep_grad_fn(X, y):
    def grad_fn(params):
        out = forward_multi(params, X)
        return output_grad_backprop(params, X, gaussian_nll_output_grad(out, y))

    return grad_fn


def _mse_grad_fn(X, y, anchor, gamma):
    from .mlp import loss_gradient

    def grad_fn(params):
        return loss_gradient(params, anchor, gamma, X, y)

    return grad_fn


def train_ensemble(dataset, method, m, prior=None, config=None, seed=0):
    """Train all members deterministically from (dataset, method, m, seed)."""
    if m < 2:
        raise ValueError("ensemble size m must be >= 2")
    if int(seed) < 0:
        raise ValueError("seed must be >= 0")
    prior = prior if prior is not None else PriorSpec()
    config = config if config is not None else TrainConfig()

    scaler = Scaler.fit(dataset.X, dataset.y, enabled=config.standardize)
    Xs = scaler.transform_x(dataset.X)
    ys = scaler.transform_y(dataset.y)
    noise_orig = dataset.noise_var if config.noise_var is None else config.noise_var
    noise_std = scaler.scale_var(noise_orig)
    n = Xs.shape[0]

    if method.kind in ("raf", "anchored"):
        if method.kind == "raf":
            af_set = list(ACTIVATION_ORDER[: method.af_count])
            activations = assign_activations(m, af_set, member_stream(seed, 0, "assign"))
        else:
            activations = [method.activation] * m
        ds_std = Dataset(Xs, ys, noise_std, name=dataset.name, split="train")
        member_config = replace(config, noise_var=None)
        members, anchors = [], []
        for j in range(m):
            try:
                trained, anchor = train_member(
                    ds_std, member_config, activations[j], prior, member_stream(seed, j, "anchor")
                )
            except TrainingDiverged as exc:
                raise MemberTrainingError(j, exc) from exc
            members.append(trained)
            anchors.append(anchor)
        return EnsembleModel(
            method, tuple(members), tuple(anchors), None, tuple(activations), noise_orig, scaler
        )

    hidden_act = method.activation
    if method.kind == "deep":
        layer_sizes = (Xs.shape[1],) + config.hidden + (2,)
        members = []
        for j in range(m):
            params0 = _random_init(layer_sizes, hidden_act, member_stream(seed, j, "init"))
            try:
                members.append(_fit(config, params0, _deep_grad_fn(Xs, ys)))
            except TrainingDiverged as exc:
                raise MemberTrainingError(j, exc) from exc
        return EnsembleModel(
            method, tuple(members), None, None, (hidden_act,) * m, noise_orig, scaler
        )

    # rp: trainable net + frozen prior net; the sum fits a bootstrap resample.
    layer_sizes = (Xs.shape[1],) + config.hidden + (1,)
    members, priors_nets = [], []
    zero_gamma = np.zeros(
        sum(layer_sizes[i + 1] * layer_sizes[i] + layer_sizes[i + 1] for i in range(len(layer_sizes) - 1))
    )
    for j in range(m):
        prior_net = _random_init(layer_sizes, hidden_act, member_stream(seed, j, "prior_init"))
        params0 = _random_init(layer_sizes, hidden_act, member_stream(seed, j, "init"))
        if method.bootstrap:
            idx = member_stream(seed, j, "bootstrap").integers(0, n, size=n)
        else:
            idx = np.arange(n)
        Xb, yb = Xs[idx], ys[idx]
        # Fitting net to (y - beta * prior) under MSE has the same gradients as
        # fitting net + beta * prior to y.
        y_target = yb - method.beta * forward(prior_net, Xb)
        try:
            members.append(
                _fit(config, params0, _mse_grad_fn(Xb, y_target, params0, zero_gamma))
            )
        except TrainingDiverged as exc:
            raise MemberTrainingError(j, exc) from exc
        priors_nets.append(prior_net)
    return EnsembleModel(
        method, tuple(members), None, tuple(priors_nets), (hidden_act,) * m, noise_orig, scaler
    )


def _ordered_sum(values):
    """Sum over the member axis with a canonical addend order, so the result
    is bit-identical under member permutation."""
    return np.sort(values, axis=0).sum(axis=0)


def predict(model, X):
    """Ensemble predictive mean / epistemic variance / total variance."""
    if model.m < 2:
        raise ValueError("prediction needs m >= 2")
    Xs = model.scaler.transform_x(np.asarray(X, dtype=float))
    m = model.m

    if model.method.kind == "deep":
        outs = [forward_multi(member, Xs) for member in model.members]
        mus = np.stack([model.scaler.inverse_y(o[:, 0]) for o in outs])
        lvars = np.stack([np.clip(o[:, 1], -LOG_VAR_CLAMP, LOG_VAR_CLAMP) for o in outs])
        vars_ = model.scaler.inverse_var(np.exp(lvars))
        mean = _ordered_sum(mus) / m
        second_moment = _ordered_sum(vars_ + mus * mus) / m
        total = second_moment - mean * mean
        epistemic = _ordered_sum((mus - mean) ** 2) / (m - 1)
        return PredictiveEstimate(mean, epistemic, np.maximum(total, 0.0))

    preds = []
    for j, member in enumerate(model.members):
        p = forward(member, Xs)
        if model.method.kind == "rp":
            p = p + model.method.beta * forward(model.priors[j], Xs)
        preds.append(model.scaler.inverse_y(p))
    preds = np.stack(preds)
    mean = _ordered_sum(preds) / m
    epistemic = _ordered_sum((preds - mean) ** 2) / (m - 1)
    return PredictiveEstimate(mean, epistemic, epistemic + model.noise_var)


MODEL_FORMAT_VERSION = 1


def save_model(model, path):
    """Versioned JSON snapshot; floats survive the round trip exactly."""
    members = []
    for j in range(model.m):
        entry = {"params": flatten_params(model.members[j]).tolist()}
        if model.anchors is not None:
            entry["anchor"] = flatten_params(model.anchors[j]).tolist()
        if model.priors is not None:
            entry["prior"] = flatten_params(model.priors[j]).tolist()
        members.append(entry)
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "method": {
            "kind": model.method.kind,
            "activation": model.method.activation,
            "beta": model.method.beta,
            "bootstrap": model.method.bootstrap,
            "af_count": model.method.af_count,
        },
        "m": model.m,
        "layer_sizes": list(model.members[0].layer_sizes),
        "activations": list(model.activations),
        "noise_var": model.noise_var,
        "scaler": {
            "x_mean": model.scaler.x_mean.tolist(),
            "x_std": model.scaler.x_std.tolist(),
            "y_mean": model.scaler.y_mean,
            "y_std": model.scaler.y_std,
            "enabled": model.scaler.enabled,
        },
        "members": members,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('format_version')!r}")
    method = MethodSpec(
        kind=doc["method"]["kind"],
        activation=doc["method"]["activation"],
        beta=doc["method"]["beta"],
        bootstrap=doc["method"]["bootstrap"],
        af_count=doc["method"]["af_count"],
    )
    sizes = tuple(doc["layer_sizes"])
    activations = tuple(doc["activations"])
    from .anchoring import _zero_params

    members, anchors, priors = [], [], []
    for j, entry in enumerate(doc["members"]):
        template = _zero_params(sizes, activations[j])
        members.append(unflatten_params(np.array(entry["params"]), template))
        if "anchor" in entry:
            anchors.append(unflatten_params(np.array(entry["anchor"]), template))
        if "prior" in entry:
            priors.append(unflatten_params(np.array(entry["prior"]), template))
    sc = doc["scaler"]
    scaler = Scaler(
        np.array(sc["x_mean"]), np.array(sc["x_std"]), sc["y_mean"], sc["y_std"], sc["enabled"]
    )
    return EnsembleModel(
        method,
        tuple(members),
        tuple(anchors) if anchors else None,
        tuple(priors) if priors else None,
        activations,
        doc["noise_var"],
        scaler,
    )
