"""Fully-connected regression networks: evaluation and exact gradients.

Parameters are kept as per-layer (weight, bias) pairs but every optimizer and
regularizer works on the flattened vector, so flatten/unflatten round-tripping
exactly is part of the contract.
"""

from dataclasses import dataclass

import numpy as np

from .activations import ACTIVATIONS, activation_grad

__all__ = [
    "MlpParams",
    "flatten_params",
    "unflatten_params",
    "forward",
    "forward_multi",
    "output_grad_backprop",
    "loss_gradient",
]


@dataclass(frozen=True)
class MlpParams:
    """Weights/biases of an MLP; `activation` applies at every hidden layer,
    the output layer is affine."""

    layers: tuple  # ((W, b), ...) with W shaped (out, in), b shaped (out,)
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not self.layers:
            raise ValueError("network needs at least one layer")
        layers = tuple((np.asarray(w, dtype=float), np.asarray(b, dtype=float)) for w, b in self.layers)
        object.__setattr__(self, "layers", layers)
        for i, (w, b) in enumerate(layers):
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ValueError(f"layer {i}: weight {w.shape} and bias {b.shape} do not agree")
            if i > 0 and layers[i - 1][0].shape[0] != w.shape[1]:
                raise ValueError(
                    f"layer {i}: input width {w.shape[1]} != previous output width "
                    f"{layers[i - 1][0].shape[0]}"
                )

    @property
    def layer_sizes(self):
        """(d_in, hidden..., d_out)"""
        sizes = [self.layers[0][0].shape[1]]
        sizes.extend(w.shape[0] for w, _ in self.layers)
        return tuple(sizes)

    @property
    def param_count(self):
        return sum(w.size + b.size for w, b in self.layers)


def flatten_params(params):
    """Concatenate all weights then biases layer by layer into one vector."""
    parts = []
    for w, b in params.layers:
        parts.append(w.ravel())
        parts.append(b)
    return np.concatenate(parts)


def unflatten_params(vec, template):
    """Inverse of flatten_params for networks shaped like `template`."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (template.param_count,):
        raise ValueError(f"expected vector of length {template.param_count}, got shape {vec.shape}")
    layers = []
    pos = 0
    for w, b in template.layers:
        layers.append(
            (
                vec[pos : pos + w.size].reshape(w.shape),
                vec[pos + w.size : pos + w.size + b.size],
            )
        )
        pos += w.size + b.size
    return MlpParams(tuple(layers), template.activation)


def _check_input(params, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected 2-d input matrix, got shape {X.shape}")
    d_expected = params.layers[0][0].shape[1]
    if X.shape[1] != d_expected:
        raise ValueError(f"input has {X.shape[1]} features, network expects {d_expected}")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite input to network layer 0")
    return X


def _forward_cache(params, X):
    """Run the net, keeping pre-activations and activations for backprop."""
    act = ACTIVATIONS[params.activation][0]
    last = len(params.layers) - 1
    a = X
    pre, post = [], [X]
    for i, (w, b) in enumerate(params.layers):
        z = a @ w.T + b
        if not np.all(np.isfinite(z)):
            raise FloatingPointError(f"non-finite values in network layer {i}")
        a = z if i == last else act(z)
        pre.append(z)
        post.append(a)
    return pre, post


def forward_multi(params, X):
    """Network outputs, shape (n, output_width)."""
    X = _check_input(params, X)
    return _forward_cache(params, X)[1][-1]


def forward(params, X):
    """Scalar-output network predictions, shape (n,)."""
    out = forward_multi(params, X)
    if out.shape[1] != 1:
        raise ValueError(f"forward expects a 1-output network, got output width {out.shape[1]}")
    return out[:, 0]


def output_grad_backprop(params, X, out_grad, cache=None):
    """Flattened d(loss)/d(params) given d(loss)/d(outputs) as (n, o).

    Reverse-mode chain rule through the affine/activation stack; the caller
    supplies whatever loss it differentiates at the output layer.
    """
    X = _check_input(params, X)
    out_grad = np.asarray(out_grad, dtype=float)
    pre, post = cache if cache is not None else _forward_cache(params, X)
    if out_grad.shape != pre[-1].shape:
        raise ValueError(f"output gradient shape {out_grad.shape} != outputs shape {pre[-1].shape}")

    grads = [None] * len(params.layers)
    delta = out_grad
    for i in range(len(params.layers) - 1, -1, -1):
        w, _ = params.layers[i]
        grads[i] = (delta.T @ post[i], delta.sum(axis=0))
        if i > 0:
            delta = (delta @ w) * activation_grad(params.activation, pre[i - 1])

    parts = []
    for gw, gb in grads:
        parts.append(gw.ravel())
        parts.append(gb)
    return np.concatenate(parts)


def loss_gradient(params, anchor, gamma, X, y):
    """Flattened gradient of the anchored objective
    (1/n)·||y - net(X)||² + (1/n)·||gamma^(1/2)·(params - anchor)||².
    """
    X = _check_input(params, X)
    y = np.asarray(y, dtype=float).ravel()
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    if y.shape[0] != n:
        raise ValueError(f"{n} rows but {y.shape[0]} targets")

    pre, post = _forward_cache(params, X)
    yhat = post[-1]
    if yhat.shape[1] != 1:
        raise ValueError("anchored loss expects a 1-output network")
    out_grad = (2.0 / n) * (yhat[:, 0] - y)[:, None]
    grad = output_grad_backprop(params, X, out_grad, cache=(pre, post))

    theta = flatten_params(params)
    theta0 = flatten_params(anchor)
    if theta0.shape != theta.shape:
        raise ValueError("anchor shape does not match parameter shape")
    gamma = np.asarray(gamma, dtype=float).ravel()
    if gamma.shape != theta.shape:
        raise ValueError(f"regularizer length {gamma.shape[0]} != parameter count {theta.shape[0]}")
    grad += (2.0 / n) * gamma * (theta - theta0)
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient")
    return grad
