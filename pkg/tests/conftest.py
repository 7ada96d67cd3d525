"""Shared helpers: finite-difference oracles and tiny network builders."""

import numpy as np
import pytest

from uqens.mlp import MlpParams, flatten_params, unflatten_params


def central_diff(f, x, h):
    """Central finite differences of a scalar function over a flat vector."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad


def random_net(rng, d_in=None, hidden=None, d_out=1, activation=None, scale=0.8):
    """Small random MlpParams for gradient checks."""
    from uqens.activations import ACTIVATION_ORDER

    d_in = d_in if d_in is not None else int(rng.integers(1, 4))
    hidden = hidden if hidden is not None else [int(rng.integers(1, 6))]
    activation = activation if activation is not None else ACTIVATION_ORDER[int(rng.integers(0, 7))]
    sizes = [d_in] + list(hidden) + [d_out]
    layers = []
    for i in range(len(sizes) - 1):
        layers.append(
            (
                scale * rng.standard_normal((sizes[i + 1], sizes[i])),
                scale * rng.standard_normal(sizes[i + 1]),
            )
        )
    return MlpParams(tuple(layers), activation)


def perturbed(params, vec):
    return unflatten_params(np.asarray(vec, dtype=float), params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def identity_scaler(d):
    from uqens.anchoring import Scaler

    return Scaler(
        x_mean=np.zeros(d),
        x_std=np.ones(d),
        y_mean=0.0,
        y_std=1.0,
        enabled=False,
    )
