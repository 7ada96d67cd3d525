"""Priors, anchored regularization, and the single-member training loop.

A member is initialized at a draw from the prior (its anchor) and trained with
full-batch adaptive-moment steps on the anchored objective: mean squared error
plus a diagonal penalty pulling parameters back toward the anchor, both terms
scaled by 1/n.
"""

from dataclasses import dataclass

import numpy as np

from . import adam
from .mlp import MlpParams, flatten_params, forward, loss_gradient, unflatten_params

__all__ = [
    "PriorSpec",
    "TrainConfig",
    "TrainingDiverged",
    "compute_reg_matrix",
    "anchored_loss",
    "sample_anchor",
    "train_member",
    "Scaler",
]


class TrainingDiverged(RuntimeError):
    """Raised when training hits non-finite values; carries the epoch index."""

    def __init__(self, epoch, detail=""):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class PriorSpec:
    """Isotropic Gaussian prior over all parameters: N(mean, variance * I)."""

    mean: float = 0.0
    variance: float = 2.0

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("prior variance must be > 0")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 3000
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    hidden: tuple = (100,)
    standardize: bool = True
    noise_var: float = None  # data-noise estimate; None means take it from the dataset

    def __post_init__(self):
        if self.epochs <= 0:
            raise ValueError("epochs must be > 0")
        if self.noise_var is not None and self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if any(h <= 0 for h in self.hidden):
            raise ValueError("hidden layer widths must be > 0")


def compute_reg_matrix(noise_var, prior, param_count):
    """Diagonal of the regularization matrix: noise_var / prior.variance everywhere."""
    if noise_var < 0:
        raise ValueError("noise_var must be >= 0")
    return np.full(param_count, noise_var / prior.variance)


def anchored_loss(params, anchor, gamma, X, y):
    """(1/n)·||y - net(X)||² + (1/n)·||gamma^(1/2)·(params - anchor)||²"""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    resid = y - forward(params, X)
    diff = flatten_params(params) - flatten_params(anchor)
    gamma = np.asarray(gamma, dtype=float).ravel()
    if gamma.shape != diff.shape:
        raise ValueError(f"regularizer length {gamma.shape[0]} != parameter count {diff.shape[0]}")
    return float((resid @ resid + gamma @ (diff * diff)) / n)


def sample_anchor(prior, layer_sizes, activation, rng):
    """Draw a full parameter set i.i.d. from the prior, in flat order."""
    sizes = tuple(int(s) for s in layer_sizes)
    count = sum(sizes[i + 1] * sizes[i] + sizes[i + 1] for i in range(len(sizes) - 1))
    flat = prior.mean + np.sqrt(prior.variance) * rng.standard_normal(count)
    template = _zero_params(sizes, activation)
    return unflatten_params(flat, template)


def _zero_params(layer_sizes, activation):
    layers = []
    for i in range(len(layer_sizes) - 1):
        layers.append((np.zeros((layer_sizes[i + 1], layer_sizes[i])), np.zeros(layer_sizes[i + 1])))
    return MlpParams(tuple(layers), activation)


def train_member(dataset, config, activation, prior, rng):
    """Train one anchored member; returns (trained params, untouched anchor).

    The anchor doubles as the initialization. `rng` must be this member's own
    stream: results depend only on it, the data, and the config.
    """
    X = np.asarray(dataset.X, dtype=float)
    y = np.asarray(dataset.y, dtype=float).ravel()
    if X.shape[0] == 0:
        raise ValueError("empty dataset")
    noise_var = dataset.noise_var if config.noise_var is None else config.noise_var
    layer_sizes = (X.shape[1],) + config.hidden + (1,)

    anchor = sample_anchor(prior, layer_sizes, activation, rng)
    gamma = compute_reg_matrix(noise_var, prior, anchor.param_count)
    theta = flatten_params(anchor)
    state = adam.init_state(
        theta.shape[0], lr=config.learning_rate, beta1=config.beta1, beta2=config.beta2, eps=config.eps
    )
    params = anchor
    for epoch in range(config.epochs):
        try:
            grad = loss_gradient(params, anchor, gamma, X, y)
        except FloatingPointError as exc:
            raise TrainingDiverged(epoch, str(exc)) from exc
        theta, state = adam.optimizer_step(theta, grad, state)
        if not np.all(np.isfinite(theta)):
            raise TrainingDiverged(epoch, "non-finite parameters")
        params = unflatten_params(theta, anchor)
    return params, anchor


@dataclass(frozen=True)
class Scaler:
    """Train-statistics standardization for inputs and targets.

    Disabled scalers are identity maps. Target variances transform with
    y_std², so noise estimates move consistently between unit systems.
    """

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    enabled: bool = True

    @classmethod
    def fit(cls, X, y, enabled=True):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if not enabled:
            return cls(np.zeros(X.shape[1]), np.ones(X.shape[1]), 0.0, 1.0, enabled=False)
        x_std = X.std(axis=0)
        y_std = float(y.std())
        # Constant columns/targets standardize to zero; keep the map invertible.
        x_std = np.where(x_std < 1e-12, 1.0, x_std)
        if y_std < 1e-12:
            y_std = 1.0
        return cls(X.mean(axis=0), x_std, float(y.mean()), y_std, enabled=True)

    def transform_x(self, X):
        return (np.asarray(X, dtype=float) - self.x_mean) / self.x_std

    def transform_y(self, y):
        return (np.asarray(y, dtype=float).ravel() - self.y_mean) / self.y_std

    def inverse_y(self, y_scaled):
        return np.asarray(y_scaled, dtype=float) * self.y_std + self.y_mean

    def scale_var(self, var):
        """Original-units variance -> standardized-units variance."""
        return var / self.y_std**2

    def inverse_var(self, var_scaled):
        return var_scaled * self.y_std**2
