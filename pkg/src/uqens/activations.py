"""The seven hidden-layer activation functions and their exact derivatives.

The canonical ordering below is load-bearing: ensembles assign activations to
members by position in this list, so reordering it changes every seeded result.
"""

import numpy as np
from scipy.special import erf

__all__ = ["ACTIVATIONS", "activation_eval", "activation_grad", "check_finite"]

# SELU constants (Klambauer et al.'s published fixed-point values).
_SELU_LAMBDA = 1.0507009873554805
_SELU_ALPHA = 1.6732632423543772

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _sigmoid(z):
    # exp(-|z|) never overflows, so both branches stay stable.
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _gelu(z):
    # Exact form z * Phi(z), not the tanh approximation.
    return z * 0.5 * (1.0 + erf(z * _INV_SQRT2))


def _gelu_grad(z):
    phi_cdf = 0.5 * (1.0 + erf(z * _INV_SQRT2))
    phi_pdf = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return phi_cdf + z * phi_pdf


def _softsign(z):
    return z / (1.0 + np.abs(z))


def _softsign_grad(z):
    return 1.0 / (1.0 + np.abs(z)) ** 2


def _swish(z):
    return z * _sigmoid(z)


def _swish_grad(z):
    s = _sigmoid(z)
    return s + z * s * (1.0 - s)


def _selu(z):
    return _SELU_LAMBDA * np.where(z > 0, z, _SELU_ALPHA * np.expm1(np.minimum(z, 0.0)))


def _selu_grad(z):
    grad = np.where(
        z > 0,
        _SELU_LAMBDA,
        _SELU_LAMBDA * _SELU_ALPHA * np.exp(np.minimum(z, 0.0)),
    )
    # At the kink the one-sided derivatives differ; use the midpoint, which is
    # the limit of central finite differences there.
    return np.where(z == 0, 0.5 * (_SELU_LAMBDA + _SELU_LAMBDA * _SELU_ALPHA), grad)


def _tanh_grad(z):
    t = np.tanh(z)
    return 1.0 - t * t


def _erf_grad(z):
    return (2.0 / np.sqrt(np.pi)) * np.exp(-z * z)


def _linear(z):
    return np.asarray(z, dtype=float) + 0.0


def _ones(z):
    return np.ones_like(z, dtype=float)


# name -> (eval, grad), in the canonical assignment order.
ACTIVATIONS = {
    "gelu": (_gelu, _gelu_grad),
    "softsign": (_softsign, _softsign_grad),
    "swish": (_swish, _swish_grad),
    "selu": (_selu, _selu_grad),
    "tanh": (np.tanh, _tanh_grad),
    "erf": (erf, _erf_grad),
    "linear": (_linear, _ones),
}

ACTIVATION_ORDER = tuple(ACTIVATIONS)


def check_finite(z, context):
    """Raise ValueError naming `context` if z has non-finite entries."""
    if not np.all(np.isfinite(z)):
        raise ValueError(f"non-finite input to {context}")


def _resolve(kind):
    try:
        return ACTIVATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown activation {kind!r}; expected one of {list(ACTIVATIONS)}") from None


def activation_eval(kind, z):
    """Evaluate activation `kind` elementwise. Scalars in, scalar out."""
    z_arr = np.asarray(z, dtype=float)
    check_finite(z_arr, f"activation {kind}")
    out = _resolve(kind)[0](z_arr)
    return float(out) if np.isscalar(z) or z_arr.ndim == 0 else out


def activation_grad(kind, z):
    """Exact elementwise derivative of activation_eval(kind, .)."""
    z_arr = np.asarray(z, dtype=float)
    check_finite(z_arr, f"activation {kind}")
    out = _resolve(kind)[1](z_arr)
    return float(out) if np.isscalar(z) or z_arr.ndim == 0 else out
