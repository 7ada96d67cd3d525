"""Adaptive-moment (Adam) updates as a pure function on flattened parameters."""

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["OptimizerState", "init_state", "optimizer_step"]


@dataclass(frozen=True)
class OptimizerState:
    m: np.ndarray  # first-moment accumulator
    v: np.ndarray  # second-moment accumulator
    step: int
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_state(param_count, lr=1e-2, beta1=0.9, beta2=0.999, eps=1e-8):
    return OptimizerState(
        m=np.zeros(param_count),
        v=np.zeros(param_count),
        step=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def optimizer_step(params, grads, state):
    """One bias-corrected Adam update. Returns (new_params, new_state)."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, replace(state, m=m, v=v, step=t)
