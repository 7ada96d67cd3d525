"""Shared dataset container used by generators, CSV ingestion and the runner."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Dataset"]


@dataclass(frozen=True)
class Dataset:
    """Design matrix plus targets with provenance and known noise level."""

    X: np.ndarray  # (n, d)
    y: np.ndarray  # (n,)
    noise_var: float
    name: str = ""
    split: str = ""  # "train" | "test" | ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]
