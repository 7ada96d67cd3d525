"""Ensembles with randomized activation functions for regression uncertainty.

The library trains small fully connected networks as ensembles, where
predictive uncertainty comes from member disagreement plus a data-noise
term. Four ensemble flavours are provided (randomized-activation anchored,
fixed-activation anchored, mean/variance-head, and randomized-prior), along
with synthetic benchmark generators, CSV ingestion, scoring metrics, and a
deterministic experiment runner exposed through the ``uqens-bench`` CLI.
"""

__version__ = "0.1.0"

from .activations import ACTIVATION_ORDER, ACTIVATIONS, activation_eval, activation_grad
from .adam import OptimizerState, init_state, optimizer_step
from .anchoring import (
    PriorSpec,
    Scaler,
    TrainConfig,
    TrainingDiverged,
    anchored_loss,
    compute_reg_matrix,
    sample_anchor,
    train_member,
)
from .datasets import Dataset
from .ensembles import (
    EnsembleModel,
    MemberTrainingError,
    MethodSpec,
    PredictiveEstimate,
    assign_activations,
    load_model,
    predict,
    save_model,
    train_ensemble,
)
from .generators import GENERATORS, generator_eval, generator_names, sample_dataset
from .ingest import (
    IngestSpec,
    export_csv,
    ingest,
    invert_target,
    load_csv,
    preset_names,
    preset_spec,
    split,
)
from .metrics import (
    aggregate_ci,
    confidence_error_curve,
    default_thresholds,
    gaussian_nll,
    rank_methods,
    rmse,
)
from .mlp import MlpParams, flatten_params, forward, forward_multi, loss_gradient, unflatten_params
from .runner import (
    ExperimentConfig,
    emit_band_data,
    load_config,
    run_ablation_k,
    run_ablation_m,
    run_experiment,
)

__all__ = [
    "__version__",
    "ACTIVATIONS",
    "ACTIVATION_ORDER",
    "activation_eval",
    "activation_grad",
    "OptimizerState",
    "init_state",
    "optimizer_step",
    "PriorSpec",
    "Scaler",
    "TrainConfig",
    "TrainingDiverged",
    "anchored_loss",
    "compute_reg_matrix",
    "sample_anchor",
    "train_member",
    "Dataset",
    "EnsembleModel",
    "MemberTrainingError",
    "MethodSpec",
    "PredictiveEstimate",
    "assign_activations",
    "load_model",
    "predict",
    "save_model",
    "train_ensemble",
    "GENERATORS",
    "generator_eval",
    "generator_names",
    "sample_dataset",
    "IngestSpec",
    "export_csv",
    "ingest",
    "invert_target",
    "load_csv",
    "preset_names",
    "preset_spec",
    "split",
    "aggregate_ci",
    "confidence_error_curve",
    "default_thresholds",
    "gaussian_nll",
    "rank_methods",
    "rmse",
    "MlpParams",
    "flatten_params",
    "forward",
    "forward_multi",
    "loss_gradient",
    "unflatten_params",
    "ExperimentConfig",
    "emit_band_data",
    "load_config",
    "run_ablation_k",
    "run_ablation_m",
    "run_experiment",
]
