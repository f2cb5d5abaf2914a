"""Dense VAE with hand-derived gradients for benchmarking the three objectives."""
from .losses import (
    cross_entropy,
    kl_divergence,
    loss_annealed,
    loss_beta,
    loss_factor,
    reconstruction_accuracy,
)
from .model import decode, encode, init_params, reparameterize
from .optim import AdamState, adam_step
from .training import (
    METHODS,
    Regularizer,
    TrainConfig,
    TrainHistory,
    TrainingDiverged,
    anneal,
    grad_check,
    train,
)

__all__ = [
    "AdamState",
    "METHODS",
    "Regularizer",
    "TrainConfig",
    "TrainHistory",
    "TrainingDiverged",
    "adam_step",
    "anneal",
    "cross_entropy",
    "decode",
    "encode",
    "grad_check",
    "init_params",
    "kl_divergence",
    "loss_annealed",
    "loss_beta",
    "loss_factor",
    "reconstruction_accuracy",
    "reparameterize",
    "train",
]
