"""Reconstruction and regularization terms.

All regularized objectives are written as ``ce + R(kl)``; ``*_dkl`` helpers
return dR/dkl for backpropagation.
"""
from __future__ import annotations

import numpy as np


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def cross_entropy(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Per-slot softmax cross-entropy summed over slots, averaged over the batch.

    ``logits`` is ``(B, L, V)``, ``targets`` integer ``(B, L)``. Returns the loss
    and its gradient w.r.t. ``logits``.
    """
    if logits.shape[:2] != targets.shape:
        raise ValueError(f"logits {logits.shape} and targets {targets.shape} do not align")
    b = logits.shape[0]
    logp = log_softmax(logits)
    picked = np.take_along_axis(logp, targets[..., None], axis=-1)[..., 0]
    grad = np.exp(logp)
    np.put_along_axis(grad, targets[..., None], np.take_along_axis(grad, targets[..., None], axis=-1) - 1.0, axis=-1)
    return float(-picked.sum() / b), grad / b


def kl_divergence(mu: np.ndarray, logvar: np.ndarray) -> float:
    """KL(N(mu, exp(logvar)) || N(0, I)) summed over dimensions, averaged over the batch."""
    mu = np.atleast_2d(mu)
    logvar = np.atleast_2d(logvar)
    return float(0.5 * np.sum(np.exp(logvar) + mu ** 2 - 1.0 - logvar) / mu.shape[0])


def kl_grads(mu: np.ndarray, logvar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = mu.shape[0]
    return mu / b, 0.5 * (np.exp(logvar) - 1.0) / b


def loss_beta(ce: float, kl: float, beta: float, tau: float) -> float:
    return ce + beta * max(kl - tau, 0.0)


def loss_beta_dkl(kl: float, beta: float, tau: float) -> float:
    return beta if kl > tau else 0.0


def loss_annealed(ce: float, kl: float, gamma: float, capacity: float) -> float:
    return ce + gamma * abs(kl - capacity)


def loss_annealed_dkl(kl: float, gamma: float, capacity: float) -> float:
    return gamma * float(np.sign(kl - capacity))


def loss_factor(ce: float, kl: float, capacity: float, gamma_tc: float, tc_estimate: float) -> float:
    return ce + 1.0 * abs(kl - capacity) + gamma_tc * tc_estimate


def reconstruction_accuracy(logits: np.ndarray, targets: np.ndarray) -> float:
    """Fraction of slots whose argmax logit is the target token; ties go to the lowest id."""
    logits = np.asarray(logits)
    targets = np.asarray(targets)
    if logits.shape[:-1] != targets.shape:
        raise ValueError(f"logits {logits.shape} and targets {targets.shape} do not align")
    return float(np.mean(np.argmax(logits, axis=-1) == targets))
