"""FactorVAE total-correlation discriminator: latent -> 2 logits (joint, permuted)."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .losses import log_softmax

LEAK = 0.2
Params = dict[str, np.ndarray]


def init_discriminator(latent: int, hidden: int, rng: np.random.Generator, layers: int = 2) -> Params:
    sizes = [latent] + [hidden] * layers + [2]
    p = {}
    for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        p[f"w{i}"] = rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b))
        p[f"b{i}"] = np.zeros(b)
    return p


def zero_discriminator(latent: int, hidden: int, layers: int = 2) -> Params:
    return {k: np.zeros_like(v) for k, v in init_discriminator(latent, hidden, np.random.default_rng(0), layers).items()}


def _n_layers(p: Params) -> int:
    return sum(1 for k in p if k.startswith("w"))


class DiscCache(NamedTuple):
    inputs: list
    pre: list
    logits: np.ndarray


def disc_forward(z: np.ndarray, p: Params) -> DiscCache:
    inputs, pre = [], []
    a = z
    n = _n_layers(p)
    for i in range(n):
        inputs.append(a)
        s = a @ p[f"w{i}"] + p[f"b{i}"]
        if i < n - 1:
            pre.append(s)
            a = np.where(s > 0, s, LEAK * s)
        else:
            a = s
    return DiscCache(inputs, pre, a)


def disc_backward(p: Params, cache: DiscCache, d_logits: np.ndarray) -> tuple[Params, np.ndarray]:
    """Gradients w.r.t. discriminator parameters and w.r.t. its input."""
    g: Params = {}
    d = d_logits
    for i in reversed(range(_n_layers(p))):
        g[f"w{i}"] = cache.inputs[i].T @ d
        g[f"b{i}"] = d.sum(axis=0)
        d = d @ p[f"w{i}"].T
        if i > 0:
            d = d * np.where(cache.pre[i - 1] > 0, 1.0, LEAK)
    return g, d


def permute_dims(z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Shuffle each latent dimension independently across the batch."""
    if len(z) < 2:
        raise ValueError("permute_dims needs a batch of at least 2")
    out = np.empty_like(z)
    for j in range(z.shape[1]):
        out[:, j] = z[rng.permutation(len(z)), j]
    return out


def tc_estimate(z: np.ndarray, p: Params) -> tuple[float, np.ndarray]:
    """Density-ratio estimate mean(logit_joint - logit_perm) and its gradient w.r.t. ``z``."""
    if len(z) < 2:
        raise ValueError("tc_estimate needs a batch of at least 2")
    cache = disc_forward(z, p)
    tc = float(np.mean(cache.logits[:, 0] - cache.logits[:, 1]))
    d_logits = np.zeros_like(cache.logits)
    d_logits[:, 0] = 1.0 / len(z)
    d_logits[:, 1] = -1.0 / len(z)
    _, d_z = disc_backward(p, cache, d_logits)
    return tc, d_z


def discriminator_loss(z: np.ndarray, z_perm: np.ndarray, p: Params) -> tuple[float, Params]:
    """Cross-entropy for class 0 on joint samples and class 1 on permuted samples."""
    zz = np.concatenate([z, z_perm])
    labels = np.concatenate([np.zeros(len(z), int), np.ones(len(z_perm), int)])
    cache = disc_forward(zz, p)
    logp = log_softmax(cache.logits)
    n = len(zz)
    loss = float(-logp[np.arange(n), labels].mean())
    d_logits = np.exp(logp)
    d_logits[np.arange(n), labels] -= 1.0
    g, _ = disc_backward(p, cache, d_logits / n)
    return loss, g
