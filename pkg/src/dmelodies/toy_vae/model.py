"""Single-hidden-layer encoder and decoder over one-hot token sequences."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

SEQ_LEN = 16

Params = dict[str, np.ndarray]


def init_params(vocab_size: int, hidden: int, latent: int, rng: np.random.Generator, seq_len: int = SEQ_LEN) -> Params:
    """Glorot-uniform weights, zero biases."""
    n_in = seq_len * vocab_size

    def glorot(fan_in, fan_out):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-a, a, size=(fan_in, fan_out))

    return {
        "enc_w": glorot(n_in, hidden),
        "enc_b": np.zeros(hidden),
        "mu_w": glorot(hidden, latent),
        "mu_b": np.zeros(latent),
        "logvar_w": glorot(hidden, latent),
        "logvar_b": np.zeros(latent),
        "dec_w": glorot(latent, hidden),
        "dec_b": np.zeros(hidden),
        "out_w": glorot(hidden, n_in),
        "out_b": np.zeros(n_in),
    }


def check_params(params: Params) -> None:
    h = params["enc_b"].shape[0]
    d = params["mu_b"].shape[0]
    n_in = params["enc_w"].shape[0]
    expected = {
        "enc_w": (n_in, h), "enc_b": (h,), "mu_w": (h, d), "mu_b": (d,),
        "logvar_w": (h, d), "logvar_b": (d,), "dec_w": (d, h), "dec_b": (h,),
        "out_w": (h, n_in), "out_b": (n_in,),
    }
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ValueError(f"{name} has shape {params[name].shape}, expected {shape}")


def one_hot_batch(token_ids: np.ndarray, vocab_size: int) -> np.ndarray:
    b, length = token_ids.shape
    x = np.zeros((b, length * vocab_size))
    x[np.arange(b)[:, None], np.arange(length)[None, :] * vocab_size + token_ids] = 1.0
    return x


def _encoder_preactivation(x: np.ndarray, params: Params) -> np.ndarray:
    """``x @ enc_w + enc_b``; integer ``(B, L)`` token ids take a row-gather shortcut."""
    w = params["enc_w"]
    if np.issubdtype(x.dtype, np.integer):
        vocab = w.shape[0] // x.shape[1]
        rows = np.arange(x.shape[1]) * vocab + x
        return w[rows].sum(axis=1) + params["enc_b"]
    if x.shape[-1] != w.shape[0]:
        raise ValueError(f"input width {x.shape[-1]} does not match encoder {w.shape[0]}")
    return x @ w + params["enc_b"]


def encode(x: np.ndarray, params: Params) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and log-variance for one-hot rows or integer token ids."""
    h = np.tanh(_encoder_preactivation(x, params))
    return h @ params["mu_w"] + params["mu_b"], h @ params["logvar_w"] + params["logvar_b"]


def reparameterize(mu: np.ndarray, logvar: np.ndarray, noise: np.ndarray) -> np.ndarray:
    if noise.shape != mu.shape or logvar.shape != mu.shape:
        raise ValueError("mu, logvar and noise must share a shape")
    return mu + np.exp(0.5 * logvar) * noise


def decode(z: np.ndarray, params: Params, seq_len: int = SEQ_LEN) -> np.ndarray:
    """Per-slot logits of shape ``(..., seq_len, vocab)``."""
    if z.shape[-1] != params["dec_w"].shape[0]:
        raise ValueError(f"latent width {z.shape[-1]} does not match decoder {params['dec_w'].shape[0]}")
    h = np.tanh(z @ params["dec_w"] + params["dec_b"])
    out = h @ params["out_w"] + params["out_b"]
    return out.reshape(out.shape[:-1] + (seq_len, -1))


class Cache(NamedTuple):
    x: np.ndarray
    h_enc: np.ndarray
    mu: np.ndarray
    logvar: np.ndarray
    noise: np.ndarray
    z: np.ndarray
    h_dec: np.ndarray
    logits: np.ndarray


def forward(x: np.ndarray, params: Params, noise: np.ndarray, seq_len: int = SEQ_LEN) -> Cache:
    h_enc = np.tanh(_encoder_preactivation(x, params))
    mu = h_enc @ params["mu_w"] + params["mu_b"]
    logvar = h_enc @ params["logvar_w"] + params["logvar_b"]
    z = reparameterize(mu, logvar, noise)
    h_dec = np.tanh(z @ params["dec_w"] + params["dec_b"])
    logits = (h_dec @ params["out_w"] + params["out_b"]).reshape(len(x), seq_len, -1)
    return Cache(x, h_enc, mu, logvar, noise, z, h_dec, logits)


def backward(params: Params, cache: Cache, d_logits: np.ndarray, d_mu: np.ndarray, d_logvar: np.ndarray,
             d_z_extra: np.ndarray | None = None) -> Params:
    """Gradients of a scalar loss given its partials w.r.t. logits, mu, logvar and (optionally) z."""
    g: Params = {}
    d_out = d_logits.reshape(len(cache.x), -1)
    g["out_w"] = cache.h_dec.T @ d_out
    g["out_b"] = d_out.sum(axis=0)
    d_hdec = (d_out @ params["out_w"].T) * (1.0 - cache.h_dec ** 2)
    g["dec_w"] = cache.z.T @ d_hdec
    g["dec_b"] = d_hdec.sum(axis=0)
    d_z = d_hdec @ params["dec_w"].T
    if d_z_extra is not None:
        d_z = d_z + d_z_extra
    d_mu = d_mu + d_z
    d_logvar = d_logvar + d_z * cache.noise * 0.5 * np.exp(0.5 * cache.logvar)
    g["mu_w"] = cache.h_enc.T @ d_mu
    g["mu_b"] = d_mu.sum(axis=0)
    g["logvar_w"] = cache.h_enc.T @ d_logvar
    g["logvar_b"] = d_logvar.sum(axis=0)
    d_henc = (d_mu @ params["mu_w"].T + d_logvar @ params["logvar_w"].T) * (1.0 - cache.h_enc ** 2)
    x = cache.x
    if np.issubdtype(x.dtype, np.integer):
        x = one_hot_batch(x, params["enc_w"].shape[0] // x.shape[1])
    g["enc_w"] = x.T @ d_henc
    g["enc_b"] = d_henc.sum(axis=0)
    return g
