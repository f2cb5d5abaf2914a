"""Training loop, annealing schedule and gradient checking."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import discriminator as disc
from .losses import (
    cross_entropy,
    kl_divergence,
    kl_grads,
    loss_annealed,
    loss_annealed_dkl,
    loss_beta,
    loss_beta_dkl,
    loss_factor,
    reconstruction_accuracy,
)
from .model import Params, backward, check_params, encode, forward, init_params, one_hot_batch
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)

METHODS = ("beta", "annealed", "factor")
ANNEAL_RATE = math.log(1000.0)


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    method: str = "beta"
    beta: float = 1.0
    gamma: float = 1.0
    capacity: float = 50.0
    tau: float = 50.0
    gamma_tc: float = 10.0
    lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    disc_lr: float = 1e-4
    disc_beta1: float = 0.8
    disc_beta2: float = 0.9
    disc_hidden: int = 256
    disc_layers: int = 2
    batch: int = 128
    epochs: int = 50
    warmup_epochs: int = 10
    anneal_iters: int = 2000
    seed: int = 0
    subset_size: int = 10_000
    latent_dim: int = 32
    hidden: int = 256

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.lr <= 0 or self.disc_lr <= 0 or self.adam_eps <= 0:
            raise ValueError("learning rates and eps must be positive")
        for b in (self.adam_beta1, self.adam_beta2, self.disc_beta1, self.disc_beta2):
            if not 0 < b < 1:
                raise ValueError("ADAM decay rates must lie in (0, 1)")
        if self.batch < 1 or self.epochs < 0 or self.anneal_iters <= 0:
            raise ValueError("batch must be >= 1, epochs >= 0, anneal_iters > 0")
        if self.method == "factor" and self.batch < 2:
            raise ValueError("FactorVAE needs batches of at least 2")

    @classmethod
    def full_scale(cls, **overrides) -> "TrainConfig":
        """Benchmark-scale settings: batch 512, 100 epochs, lr 1e-4, 100000 annealing iterations."""
        base = dict(lr=1e-4, batch=512, epochs=100, warmup_epochs=10, anneal_iters=100_000,
                    subset_size=1_354_752)
        base.update(overrides)
        return cls(**base)

    @property
    def hyperparameter(self) -> float:
        return {"beta": self.beta, "annealed": self.capacity, "factor": self.gamma_tc}[self.method]

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainHistory:
    ce: list[float] = field(default_factory=list)
    kl: list[float] = field(default_factory=list)
    loss: list[float] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)
    reg_weight: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.loss)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "ce", "kl", "loss", "accuracy", "reg_weight"])
        for e in range(len(self)):
            w.writerow([e + 1] + [repr(float(getattr(self, k)[e])) for k in ("ce", "kl", "loss", "accuracy", "reg_weight")])
        return buf.getvalue()


def anneal(t: float, target: float, total: float) -> float:
    """Saturating exponential from 0 to ``target``; reaches 0.999 * target at ``total``."""
    if t < 0 or total <= 0:
        raise ValueError("need t >= 0 and total > 0")
    if t > total:
        return float(target)
    return float(target * (1.0 - math.exp(-ANNEAL_RATE * t / total)))


@dataclass
class Regularizer:
    """Effective loss-term settings at one training iteration."""
    method: str
    beta: float = 0.0
    tau: float = 0.0
    gamma: float = 0.0
    capacity: float = 0.0
    gamma_tc: float = 0.0

    @property
    def weight(self) -> float:
        return {"beta": self.beta, "annealed": self.capacity, "factor": self.gamma_tc}[self.method]


def regularizer_at(config: TrainConfig, iteration: int, warmup_iters: int) -> Regularizer:
    if config.method == "factor":
        return Regularizer("factor", capacity=config.capacity, gamma_tc=config.gamma_tc)
    if iteration < warmup_iters:
        return Regularizer(config.method, tau=config.tau)
    t = iteration - warmup_iters
    if config.method == "beta":
        return Regularizer("beta", beta=anneal(t, config.beta, config.anneal_iters), tau=config.tau)
    return Regularizer("annealed", gamma=config.gamma, capacity=anneal(t, config.capacity, config.anneal_iters))


def objective(params: Params, x: np.ndarray, targets: np.ndarray, noise: np.ndarray, reg: Regularizer,
              disc_params: Params | None = None) -> tuple[float, dict, Params]:
    """Loss, its components, and analytic gradients for one batch."""
    cache = forward(x, params, noise, targets.shape[1])
    ce, d_logits = cross_entropy(cache.logits, targets)
    kl = kl_divergence(cache.mu, cache.logvar)
    d_mu, d_lv = kl_grads(cache.mu, cache.logvar)
    d_z = None
    tc = 0.0
    if reg.method == "beta":
        loss = loss_beta(ce, kl, reg.beta, reg.tau)
        w = loss_beta_dkl(kl, reg.beta, reg.tau)
    elif reg.method == "annealed":
        loss = loss_annealed(ce, kl, reg.gamma, reg.capacity)
        w = loss_annealed_dkl(kl, reg.gamma, reg.capacity)
    else:
        if disc_params is None:
            raise ValueError("FactorVAE objective needs discriminator parameters")
        tc, d_tc = disc.tc_estimate(cache.z, disc_params)
        loss = loss_factor(ce, kl, reg.capacity, reg.gamma_tc, tc)
        w = loss_annealed_dkl(kl, 1.0, reg.capacity)
        d_z = reg.gamma_tc * d_tc
    grads = backward(params, cache, d_logits, w * d_mu, w * d_lv, d_z)
    parts = {"ce": ce, "kl": kl, "tc": tc, "loss": loss, "z": cache.z,
             "accuracy": reconstruction_accuracy(cache.logits, targets)}
    return loss, parts, grads


def _rngs(seed: int) -> dict[str, np.random.Generator]:
    names = ("subset", "init", "shuffle", "noise", "permute", "disc")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: np.random.default_rng(s) for n, s in zip(names, children)}


def sample_subset(size: int, seed: int, population: int) -> np.ndarray:
    """Seeded uniform draw of distinct dataset indices, returned sorted."""
    if not 0 < size <= population:
        raise ValueError(f"subset size {size} outside (0, {population}]")
    rng = _rngs(seed)["subset"]
    return np.sort(rng.choice(population, size=size, replace=False))


@dataclass
class TrainResult:
    params: Params
    codes: np.ndarray
    history: TrainHistory
    disc_params: Params | None = None


def _encode_all(params: Params, token_ids: np.ndarray, vocab_size: int, chunk: int = 2048):
    mus, accs = [], []
    from .model import decode
    for a in range(0, len(token_ids), chunk):
        ids = token_ids[a:a + chunk]
        mu, _ = encode(ids, params)
        mus.append(mu)
        accs.append(np.argmax(decode(mu, params, ids.shape[1]), axis=-1) == ids)
    return np.concatenate(mus), float(np.mean(np.concatenate(accs)))


def train(config: TrainConfig, token_ids: np.ndarray, vocab_size: int) -> TrainResult:
    """Train on ``token_ids`` (``(N, 16)`` integer array) and return params, posterior-mean codes and history.

    Batches are drawn from a fresh seeded permutation each epoch; an incomplete
    final batch is dropped. Accuracy is measured at the end of each epoch on the
    whole training set with ``z = mu``.
    """
    token_ids = np.asarray(token_ids)
    n = len(token_ids)
    if n < config.batch:
        raise ValueError(f"training set of {n} is smaller than the batch size {config.batch}")
    rng = _rngs(config.seed)
    params = init_params(vocab_size, config.hidden, config.latent_dim, rng["init"], token_ids.shape[1])
    check_params(params)
    opt = AdamState(config.lr, config.adam_beta1, config.adam_beta2, config.adam_eps)
    d_params = d_opt = None
    if config.method == "factor":
        d_params = disc.init_discriminator(config.latent_dim, config.disc_hidden, rng["disc"], config.disc_layers)
        d_opt = AdamState(config.disc_lr, config.disc_beta1, config.disc_beta2, config.adam_eps)
    per_epoch = n // config.batch
    warmup_iters = config.warmup_epochs * per_epoch
    history = TrainHistory()
    it = 0
    for epoch in range(config.epochs):
        order = rng["shuffle"].permutation(n)
        sums = np.zeros(3)
        reg = regularizer_at(config, it, warmup_iters)
        for b in range(per_epoch):
            ids = token_ids[order[b * config.batch:(b + 1) * config.batch]]
            x = ids
            noise = rng["noise"].standard_normal((len(ids), config.latent_dim))
            reg = regularizer_at(config, it, warmup_iters)
            loss, parts, grads = objective(params, x, ids, noise, reg, d_params)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch + 1}, iteration {it}: ce={parts['ce']}, kl={parts['kl']}, "
                    f"tc={parts['tc']}, regularizer={reg}"
                )
            adam_step(params, grads, opt)
            if d_params is not None:
                z = parts["z"]
                _, d_grads = disc.discriminator_loss(z, disc.permute_dims(z, rng["permute"]), d_params)
                adam_step(d_params, d_grads, d_opt)
            sums += (parts["ce"], parts["kl"], loss)
            it += 1
        codes, acc = _encode_all(params, token_ids, vocab_size)
        ce, kl, total = sums / max(per_epoch, 1)
        history.ce.append(float(ce))
        history.kl.append(float(kl))
        history.loss.append(float(total))
        history.accuracy.append(acc)
        history.reg_weight.append(float(reg.weight))
        log.info("epoch %d: ce=%.4f kl=%.4f loss=%.4f acc=%.4f reg=%.4g", epoch + 1, ce, kl, total, acc, reg.weight)
    codes, _ = _encode_all(params, token_ids, vocab_size)
    return TrainResult(params, codes, history, d_params)


def check_gradients(loss_fn, params: dict, grads: dict, rng: np.random.Generator, n_coords: int = 100,
                    step: float = 1e-4, floor: float = 1e-6) -> float:
    """Max relative error between ``grads`` and central differences of ``loss_fn()``.

    ``loss_fn`` reads ``params`` (which are perturbed in place, then restored).
    Relative error is ``|a - n| / max(|a|, |n|, floor)``.
    """
    names = sorted(params)
    sizes = np.array([params[k].size for k in names])
    picks = rng.choice(sizes.sum(), size=min(n_coords, int(sizes.sum())), replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    worst = 0.0
    for flat in picks:
        k = int(np.searchsorted(offsets, flat, side="right") - 1)
        name = names[k]
        view = params[name].reshape(-1)
        j = int(flat - offsets[k])
        orig = view[j]
        view[j] = orig + step
        plus = loss_fn()
        view[j] = orig - step
        minus = loss_fn()
        view[j] = orig
        numeric = (plus - minus) / (2 * step)
        analytic = grads[name].reshape(-1)[j]
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
        worst = max(worst, err)
    return float(worst)


def grad_check(params: Params, token_ids: np.ndarray, vocab_size: int, reg: Regularizer,
               disc_params: Params | None = None, seed: int = 0, n_coords: int = 100,
               step: float = 1e-4) -> float:
    """Compare analytic VAE gradients against central differences with the noise held fixed."""
    rng = np.random.default_rng(seed)
    x = one_hot_batch(token_ids, vocab_size)
    noise = rng.standard_normal((len(token_ids), params["mu_b"].shape[0]))
    _, _, grads = objective(params, x, token_ids, noise, reg, disc_params)

    def loss_fn():
        return objective(params, x, token_ids, noise, reg, disc_params)[0]

    return check_gradients(loss_fn, params, grads, rng, n_coords, step)
