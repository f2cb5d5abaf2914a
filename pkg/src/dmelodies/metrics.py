"""Disentanglement metrics: MIG, Modularity and SAP.

Codes are discretized per dimension into equal-width bins for the
mutual-information based scores. Factors are used at their native discrete
values. All information quantities are in nats.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels

DEFAULT_BINS = 20
DEFAULT_SPLIT = 0.2


def _as_codes(codes) -> np.ndarray:
    z = np.asarray(codes, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"codes must be 2-D, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("codes contain non-finite values")
    return z


def _check_aligned(codes: np.ndarray, factors: np.ndarray) -> None:
    if factors.ndim != 2 or len(factors) != len(codes):
        raise ValueError(f"codes {codes.shape} and factors {factors.shape} are not row-aligned")
    if len(codes) < 2:
        raise ValueError("need at least two samples")


def discretize(codes, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Equal-width binning of each column over its observed min-max range."""
    if bins < 2:
        raise ValueError("bins must be at least 2")
    z = _as_codes(codes)
    lo = z.min(axis=0)
    span = z.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.floor((z - lo) / safe * bins).astype(np.int64)
    np.clip(out, 0, bins - 1, out=out)
    out[:, span == 0] = 0
    return out


def _dense(col) -> tuple[np.ndarray, int]:
    values, inv = np.unique(np.asarray(col), return_inverse=True)
    return inv.ravel(), len(values)


def entropy(y) -> float:
    y = np.asarray(y).ravel()
    if len(y) < 1:
        raise ValueError("entropy of an empty column")
    _, counts = np.unique(y, return_counts=True)
    p = counts / counts.sum()
    return float(-np.sum(p * np.log(p)))


def mutual_info(x, y) -> float:
    """Plug-in mutual information of two discrete columns."""
    x = np.asarray(x).ravel()
    y = np.asarray(y).ravel()
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least two samples")
    xi, nx = _dense(x)
    yi, ny = _dense(y)
    joint = kernels.joint_counts(xi, yi, nx, ny).astype(np.float64)
    n = joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    mi = np.sum(joint[nz] * np.log(joint[nz] * n / (px @ py)[nz])) / n
    return float(max(mi, 0.0))


def mutual_info_matrix(discrete_codes: np.ndarray, factors: np.ndarray) -> np.ndarray:
    """``(D, K)`` matrix of I(code_i; factor_k)."""
    d = discrete_codes.shape[1]
    k = factors.shape[1]
    return np.array([[mutual_info(discrete_codes[:, i], factors[:, j]) for j in range(k)] for i in range(d)])


def _top_two_gap(scores: np.ndarray) -> np.ndarray:
    """Per column, difference between the largest and second largest entries."""
    s = np.sort(scores, axis=0)[::-1]
    return s[0] - s[1]


def mig(codes, factors, bins: int = DEFAULT_BINS) -> tuple[np.ndarray, float]:
    z = _as_codes(codes)
    v = np.asarray(factors)
    _check_aligned(z, v)
    if z.shape[1] < 2:
        raise ValueError("MIG needs at least two code dimensions")
    h = np.array([entropy(v[:, k]) for k in range(v.shape[1])])
    if np.any(h == 0):
        raise ValueError(f"factor columns {np.flatnonzero(h == 0).tolist()} have zero entropy")
    m = mutual_info_matrix(discretize(z, bins), v)
    per = np.clip(_top_two_gap(m) / h, 0.0, 1.0)
    return per, float(per.mean())


def modularity_from_mi(m: np.ndarray) -> np.ndarray:
    sq = np.square(m)
    peak = sq.max(axis=1)
    k = m.shape[1]
    with np.errstate(invalid="ignore", divide="ignore"):
        delta = (sq.sum(axis=1) - peak) / (peak * (k - 1))
    score = 1.0 - delta
    score[peak == 0] = 0.0
    return np.clip(score, 0.0, 1.0)


def modularity(codes, factors, bins: int = DEFAULT_BINS) -> tuple[np.ndarray, float]:
    z = _as_codes(codes)
    v = np.asarray(factors)
    _check_aligned(z, v)
    per = modularity_from_mi(mutual_info_matrix(discretize(z, bins), v))
    return per, float(per.mean())


def split_indices(n: int, split: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle, then the last ``split`` fraction is held out."""
    if not 0 < split < 1:
        raise ValueError("split must lie strictly between 0 and 1")
    perm = np.random.default_rng(seed).permutation(n)
    n_test = max(1, int(round(n * split)))
    if n_test >= n:
        raise ValueError("split leaves no training samples")
    return perm[:n - n_test], perm[n - n_test:]


def gaussian_classifier_accuracy(x_train, y_train, x_test, y_test) -> float:
    """Held-out accuracy of a 1-D Gaussian class-conditional classifier with equal priors."""
    classes = np.unique(np.concatenate([y_train, y_test]))
    train_classes = np.unique(y_train)
    missing = np.setdiff1d(classes, train_classes)
    if missing.size:
        raise ValueError(f"classes {missing.tolist()} absent from the training split")
    means = np.array([x_train[y_train == c].mean() for c in classes])
    var = np.array([x_train[y_train == c].var() for c in classes])
    floor = 1e-12 * max(float(np.var(x_train)), 1.0)
    var = np.maximum(var, floor)
    loglik = -0.5 * (np.log(var)[None, :] + (x_test[:, None] - means[None, :]) ** 2 / var[None, :])
    pred = classes[np.argmax(loglik, axis=1)]
    return float(np.mean(pred == y_test))


def sap_score_matrix(codes, factors, split: float = DEFAULT_SPLIT, seed: int = 0) -> np.ndarray:
    z = _as_codes(codes)
    v = np.asarray(factors)
    _check_aligned(z, v)
    train, test = split_indices(len(z), split, seed)
    s = np.empty((z.shape[1], v.shape[1]))
    for i in range(z.shape[1]):
        for k in range(v.shape[1]):
            s[i, k] = gaussian_classifier_accuracy(z[train, i], v[train, k], z[test, i], v[test, k])
    return s


def sap(codes, factors, split: float = DEFAULT_SPLIT, seed: int = 0) -> tuple[np.ndarray, float]:
    s = sap_score_matrix(codes, factors, split, seed)
    if s.shape[0] < 2:
        raise ValueError("SAP needs at least two code dimensions")
    per = np.clip(_top_two_gap(s), 0.0, 1.0)
    return per, float(per.mean())


@dataclass
class MetricReport:
    mig: float
    mig_per_factor: list[float]
    modularity: float
    modularity_per_dim: list[float]
    sap: float
    sap_per_factor: list[float]
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(codes, factors, bins: int = DEFAULT_BINS, split: float = DEFAULT_SPLIT, seed: int = 0) -> MetricReport:
    z = _as_codes(codes)
    v = np.asarray(factors)
    mig_per, mig_mean = mig(z, v, bins)
    mod_per, mod_mean = modularity(z, v, bins)
    sap_per, sap_mean = sap(z, v, split, seed)
    return MetricReport(
        mig_mean, mig_per.tolist(), mod_mean, mod_per.tolist(), sap_mean, sap_per.tolist(),
        {"bins": bins, "split": split, "seed": seed, "n": int(len(z)), "latent_dim": int(z.shape[1]),
         "num_factors": int(v.shape[1])},
    )
