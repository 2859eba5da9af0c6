"""Simulation models, Gaussian sampling, and performance measures.

Six precision/covariance generators (compound symmetry, scale-free,
hub, block, band, random graph), all rescaled so the covariance is a
correlation matrix, plus the loss and graph-recovery measures used to
compare estimates against the truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ModelSpec", "GroundTruth", "ConfusionCounts", "gen_model",
           "sample_gaussian", "kl_loss", "l2_loss", "sp_loss",
           "graph_confusion", "f1", "mcc"]


@dataclass(frozen=True)
class ModelSpec:
    model_id: int
    p: int
    seed: int = 0

    def __post_init__(self):
        if self.model_id not in range(1, 7):
            raise ValueError("model_id must be 1..6")
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if self.model_id in (2, 3, 4) and self.p % 2:
            raise ValueError("models 2-4 need even p")
        if self.model_id in (3, 4) and self.p % 10:
            raise ValueError("models 3-4 need p divisible by 10")


@dataclass(frozen=True)
class GroundTruth:
    """Correlation-scaled covariance and its exact inverse."""

    sigma: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def _halves_d(p, hi):
    d = np.ones(p)
    d[p // 2:] = hi
    return d


def _shifted(A, shift_plus):
    vals = np.linalg.eigvalsh(A)
    return A + (abs(vals[0]) + shift_plus) * np.eye(A.shape[0])


def _scale_free_adjacency(p, rng):
    # One edge per new node, endpoint drawn proportional to degree.
    A = np.zeros((p, p))
    A[0, 1] = A[1, 0] = 0.3
    deg = np.zeros(p)
    deg[:2] = 1
    for new in range(2, p):
        tgt = rng.choice(new, p=deg[:new] / deg[:new].sum())
        A[new, tgt] = A[tgt, new] = 0.3
        deg[tgt] += 1
        deg[new] = 1
    return A


def _hub_adjacency(p):
    A = np.zeros((p, p))
    for start in range(0, p, 10):
        A[start, start + 1:start + 10] = 0.3
        A[start + 1:start + 10, start] = 0.3
    return A


def _to_correlation(sigma, theta):
    s = np.sqrt(np.diag(sigma))
    sigma_c = sigma / np.outer(s, s)
    np.fill_diagonal(sigma_c, 1.0)
    sigma_c = (sigma_c + sigma_c.T) / 2.0
    theta_c = theta * np.outer(s, s)
    theta_c = (theta_c + theta_c.T) / 2.0
    return sigma_c, theta_c


def gen_model(spec: ModelSpec) -> GroundTruth:
    """Deterministic ground truth for one simulation model and seed."""
    p, rng = spec.p, np.random.default_rng(spec.seed)
    if spec.model_id == 1:
        sigma = np.full((p, p), 0.36)
        np.fill_diagonal(sigma, 1.0)
        return GroundTruth(sigma, np.linalg.inv(sigma))
    if spec.model_id == 2:
        A = _scale_free_adjacency(p, rng)
        d = _halves_d(p, 3.0)
        theta = _shifted(A, 0.2) * np.outer(d, d)
    elif spec.model_id == 3:
        d = _halves_d(p, 3.0)
        theta = _shifted(_hub_adjacency(p), 0.2) * np.outer(d, d)
    elif spec.model_id == 4:
        b = p // 10
        blk = np.full((b, b), 0.5)
        np.fill_diagonal(blk, 1.0)
        tilde = np.kron(np.eye(10), blk)
        perm = rng.permutation(p)
        tilde = tilde[np.ix_(perm, perm)]
        d = _halves_d(p, 1.5)
        theta = tilde * np.outer(d, d)
    elif spec.model_id == 5:
        tilde = np.eye(p)
        for k, v in ((1, 0.6), (2, 0.3)):
            tilde += v * (np.eye(p, k=k) + np.eye(p, k=-k))
        d = rng.uniform(1.0, 5.0, p)
        theta = tilde * np.outer(d, d)
    else:
        m = p * (p - 1) // 2
        edge = rng.random(m) < 0.05
        u = rng.uniform(0.4, 0.8, m)
        tilde = np.zeros((p, p))
        tilde[np.triu_indices(p, 1)] = np.where(edge, u, 0.0)
        tilde = tilde + tilde.T
        tilde = _shifted(tilde, 0.05)
        d = rng.uniform(1.0, 5.0, p)
        theta = tilde * np.outer(d, d)
    sigma = np.linalg.inv(theta)
    return GroundTruth(*_to_correlation(sigma, theta))


def sample_gaussian(sigma, n, seed) -> np.ndarray:
    """n i.i.d. rows from N(0, sigma); raises if sigma is not PD."""
    sigma = np.asarray(sigma, dtype=np.float64)
    L = np.linalg.cholesky(sigma)
    z = np.random.default_rng(seed).standard_normal((int(n), sigma.shape[0]))
    return z @ L.T


def kl_loss(sigma, theta_hat) -> float:
    """tr(Sigma ThetaHat) - logdet(Sigma ThetaHat) - p, clamped at 0."""
    sigma = np.asarray(sigma, dtype=np.float64)
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    p = sigma.shape[0]
    M = sigma @ theta_hat
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0:
        raise ValueError("nonpositive determinant")
    return max(float(np.trace(M) - logdet - p), 0.0)


def l2_loss(theta, theta_hat) -> float:
    return float(np.linalg.norm(np.asarray(theta) - np.asarray(theta_hat), "fro"))


def sp_loss(theta, theta_hat) -> float:
    return float(np.linalg.norm(np.asarray(theta) - np.asarray(theta_hat), 2))


def graph_confusion(theta_hat, theta, eps=1e-5, absolute=False) -> ConfusionCounts:
    """Edge counts over i < j; an edge is an entry >= eps (signed, as
    defined; absolute=True thresholds |entry| instead)."""
    iu = np.triu_indices(np.asarray(theta).shape[0], 1)
    a = np.asarray(theta_hat)[iu]
    t = np.asarray(theta)[iu]
    if absolute:
        a, t = np.abs(a), np.abs(t)
    ahat, atru = a >= eps, t >= eps
    return ConfusionCounts(tp=int(np.sum(ahat & atru)),
                           tn=int(np.sum(~ahat & ~atru)),
                           fp=int(np.sum(ahat & ~atru)),
                           fn=int(np.sum(~ahat & atru)))


def _degenerate(c: ConfusionCounts) -> float:
    return 1.0 if c.fp == 0 and c.fn == 0 else 0.0


def f1(c: ConfusionCounts) -> float:
    denom = 2 * c.tp + c.fn + c.fp
    if denom == 0:
        return _degenerate(c)
    return 2.0 * c.tp / denom


def mcc(c: ConfusionCounts) -> float:
    factors = [c.tp + c.fp, c.tp + c.fn, c.tn + c.fp, c.tn + c.fn]
    if 0 in factors:
        return _degenerate(c)
    num = c.tp * c.tn - c.fp * c.fn
    return num / math.sqrt(math.prod(factors))
