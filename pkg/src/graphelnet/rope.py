"""Closed-form ridge-penalized precision estimate.

With a pure quadratic penalty the stationarity condition decouples in
the eigenbasis of S - lam*T, so the estimate is one eigendecomposition
plus a scalar spectral map.  No iteration, no tuning beyond lam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FitResult, ProblemSpec
from .subsolvers import NumericalError

__all__ = ["EigenDecomp", "eigen_decomp", "rope_solve", "rope_fit"]


@dataclass(frozen=True)
class EigenDecomp:
    values: np.ndarray
    vectors: np.ndarray


def eigen_decomp(M) -> EigenDecomp:
    """Symmetric eigendecomposition, ascending eigenvalues."""
    M = np.asarray(M, dtype=np.float64)
    vals, vecs = np.linalg.eigh(M)
    return EigenDecomp(values=vals, vectors=vecs)


def _spectral_map(d, lam):
    # Two algebraically equal forms of (-d + sqrt(d^2 + 4 lam)) / (2 lam),
    # each evaluated on the half-line where it does not cancel.
    root = np.sqrt(d * d + 4.0 * lam)
    out = np.empty_like(d)
    pos = d >= 0
    out[pos] = 2.0 / (d[pos] + root[pos])
    out[~pos] = (root[~pos] - d[~pos]) / (2.0 * lam)
    return out


def _target_matrix(target, p):
    if target is None:
        return np.zeros((p, p))
    entries = getattr(target, "entries", target)
    T = np.asarray(entries, dtype=np.float64)
    if T.ndim <= 1:
        T = np.diag(np.broadcast_to(T.ravel(), (p,)).copy())
    if T.shape != (p, p):
        raise ValueError("target shape does not match S")
    return T


def rope_solve(S, lam, target=None) -> np.ndarray:
    """Minimize -logdet(Theta) + tr(S Theta) + lam/2 ||Theta - T||_F^2.

    target may be None, a diagonal (vector or DiagonalTarget), or a full
    symmetric matrix.  lam == 0 returns S^{-1} and requires S to be
    invertible.
    """
    S = np.asarray(S, dtype=np.float64)
    p = S.shape[0]
    if lam < 0:
        raise ValueError("negative lambda")
    T = _target_matrix(target, p)
    if lam == 0:
        dec = eigen_decomp(S)
        if dec.values[0] <= 1e-12 * max(1.0, abs(dec.values[-1])):
            raise NumericalError("unpenalized problem requires invertible S")
        return (dec.vectors / dec.values) @ dec.vectors.T
    dec = eigen_decomp(S - lam * T)
    f = _spectral_map(dec.values, lam)
    return (dec.vectors * f) @ dec.vectors.T


def rope_fit(spec: ProblemSpec) -> FitResult:
    """FitResult wrapper around the closed form; alpha must be 0."""
    if spec.alpha != 0:
        raise ValueError("rope requires alpha = 0")
    if not spec.penalize_diagonal:
        raise ValueError("rope requires a penalized diagonal")
    if spec.zero_constraints:
        raise ValueError("rope does not support zero constraints")
    p = spec.p
    tvec = spec.target if spec.has_target else None
    theta = rope_solve(spec.S, spec.lam, tvec)
    T = _target_matrix(tvec, p)
    W = spec.S + spec.lam * (theta - T)
    return FitResult(theta=theta, w=W, niter=1, delta=0.0, conv=True,
                     message="", n_components=1, max_block_size=p)
