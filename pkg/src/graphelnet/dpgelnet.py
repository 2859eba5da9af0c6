"""Block coordinate descent on the precision matrix directly.

Each column update solves a box-constrained QP in the subgradient
vector; the updated matrix stays positive definite from any positive
definite warm start, which makes this the fallback when warm-started
runs of the working-covariance route fail to converge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import FitResult, ProblemSpec, convergence_scale
from .gelnet import _check_warm, _scalar_result
from .subsolvers import boxqp_weights

__all__ = ["DpgelnetState", "dpgelnet_fit", "schur_check"]


@dataclass
class DpgelnetState:
    """Working arrays of one fit; gamma row j warm-starts column j's QP."""

    theta: np.ndarray
    w: np.ndarray
    gamma: np.ndarray


def _fail(theta, w, niter, delta, msg, p):
    return FitResult(theta=theta, w=w, niter=niter, delta=delta, conv=False,
                     message=msg, n_components=1, max_block_size=p)


def dpgelnet_fit(spec: ProblemSpec, warm=None, on_update=None) -> FitResult:
    """Outer loop of the precision-route solver (zero target only).

    warm, when given, must be a positive definite (theta, w) pair; an
    indefinite warm theta is rejected before iterating.  on_update, when
    given, is called after every column update as
    on_update(theta, w, j, w22) with w22 the value used by the update,
    letting tests verify the positive-definiteness certificate.
    """
    if spec.has_target:
        raise ValueError("dpgelnet does not support target matrices")
    if spec.zero_constraints:
        raise ValueError("dpgelnet does not support zero constraints")
    p, cfg = spec.p, spec.config
    lam, alpha = spec.lam, spec.alpha
    if p == 1:
        return _scalar_result(spec)
    S = spec.S
    la = lam * alpha
    if warm is None:
        d0 = np.diag(S) + la if spec.penalize_diagonal else np.diag(S).copy()
        if np.any(d0 <= 0):
            bad = np.full((p, p), np.nan)
            return _fail(bad, bad.copy(), 0, math.inf,
                         "cannot initialize: nonpositive diagonal", p)
        theta = np.diag(1.0 / d0)
        if spec.penalize_diagonal:
            W = S + la * np.eye(p) + lam * (1.0 - alpha) * theta
        else:
            W = S.copy()
    else:
        theta, W = _check_warm(warm[0], warm[1], p)
        try:
            np.linalg.cholesky(theta)
        except np.linalg.LinAlgError:
            raise ValueError("warm start theta is not positive definite") from None
    state = DpgelnetState(theta, W, np.zeros((p, p - 1)))
    rest_idx = [np.concatenate((np.arange(j), np.arange(j + 1, p)))
                for j in range(p)]
    thr = cfg.outer_thr * convergence_scale(S)
    Wold = W.copy()
    delta = math.inf
    for it in range(1, cfg.outer_maxit + 1):
        for j in range(p):
            rest = rest_idx[j]
            th11 = np.ascontiguousarray(theta[np.ix_(rest, rest)])
            s12 = np.ascontiguousarray(S[rest, j])
            q12 = np.abs(theta[rest, j])
            weight, bound = boxqp_weights(alpha, lam, q12)
            gamma = state.gamma[j]
            np.clip(gamma, -bound, bound, out=gamma)
            _, status = _kernels.boxqp_cd(th11, s12, weight, bound, gamma,
                                          cfg.inner_thr, cfg.inner_maxit)
            if status != 0:
                return _fail(theta, W, it, delta,
                             "nonpositive diagonal in Theta11", p)
            w22 = W[j, j]
            if w22 <= 0:
                return _fail(theta, W, it, delta, "nonpositive w22", p)
            u = s12 + weight * gamma
            th12 = -(th11 @ u) / w22
            th22 = (1.0 - u @ th12) / w22
            if th22 <= 0:
                return _fail(theta, W, it, delta, "nonpositive theta22", p)
            theta[rest, j] = th12
            theta[j, rest] = th12
            theta[j, j] = th22
            if alpha > 0:
                w12 = s12 + gamma + lam * (1.0 - alpha) * th12
            else:
                w12 = s12 + lam * th12
            W[rest, j] = w12
            W[j, rest] = w12
            if spec.penalize_diagonal:
                W[j, j] = S[j, j] + la + lam * (1.0 - alpha) * th22
            else:
                W[j, j] = S[j, j]
            if on_update is not None:
                on_update(theta, W, j, w22)
        delta = float(np.abs(W - Wold).mean())
        Wold[:, :] = W
        if delta <= thr:
            return FitResult(theta, W, it, delta, True, "", 1, p)
    return _fail(theta, W, cfg.outer_maxit, delta,
                 "outer iteration budget exhausted", p)


def schur_check(theta, j) -> float:
    """theta22 - theta12' Theta11^{-1} theta12 for column j.

    Equals 1/w22 (the working-covariance entry used by the update)
    analytically; positivity certifies that the updated matrix stays
    positive definite.  Dense solve, intended for diagnostics only.
    """
    theta = np.asarray(theta, dtype=np.float64)
    p = theta.shape[0]
    rest = np.concatenate((np.arange(j), np.arange(j + 1, p)))
    th11 = theta[np.ix_(rest, rest)]
    th12 = theta[rest, j]
    return float(theta[j, j] - th12 @ np.linalg.solve(th11, th12))
