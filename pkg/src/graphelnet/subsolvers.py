"""Inner solvers shared by the outer block coordinate-descent loops.

Two subproblems appear per column update: an elastic-net regression in
beta (the working-covariance route) and a box-constrained quadratic
program in the subgradient vector gamma (the precision route).  Both are
solved by cyclic coordinate descent in fixed ascending index order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import SolverConfig

__all__ = [
    "NumericalError",
    "EnetSubproblem",
    "BoxQpSubproblem",
    "soft_threshold",
    "enet_cd_solve",
    "boxqp_cd_solve",
    "boxqp_weights",
]


class NumericalError(RuntimeError):
    """A coordinate update hit a nonpositive denominator."""


def soft_threshold(x, lam):
    """sign(x) * max(|x| - lam, 0), the scalar L1 proximal map."""
    if lam < 0:
        raise ValueError("negative threshold")
    return float(_kernels.soft_threshold(float(x), float(lam)))


@dataclass
class EnetSubproblem:
    """min 0.5 b'Qb - b'beta + lambda1 ||beta||_1 + 0.5 lambda2 ||beta||_2^2.

    Q plays W11 and b plays s12 of the column update; active_mask is
    False where a zero constraint pins the coordinate to 0.
    """

    Q: np.ndarray
    b: np.ndarray
    lambda1: float
    lambda2: float
    active_mask: np.ndarray | None = None


@dataclass
class BoxQpSubproblem:
    """min 0.5 (s12 + weight*gamma)' Theta11 (s12 + weight*gamma) over
    ||gamma||_inf <= bound.

    weight and bound come from boxqp_weights; q12 records the frozen
    abs(theta12) the weights were built from.
    """

    Theta11: np.ndarray
    s12: np.ndarray
    weight: np.ndarray
    bound: float
    q12: np.ndarray | None = None


def boxqp_weights(alpha, lam, q12):
    """Weight vector and box bound for the QP.

    alpha in (0, 1]: weight = 1 + ((1-alpha)/alpha) * q12, bound = lam*alpha
    (all-ones weight at alpha = 1).  alpha = 0: weight = lam * q12, bound = 1.
    """
    q12 = np.asarray(q12, dtype=np.float64)
    if alpha > 0:
        return 1.0 + ((1.0 - alpha) / alpha) * q12, lam * alpha
    return lam * q12, 1.0


def enet_cd_solve(sub: EnetSubproblem, beta_warm=None, cfg: SolverConfig | None = None):
    """Solve the elastic-net subproblem by coordinate descent.

    Cycles until the largest coordinate change drops below
    inner_thr * max(1, max|b|) or inner_maxit sweeps.  Raises
    NumericalError when a diagonal denominator Q_kk + lambda2 is
    nonpositive for an active coordinate.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    Q = np.asarray(sub.Q, dtype=np.float64)
    b = np.asarray(sub.b, dtype=np.float64).ravel()
    m = b.shape[0]
    if Q.shape != (m, m):
        raise ValueError("Q and b dimensions disagree")
    if sub.lambda1 < 0 or sub.lambda2 < 0:
        raise ValueError("penalties must be non-negative")
    if sub.active_mask is None:
        active = np.ones(m, dtype=np.uint8)
    else:
        active = np.asarray(sub.active_mask, dtype=np.uint8).ravel()
    beta = np.zeros(m) if beta_warm is None else np.array(beta_warm, dtype=np.float64).ravel()
    beta[active == 0] = 0.0
    _, status = _kernels.enet_cd(Q, b, float(sub.lambda1), float(sub.lambda2),
                                 beta, active, cfg.inner_thr, cfg.inner_maxit)
    if status != 0:
        raise NumericalError("nonpositive denominator Q_kk + lambda2 in coordinate update")
    return beta


def boxqp_cd_solve(sub: BoxQpSubproblem, gamma_warm=None, cfg: SolverConfig | None = None):
    """Solve the box-constrained QP by clipped coordinate descent.

    Each coordinate is moved to its unconstrained stationary value and
    projected onto [-bound, bound]; zero-weight coordinates keep their
    warm value.  Raises NumericalError on a nonpositive Theta11 diagonal.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    T11 = np.asarray(sub.Theta11, dtype=np.float64)
    s12 = np.asarray(sub.s12, dtype=np.float64).ravel()
    weight = np.asarray(sub.weight, dtype=np.float64).ravel()
    bound = float(sub.bound)
    if bound < 0:
        raise ValueError("negative box bound")
    m = s12.shape[0]
    if T11.shape != (m, m) or weight.shape[0] != m:
        raise ValueError("subproblem dimensions disagree")
    gamma = np.zeros(m) if gamma_warm is None else np.array(gamma_warm, dtype=np.float64).ravel()
    np.clip(gamma, -bound, bound, out=gamma)
    _, status = _kernels.boxqp_cd(T11, s12, weight, bound, gamma,
                                  cfg.inner_thr, cfg.inner_maxit)
    if status != 0:
        raise NumericalError("nonpositive diagonal in Theta11")
    return gamma
