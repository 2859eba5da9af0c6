"""Constructors for diagonal shrinkage targets.

All constructors return a DiagonalTarget whose entries are non-negative;
solvers accept either the object or a bare length-p vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import SolverConfig, fold_indices, read_matrix
from .subsolvers import EnetSubproblem, enet_cd_solve

__all__ = ["TargetKind", "DiagonalTarget", "target_identity",
           "target_v_identity", "target_eigenvalue",
           "target_max_single_correlation", "target_nodewise",
           "target_true_diagonal", "make_target"]


class TargetKind(Enum):
    TRUE_DIAGONAL = "true-diag"
    IDENTITY = "identity"
    V_IDENTITY = "v-identity"
    EIGENVALUE = "eigenvalue"
    MAX_SINGLE_CORRELATION = "msc"
    NODEWISE_REGRESSION = "nodewise"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DiagonalTarget:
    entries: np.ndarray
    kind: TargetKind = TargetKind.CUSTOM

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64).ravel()
        if e.size < 1 or np.any(e < 0) or not np.all(np.isfinite(e)):
            raise ValueError("target entries must be finite and non-negative")
        object.__setattr__(self, "entries", e)

    def __len__(self):
        return self.entries.size

    def matrix(self) -> np.ndarray:
        return np.diag(self.entries)


def target_identity(p) -> DiagonalTarget:
    p = int(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    return DiagonalTarget(np.ones(p), TargetKind.IDENTITY)


def target_v_identity(S) -> DiagonalTarget:
    """Scaled identity: every entry is 1 / mean(diag(S))."""
    d = np.diag(np.asarray(S, dtype=np.float64))
    m = d.mean()
    if m <= 0:
        raise ValueError("mean of the diagonal must be positive")
    return DiagonalTarget(np.full(d.size, 1.0 / m), TargetKind.V_IDENTITY)


def target_eigenvalue(S, threshold=None) -> DiagonalTarget:
    """Scaled identity from the spectrum: eigenvalues below `threshold`
    are dropped and the entry is the mean of the reciprocals of the
    rest.  threshold defaults to 1e-4 times the largest eigenvalue."""
    S = np.asarray(S, dtype=np.float64)
    vals = np.linalg.eigvalsh(S)
    if threshold is None:
        threshold = 1e-4 * vals[-1]
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    keep = vals[vals >= threshold]
    if keep.size == 0 or keep[0] <= 0:
        raise ValueError("no eigenvalue at or above the threshold")
    v = float(np.mean(1.0 / keep))
    return DiagonalTarget(np.full(S.shape[0], v), TargetKind.EIGENVALUE)


def target_max_single_correlation(S) -> DiagonalTarget:
    """T_jj = 1 / ((1 - |rho_jk|) S_jj) with k the partner of highest
    absolute correlation (ties: smallest k)."""
    S = np.asarray(S, dtype=np.float64)
    p = S.shape[0]
    if p < 2:
        raise ValueError("need at least two variables")
    d = np.diag(S)
    if np.any(d <= 0):
        raise ValueError("diagonal must be positive")
    rho = np.abs(S) / np.sqrt(np.outer(d, d))
    np.fill_diagonal(rho, -1.0)
    best = rho.max(axis=1)            # only the value enters, ties moot
    if np.any(best >= 1.0 - 1e-15):
        raise ValueError("perfectly correlated pair")
    return DiagonalTarget(1.0 / ((1.0 - best) * d),
                          TargetKind.MAX_SINGLE_CORRELATION)


def _nodewise_grid(z, y, n):
    lmax = np.abs(z.T @ y).max() / n
    return lmax * 0.9 ** np.arange(41)


def target_nodewise(data, folds=10, lambda_grid=None, seed=0) -> DiagonalTarget:
    """T_jj = 1 / (minimal cross-validated lasso prediction error of
    column j regressed on the others).

    Error variance is the mean of squared held-out residuals pooled over
    the folds.  The per-variable grid defaults to lmax * 0.9^{0..40}
    with lmax the smallest lambda at which the lasso is all-zero.
    """
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("data must be n x p with p >= 2")
    n, p = X.shape
    if not 2 <= folds <= n:
        raise ValueError("need 2 <= folds <= n")
    X = X - X.mean(axis=0)
    norms = np.sqrt((X ** 2).sum(axis=0))
    if np.any(norms == 0):
        raise ValueError("degenerate column (zero variance)")
    # a perfectly collinear pair drives the error variance to a grid
    # artifact instead of zero, so catch it before regressing
    G = (X / norms).T @ (X / norms)
    np.fill_diagonal(G, 0.0)
    if np.abs(G).max() >= 1.0 - 1e-12:
        raise ValueError("degenerate column (duplicate of another)")
    test_sets = fold_indices(n, folds, seed)
    masks = []
    for te in test_sets:
        m = np.zeros(n, dtype=bool)
        m[te] = True
        masks.append(m)
    cfg = SolverConfig(inner_thr=1e-9, inner_maxit=10000)
    out = np.empty(p)
    for j in range(p):
        y = X[:, j]
        z = np.delete(X, j, axis=1)
        grid = _nodewise_grid(z, y, n) if lambda_grid is None else \
            np.sort(np.asarray(lambda_grid, dtype=np.float64))[::-1]
        sse = np.zeros(grid.size)
        for m in masks:
            ztr, ytr = z[~m], y[~m]
            ntr = ztr.shape[0]
            Q = ztr.T @ ztr / ntr
            b = ztr.T @ ytr / ntr
            beta = None
            for g, lam in enumerate(grid):
                beta = enet_cd_solve(EnetSubproblem(Q, b, lam, 0.0),
                                     beta_warm=beta, cfg=cfg)
                res = y[m] - z[m] @ beta
                sse[g] += res @ res
        err = sse.min() / n
        if err <= 1e-10 * y.var():
            raise ValueError("degenerate column (zero variance)")
        out[j] = 1.0 / err
    return DiagonalTarget(out, TargetKind.NODEWISE_REGRESSION)


def target_true_diagonal(theta_true) -> DiagonalTarget:
    d = np.diag(np.asarray(theta_true, dtype=np.float64)).copy()
    if np.any(d < 0):
        raise ValueError("negative diagonal")
    return DiagonalTarget(d, TargetKind.TRUE_DIAGONAL)


def make_target(name, *, S=None, data=None, theta_true=None, p=None, seed=0):
    """Build a target from its CLI name, or None when name is falsy.

    Recognized names: identity, v-identity, eigenvalue, msc, nodewise,
    true-diag, file:<path> (CSV of p diagonal entries).
    """
    if not name or name == "none":
        return None
    if name.startswith("file:"):
        vec = read_matrix(name[5:]).ravel()
        return DiagonalTarget(vec, TargetKind.CUSTOM)
    if name == "identity":
        if p is None:
            p = len(np.diag(S)) if S is not None else np.asarray(data).shape[1]
        return target_identity(p)
    if name == "v-identity":
        return target_v_identity(S)
    if name == "eigenvalue":
        return target_eigenvalue(S)
    if name == "msc":
        return target_max_single_correlation(S)
    if name == "nodewise":
        if data is None:
            raise ValueError("nodewise target needs raw data")
        return target_nodewise(data, seed=seed)
    if name == "true-diag":
        if theta_true is None:
            raise ValueError("true-diag target needs the true precision matrix")
        return target_true_diagonal(theta_true)
    raise ValueError(f"unknown target {name!r}")
