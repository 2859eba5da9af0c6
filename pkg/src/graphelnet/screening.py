"""Exact connected-component screening for the L1-penalized problem.

Thresholding |S_ij| > lam*alpha partitions the variables; the penalized
estimate is block diagonal over that partition, so each component can be
solved independently (and in parallel) with no approximation.  The
screen is inactive when lam*alpha == 0.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import FitResult, ProblemSpec, validate
from .dpgelnet import dpgelnet_fit
from .gelnet import gelnet_fit
from .rope import rope_fit

__all__ = ["ComponentPartition", "threshold_graph", "connected_components",
           "solve_blockwise", "estimate"]


@dataclass(frozen=True)
class ComponentPartition:
    """labels[i] is the smallest member index of i's component; members
    lists each component's indices ascending, ordered by label."""

    labels: np.ndarray
    count: int
    members: tuple


def threshold_graph(S, lam, alpha) -> np.ndarray:
    """Adjacency of the screening graph: |S_ij| > lam*alpha, strict,
    diagonal excluded."""
    S = np.asarray(S, dtype=np.float64)
    adj = np.abs(S) > lam * alpha
    np.fill_diagonal(adj, False)
    return adj


def connected_components(adj) -> ComponentPartition:
    adj = np.asarray(adj, dtype=bool)
    p = adj.shape[0]
    labels = np.full(p, -1, dtype=np.int64)
    members = []
    for start in range(p):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = start
        comp = [start]
        while stack:
            v = stack.pop()
            for u in np.nonzero(adj[v])[0]:
                if labels[u] < 0:
                    labels[u] = start
                    comp.append(int(u))
                    stack.append(int(u))
        members.append(np.array(sorted(comp), dtype=np.int64))
    return ComponentPartition(labels=labels, count=len(members),
                              members=tuple(members))


_SOLVERS = {"gelnet": gelnet_fit, "dpgelnet": dpgelnet_fit, "rope": rope_fit}


def _subproblem(spec: ProblemSpec, idx: np.ndarray) -> ProblemSpec:
    pos = {int(g): k for k, g in enumerate(idx)}
    zero = frozenset((pos[i], pos[j]) for i, j in spec.zero_constraints
                     if i in pos and j in pos)
    return ProblemSpec(S=np.ascontiguousarray(spec.S[np.ix_(idx, idx)]),
                       lam=spec.lam, alpha=spec.alpha,
                       target=spec.target[idx].copy(),
                       penalize_diagonal=spec.penalize_diagonal,
                       zero_constraints=zero, config=spec.config)


def solve_blockwise(spec: ProblemSpec, solver="gelnet", threads=None) -> FitResult:
    """Screen, solve each component, and scatter into full matrices.

    Off-component entries of both theta and w are exactly zero.  conv is
    the conjunction over components; the first failing component's
    message is reported, prefixed with its label.
    """
    if solver not in _SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    fit_one = _SOLVERS[solver]
    if solver == "rope" or spec.lam * spec.alpha == 0:
        return fit_one(spec)
    part = connected_components(threshold_graph(spec.S, spec.lam, spec.alpha))
    if part.count == 1:
        return fit_one(spec)
    p = spec.p
    subs = [_subproblem(spec, idx) for idx in part.members]
    order = sorted(range(part.count), key=lambda k: -len(part.members[k]))
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(fit_one, (subs[k] for k in order)))
        fits = dict(zip(order, done))
    else:
        fits = {k: fit_one(subs[k]) for k in order}
    theta = np.zeros((p, p))
    W = np.zeros((p, p))
    niter, delta, conv, message = 0, 0.0, True, ""
    for k, idx in enumerate(part.members):
        fit = fits[k]
        theta[np.ix_(idx, idx)] = fit.theta
        W[np.ix_(idx, idx)] = fit.w
        niter = max(niter, fit.niter)
        delta = max(delta, fit.delta)
        if not fit.conv and conv:
            conv = False
            message = f"component {int(idx[0])}: {fit.message}"
    return FitResult(theta=theta, w=W, niter=niter, delta=delta, conv=conv,
                     message=message, n_components=part.count,
                     max_block_size=max(len(m) for m in part.members))


def estimate(S, lam, alpha, target=None, *, solver="auto",
             penalize_diagonal=True, zero=None, screen=True, config=None,
             threads=None) -> FitResult:
    """Validate inputs and run the requested solver, screening by default.

    solver "auto" picks the closed form when alpha == 0 admits one
    (penalized diagonal, no zero constraints) and the coordinate-descent
    path otherwise.
    """
    spec = validate(S, lam, alpha, target, penalize_diagonal=penalize_diagonal,
                    zero=zero, config=config)
    name = solver
    if name == "auto":
        if spec.alpha == 0 and spec.penalize_diagonal and not spec.zero_constraints:
            name = "rope"
        else:
            name = "gelnet"
    if not screen:
        if name not in _SOLVERS:
            raise ValueError(f"unknown solver {name!r}")
        return _SOLVERS[name](spec)
    return solve_blockwise(spec, solver=name, threads=threads)
