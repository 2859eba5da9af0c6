"""Block coordinate descent maintaining the precision matrix and the
working covariance simultaneously.

gelnet_fit solves the zero-target problem; gelnet_fit_target adds the
three-case diagonal logic needed for nonzero diagonal targets.  Both
report numerical breakdowns through conv=False and a message instead of
raising, so callers can fall back to another solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import _kernels
from .core import FitResult, ProblemSpec, convergence_scale
from .subsolvers import NumericalError

__all__ = [
    "DiagCase",
    "GelnetState",
    "gelnet_fit",
    "gelnet_fit_target",
    "target_case_select",
    "solve_diag_quadratic",
    "scalar_fit",
]

_STATUS_MSG = {
    0: "",
    1: "outer iteration budget exhausted",
    2: "nonpositive inner denominator; input may be indefinite",
    3: "nonpositive 1/theta22 denominator; input may be indefinite "
       "or the warm start divergent (consider dpgelnet)",
    4: "diagonal target update failed; target too large",
}


class DiagCase(Enum):
    """Position of a diagonal entry relative to its target."""

    ABOVE = 1
    AT = 2
    BELOW = 3


@dataclass
class GelnetState:
    """Working arrays of one fit: row j of beta is the warm start for
    column j's inner solve (entry j fixed at 0)."""

    theta: np.ndarray
    w: np.ndarray
    beta: np.ndarray


def target_case_select(F_t, lam_alpha) -> DiagCase:
    """Pick the diagonal case from the test statistic F_t."""
    if lam_alpha < 0:
        raise ValueError("negative lambda*alpha")
    if F_t > lam_alpha:
        return DiagCase.ABOVE
    if F_t < -lam_alpha:
        return DiagCase.BELOW
    return DiagCase.AT


def solve_diag_quadratic(case, s22, lam, alpha, t22, dot):
    """Solve the diagonal normal equation for the given case.

    dot is the inner product w12'beta of the freshly updated column.
    Returns (theta22, w22).  The AT case with t22 = 0 is treated as
    ABOVE (the test statistic diverges there and the zero-target
    problem always sits above).
    """
    la = lam * alpha
    a = lam * (1.0 - alpha)
    if case is DiagCase.AT:
        if t22 <= 0.0:
            return solve_diag_quadratic(DiagCase.ABOVE, s22, lam, alpha, t22, dot)
        return float(t22), 1.0 / t22 + dot
    sgn = 1.0 if case is DiagCase.ABOVE else -1.0
    bq = s22 + sgn * la - a * t22 - dot
    if a > 0.0:
        th = (-bq + math.sqrt(bq * bq + 4.0 * a)) / (2.0 * a)
    else:
        if bq <= 0.0:
            raise NumericalError("no positive root for the diagonal update")
        th = 1.0 / bq
    if not (th > 0.0 and math.isfinite(th)):
        raise NumericalError("no positive root for the diagonal update")
    return float(th), s22 + sgn * la + a * (th - t22)


def scalar_fit(s, lam, alpha, t=0.0, penalize_diagonal=True):
    """Closed form for the one-variable problem.

    Tries the above-target root, then the below-target root, and falls
    back to theta = t; exactly one case is consistent for the convex
    scalar objective.  Returns (theta, w, message); message is non-empty
    when no positive solution exists (nonpositive s without penalty, or
    alpha = 1 with s + lambda <= 0).
    """
    s, lam, alpha, t = float(s), float(lam), float(alpha), float(t)
    if lam == 0.0 or not penalize_diagonal:
        if s <= 0.0:
            return math.nan, math.nan, "nonpositive variance; no unpenalized solution"
        return 1.0 / s, s, ""
    try:
        th, w = solve_diag_quadratic(DiagCase.ABOVE, s, lam, alpha, t, 0.0)
        if th > t:
            return th, w, ""
    except NumericalError:
        pass
    if t > 0.0:
        try:
            th, w = solve_diag_quadratic(DiagCase.BELOW, s, lam, alpha, t, 0.0)
            if th < t:
                return th, w, ""
        except NumericalError:
            pass
        return t, 1.0 / t, ""
    return math.nan, math.nan, "no positive root for the diagonal update"


def _result(theta, w, niter, delta, status, p):
    return FitResult(theta=theta, w=w, niter=int(niter), delta=float(delta),
                     conv=(status == 0), message=_STATUS_MSG[int(status)],
                     n_components=1, max_block_size=p)


def _scalar_result(spec: ProblemSpec) -> FitResult:
    t = spec.target[0] if spec.has_target else 0.0
    th, w, msg = scalar_fit(spec.S[0, 0], spec.lam, spec.alpha, t,
                            spec.penalize_diagonal)
    ok = msg == ""
    theta = np.array([[th]]) if ok else np.full((1, 1), np.nan)
    wmat = np.array([[w]]) if ok else np.full((1, 1), np.nan)
    return FitResult(theta=theta, w=wmat, niter=1, delta=0.0, conv=ok,
                     message=msg, n_components=1, max_block_size=1)


def _active_matrix(spec: ProblemSpec) -> np.ndarray:
    active = np.ones((spec.p, spec.p), dtype=np.uint8)
    for i, j in spec.zero_constraints:
        active[i, j] = 0
    return active


def _beta_from_theta(theta: np.ndarray) -> np.ndarray:
    """Per-column warm starts implied by a warm theta: row j = -theta12/theta22."""
    d = np.diag(theta)
    beta = -(theta / d[:, None]).T.copy()
    np.fill_diagonal(beta, 0.0)
    return np.ascontiguousarray(beta)


def _check_warm(theta, w, p):
    theta = np.array(theta, dtype=np.float64)
    w = np.array(w, dtype=np.float64)
    if theta.shape != (p, p) or w.shape != (p, p):
        raise ValueError("warm start dimensions do not match S")
    for name, M in (("theta", theta), ("w", w)):
        if np.abs(M - M.T).max() > 1e-8 * max(1.0, np.abs(M).max()):
            raise ValueError(f"warm {name} must be symmetric")
        if np.any(np.diag(M) <= 0):
            raise ValueError(f"warm {name} needs a positive diagonal")
    return (theta + theta.T) / 2.0, (w + w.T) / 2.0


def gelnet_fit(spec: ProblemSpec, warm=None) -> FitResult:
    """Outer block coordinate descent for the zero-target problem.

    A nonzero diagonal target (with penalized diagonal) routes to
    gelnet_fit_target; with penalize_diagonal=False a target has no
    effect and is ignored.  Numerical failures surface as conv=False
    with a message, never as exceptions.
    """
    if spec.has_target and spec.penalize_diagonal:
        return gelnet_fit_target(spec, warm=warm)
    p, cfg = spec.p, spec.config
    lam, alpha = spec.lam, spec.alpha
    if p == 1:
        return _scalar_result(spec)
    S = spec.S
    la = lam * alpha
    if warm is None:
        d0 = np.diag(S) + (la if spec.penalize_diagonal else 0.0)
        if np.any(d0 <= 0):
            bad = np.full((p, p), np.nan)
            return FitResult(bad, bad.copy(), 0, math.inf, False,
                             "cannot initialize: nonpositive diagonal",
                             1, p)
        theta = np.diag(1.0 / d0)
        if spec.penalize_diagonal:
            W = S + la * np.eye(p) + lam * (1.0 - alpha) * theta
        else:
            W = S.copy()
    else:
        theta, W = _check_warm(warm[0], warm[1], p)
    active = _active_matrix(spec)
    state = GelnetState(theta, W, _beta_from_theta(theta))
    state.beta[active.T == 0] = 0.0
    niter, delta, status = _kernels.gelnet_run(
        S, state.w, state.theta, state.beta, lam, alpha,
        spec.penalize_diagonal, active,
        cfg.outer_thr * convergence_scale(S), cfg.inner_thr,
        cfg.outer_maxit, cfg.inner_maxit)
    return _result(state.theta, state.w, niter, delta, status, p)


def gelnet_fit_target(spec: ProblemSpec, warm=None) -> FitResult:
    """Outer loop with a nonzero diagonal target and penalized diagonal.

    Initialization puts each diagonal entry into its small-target or
    large-target regime; during sweeps the case is re-selected per
    update from the test statistic.  Requires alpha > 0 (at alpha = 0
    the targeted problem has a closed form; use rope_solve).
    """
    if spec.alpha == 0.0:
        raise ValueError("alpha = 0 with a target has a closed form; use rope_solve")
    if not spec.penalize_diagonal:
        # an unpenalized diagonal makes the diagonal target inert
        return gelnet_fit(replace(spec, target=np.zeros(spec.p)), warm=warm)
    p, cfg = spec.p, spec.config
    lam, alpha = spec.lam, spec.alpha
    if p == 1:
        return _scalar_result(spec)
    S, tvec = spec.S, spec.target
    la = lam * alpha
    a = lam * (1.0 - alpha)
    if warm is None:
        diag = np.diag(S)
        if np.any(diag + la <= 0):
            bad = np.full((p, p), np.nan)
            return FitResult(bad, bad.copy(), 0, math.inf, False,
                             "cannot initialize: nonpositive diagonal",
                             1, p)
        small = tvec < 1.0 / (diag + la)
        with np.errstate(over="ignore", invalid="ignore"):
            # both where-branches evaluate; the root arm may overflow
            # harmlessly on entries that take the target arm
            theta_d = np.where(small,
                               _case1_root(diag, lam, alpha, tvec),
                               tvec)
        gamma_d = np.where(small, 1.0, 0.0)
        theta = np.diag(theta_d)
        W = S + np.diag(la * gamma_d + a * (theta_d - tvec))
    else:
        theta, W = _check_warm(warm[0], warm[1], p)
    state = GelnetState(theta, W, _beta_from_theta(theta))
    active = _active_matrix(spec)
    state.beta[active.T == 0] = 0.0
    last_case = np.zeros(p, dtype=np.int8)
    switches = np.zeros(p, dtype=np.int64)
    niter, delta, status = _kernels.gelnet_target_run(
        S, state.w, state.theta, state.beta, lam, alpha, tvec, active,
        last_case, switches,
        cfg.outer_thr * convergence_scale(S), cfg.inner_thr,
        cfg.outer_maxit, cfg.inner_maxit)
    res = _result(state.theta, state.w, niter, delta, status, p)
    if status == 1 and np.any(switches > 0):
        # the budget ran out while cases were still flipping, which is
        # the signature of an overly large diagonal target
        res = replace(res, message="outer iteration budget exhausted amid "
                                   "oscillating case selection; target too large")
    return res


def _case1_root(s, lam, alpha, t):
    """Vectorized positive root of the small-target initialization
    quadratic; degenerates to 1/(s + lambda) at alpha = 1."""
    la = lam * alpha
    a = lam * (1.0 - alpha)
    bq = s + la - a * t
    if a == 0.0:
        return 1.0 / bq
    return (-bq + np.sqrt(bq * bq + 4.0 * a)) / (2.0 * a)
