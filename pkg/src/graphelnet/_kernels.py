"""Numba kernels for the coordinate-descent hot loops.

The gelnet kernels work on the full p x p arrays and exclude the updated
column j by index arithmetic, so no submatrices are copied inside a
sweep.  This relies on Beta[j, j] == 0 throughout: products over a full
row then contribute nothing through the excluded index.

Status codes returned by the outer kernels:
    0  converged
    1  outer iteration budget exhausted
    2  nonpositive inner denominator (W_kk + lambda2 <= 0)
    3  nonpositive 1/theta22 denominator (w22 - beta'w12 <= 0)
    4  diagonal target update failed (no positive root / nonpositive w22)
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def soft_threshold(x, lam):
    if x > lam:
        return x - lam
    if x < -lam:
        return x + lam
    return 0.0


@njit(cache=True, nogil=True)
def enet_cd(Q, b, lam1, lam2, beta, active, inner_thr, inner_maxit):
    """Coordinate descent for the penalized quadratic
    0.5 beta'Q beta - b'beta + lam1 ||beta||_1 + 0.5 lam2 ||beta||_2^2.

    beta is updated in place; masked coordinates stay untouched (zero).
    Returns (sweeps, status) with status 1 on a nonpositive denominator.
    """
    m = b.shape[0]
    bmax = 0.0
    for k in range(m):
        if abs(b[k]) > bmax:
            bmax = abs(b[k])
    thr = inner_thr * max(1.0, bmax)
    for it in range(inner_maxit):
        dmax = 0.0
        for k in range(m):
            if active[k] == 0:
                continue
            denom = Q[k, k] + lam2
            if denom <= 0.0:
                return it, 1
            r = b[k] + Q[k, k] * beta[k]
            for l in range(m):
                r -= Q[k, l] * beta[l]
            new = soft_threshold(r, lam1) / denom
            d = abs(new - beta[k])
            if d > dmax:
                dmax = d
            beta[k] = new
        if dmax <= thr:
            return it + 1, 0
    return inner_maxit, 0


@njit(cache=True, nogil=True)
def boxqp_cd(Theta11, s12, weight, bound, gamma, inner_thr, inner_maxit):
    """Clipped coordinate descent for
    min 0.5 (s12 + weight*gamma)' Theta11 (s12 + weight*gamma),
    ||gamma||_inf <= bound.

    Coordinates with zero weight are skipped (the objective is constant
    in them).  gamma is updated in place; z = s12 + weight*gamma is
    maintained incrementally.  Returns (sweeps, status).
    """
    m = s12.shape[0]
    z = np.empty(m)
    for k in range(m):
        z[k] = s12[k] + weight[k] * gamma[k]
    for it in range(inner_maxit):
        dmax = 0.0
        for k in range(m):
            wk = weight[k]
            if wk == 0.0:
                continue
            dkk = Theta11[k, k]
            if dkk <= 0.0:
                return it, 1
            g = 0.0
            for l in range(m):
                g += Theta11[k, l] * z[l]
            new = gamma[k] - g / (dkk * wk)
            if new > bound:
                new = bound
            elif new < -bound:
                new = -bound
            d = abs(new - gamma[k])
            if d > dmax:
                dmax = d
            z[k] += wk * (new - gamma[k])
            gamma[k] = new
        if dmax <= inner_thr:
            return it + 1, 0
    return inner_maxit, 0


@njit(cache=True, nogil=True)
def _enet_column(S, W, Beta, j, lam1, lam2, active, inner_thr, inner_maxit):
    """Inner elastic-net solve for column j on the full arrays."""
    p = S.shape[0]
    bmax = 0.0
    for k in range(p):
        if k != j and abs(S[k, j]) > bmax:
            bmax = abs(S[k, j])
    thr = inner_thr * max(1.0, bmax)
    for it in range(inner_maxit):
        dmax = 0.0
        for k in range(p):
            if k == j or active[k, j] == 0:
                continue
            denom = W[k, k] + lam2
            if denom <= 0.0:
                return 1
            r = S[k, j] + W[k, k] * Beta[j, k]
            for l in range(p):
                r -= W[k, l] * Beta[j, l]
            new = soft_threshold(r, lam1) / denom
            d = abs(new - Beta[j, k])
            if d > dmax:
                dmax = d
            Beta[j, k] = new
        if dmax <= thr:
            break
    return 0


@njit(cache=True, nogil=True)
def _w12_and_dot(S, W, Beta, j):
    """Write the new w12 column in place and return beta' w12_new.

    Writing W[k, j] during the pass is safe: every product runs over a
    full row and picks up column j only through Beta[j, j], which is 0.
    """
    p = S.shape[0]
    dot = 0.0
    for k in range(p):
        if k == j:
            continue
        acc = 0.0
        for l in range(p):
            acc += W[k, l] * Beta[j, l]
        W[k, j] = acc
        dot += Beta[j, k] * acc
    return dot


@njit(cache=True, nogil=True)
def gelnet_run(S, W, Theta, Beta, lam, alpha, diag_pen, active,
               thr_outer, inner_thr, outer_maxit, inner_maxit):
    """Full outer loop for the zero-target problem.

    Returns (niter, delta, status); see the module docstring for codes.
    """
    p = S.shape[0]
    lam1 = lam * alpha
    l2b = lam * (1.0 - alpha)
    Wold = W.copy()
    delta = 0.0
    for it in range(outer_maxit):
        for j in range(p):
            lam2 = l2b * Theta[j, j]
            if _enet_column(S, W, Beta, j, lam1, lam2, active,
                            inner_thr, inner_maxit) != 0:
                return it + 1, delta, 2
            dot = _w12_and_dot(S, W, Beta, j)
            denom = W[j, j] - dot
            if denom <= 0.0:
                return it + 1, delta, 3
            th22 = 1.0 / denom
            Theta[j, j] = th22
            for k in range(p):
                if k == j:
                    continue
                W[j, k] = W[k, j]
                tv = -th22 * Beta[j, k]
                Theta[k, j] = tv
                Theta[j, k] = tv
            if diag_pen:
                W[j, j] = S[j, j] + lam1 + l2b * th22
            else:
                W[j, j] = S[j, j]
        num = 0.0
        for a in range(p):
            for c in range(p):
                num += abs(W[a, c] - Wold[a, c])
                Wold[a, c] = W[a, c]
        delta = num / (p * p)
        if delta <= thr_outer:
            return it + 1, delta, 0
    return outer_maxit, delta, 1


@njit(cache=True, nogil=True)
def gelnet_target_run(S, W, Theta, Beta, lam, alpha, tvec, active,
                      last_case, switch_count,
                      thr_outer, inner_thr, outer_maxit, inner_maxit):
    """Outer loop with a nonzero diagonal target (penalized diagonal).

    The diagonal update picks one of three cases from the test statistic
    F_t = 1/t22 + beta'w12 - s22 and solves the matching quadratic.  A
    per-entry guard forces the boundary case after more than 3 case
    switches, bounding oscillation for extreme targets.
    """
    p = S.shape[0]
    lam1 = lam * alpha
    l2b = lam * (1.0 - alpha)
    Wold = W.copy()
    delta = 0.0
    for it in range(outer_maxit):
        for j in range(p):
            lam2 = l2b * Theta[j, j]
            if _enet_column(S, W, Beta, j, lam1, lam2, active,
                            inner_thr, inner_maxit) != 0:
                return it + 1, delta, 2
            dot = _w12_and_dot(S, W, Beta, j)
            t22 = tvec[j]
            if t22 <= 0.0:
                case = 1
            else:
                Ft = 1.0 / t22 + dot - S[j, j]
                if Ft > lam1:
                    case = 1
                elif Ft < -lam1:
                    case = 3
                else:
                    case = 2
                if last_case[j] != 0 and case != last_case[j]:
                    switch_count[j] += 1
                    if switch_count[j] > 3:
                        case = 2
                        switch_count[j] = 0
                last_case[j] = case
            if case == 2:
                th22 = t22
                w22 = 1.0 / t22 + dot
            else:
                sgn = 1.0 if case == 1 else -1.0
                bq = S[j, j] + sgn * lam1 - l2b * t22 - dot
                if l2b > 0.0:
                    th22 = (-bq + np.sqrt(bq * bq + 4.0 * l2b)) / (2.0 * l2b)
                else:
                    if bq <= 0.0:
                        return it + 1, delta, 4
                    th22 = 1.0 / bq
                w22 = S[j, j] + sgn * lam1 + l2b * (th22 - t22)
            if not (th22 > 0.0 and w22 > 0.0
                    and np.isfinite(th22) and np.isfinite(w22)):
                return it + 1, delta, 4
            Theta[j, j] = th22
            for k in range(p):
                if k == j:
                    continue
                W[j, k] = W[k, j]
                tv = -th22 * Beta[j, k]
                Theta[k, j] = tv
                Theta[j, k] = tv
            W[j, j] = w22
        num = 0.0
        for a in range(p):
            for c in range(p):
                num += abs(W[a, c] - Wold[a, c])
                Wold[a, c] = W[a, c]
        delta = num / (p * p)
        if delta <= thr_outer:
            return it + 1, delta, 0
    return outer_maxit, delta, 1
