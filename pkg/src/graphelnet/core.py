"""Core types, validation and shared plumbing for precision-matrix estimation.

Matrices are plain float64 numpy arrays kept exactly symmetric by
construction: validate() repairs round-off asymmetry on input and the
solvers mirror both triangles on every write.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SolverConfig",
    "ProblemSpec",
    "FitResult",
    "BlockView",
    "KktReport",
    "validate",
    "block_view",
    "convergence_scale",
    "objective",
    "kkt_residuals",
    "sample_covariance",
    "fold_indices",
    "read_matrix",
    "write_matrix",
]


@dataclass(frozen=True)
class SolverConfig:
    """Stopping thresholds and iteration budgets shared by all solvers."""

    outer_thr: float = 1e-4
    inner_thr: float = 1e-7
    outer_maxit: int = 100
    inner_maxit: int = 1000

    def __post_init__(self):
        if self.outer_thr <= 0 or self.inner_thr <= 0:
            raise ValueError("thresholds must be positive")
        if self.outer_maxit < 1 or self.inner_maxit < 1:
            raise ValueError("iteration limits must be positive")


@dataclass
class ProblemSpec:
    """A validated estimation problem; build through validate().

    target holds the diagonal entries of the (diagonal) target matrix,
    all zero when no target is requested.  zero_constraints is a
    symmetric set of off-diagonal index pairs pinned to zero.
    """

    S: np.ndarray
    lam: float
    alpha: float
    target: np.ndarray
    penalize_diagonal: bool = True
    zero_constraints: frozenset = frozenset()
    config: SolverConfig = field(default_factory=SolverConfig)

    @property
    def p(self) -> int:
        return self.S.shape[0]

    @property
    def has_target(self) -> bool:
        return bool(np.any(self.target != 0.0))

    def zero_mask(self) -> np.ndarray:
        """Boolean p x p matrix, True where theta is constrained to zero."""
        mask = np.zeros((self.p, self.p), dtype=bool)
        for i, j in self.zero_constraints:
            mask[i, j] = True
        return mask


@dataclass
class FitResult:
    """Solver output: precision estimate, working covariance and diagnostics.

    delta is the mean absolute change of W entries over the last full
    sweep; conv reports whether it dropped below the scaled threshold
    within the iteration budget.
    """

    theta: np.ndarray
    w: np.ndarray
    niter: int
    delta: float
    conv: bool
    message: str = ""
    n_components: int = 1
    max_block_size: int = 0


def validate(S, lam, alpha, target=None, *, penalize_diagonal=True,
             zero=None, config=None) -> ProblemSpec:
    """Check and normalize the inputs of the penalized problem.

    S is symmetrized by averaging; asymmetry beyond 1e-8 relative is an
    error.  target may be a length-p sequence or an object with an
    `entries` attribute.  zero is an iterable of off-diagonal (i, j)
    pairs; the symmetric closure is stored.
    """
    S = np.array(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("S must be a square matrix")
    if not np.all(np.isfinite(S)):
        raise ValueError("S must have finite entries")
    p = S.shape[0]
    gap = np.abs(S - S.T).max()
    if gap > 1e-8 * max(1.0, np.abs(S).max()):
        raise ValueError(f"S is asymmetric beyond tolerance (max |S - S'| = {gap:g})")
    S = (S + S.T) / 2.0

    lam = float(lam)
    if lam < 0:
        raise ValueError("negative lambda")
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")

    if target is None:
        t = np.zeros(p)
    else:
        t = np.array(getattr(target, "entries", target), dtype=np.float64).ravel()
        if t.size != p:
            raise ValueError(f"target length {t.size} does not match p = {p}")
        if not np.all(np.isfinite(t)):
            raise ValueError("target must have finite entries")
        if np.any(t < 0):
            raise ValueError("negative target entry")

    pairs = set()
    if zero is not None:
        for pair in zero:
            i, j = int(pair[0]), int(pair[1])
            if i == j:
                raise ValueError("zero constraints apply to off-diagonal entries only")
            if not (0 <= i < p and 0 <= j < p):
                raise ValueError(f"zero constraint ({i}, {j}) out of range")
            pairs.add((i, j))
            pairs.add((j, i))

    cfg = config if config is not None else SolverConfig()
    return ProblemSpec(S, lam, alpha, t, bool(penalize_diagonal),
                       frozenset(pairs), cfg)


class BlockView:
    """Implicit trailing-column partition of (theta, w, s) at column j.

    Accessors gather the pieces on demand, so nothing is copied until a
    field is read; the O(p^2) W11/Theta11 blocks materialize only when
    asked for.  write_back mirrors new column values into both triangles
    of the parent arrays.
    """

    def __init__(self, theta, w, s, j):
        p = s.shape[0]
        if p < 2:
            raise ValueError("block view requires p >= 2")
        if not 0 <= j < p:
            raise ValueError("column index out of range")
        self._theta = theta
        self._w = w
        self._s = s
        self.j = int(j)
        self.rest = np.concatenate((np.arange(j), np.arange(j + 1, p)))

    @property
    def W11(self):
        return self._w[np.ix_(self.rest, self.rest)]

    @property
    def w12(self):
        return self._w[self.rest, self.j]

    @property
    def w22(self):
        return float(self._w[self.j, self.j])

    @property
    def Theta11(self):
        return self._theta[np.ix_(self.rest, self.rest)]

    @property
    def theta12(self):
        return self._theta[self.rest, self.j]

    @property
    def theta22(self):
        return float(self._theta[self.j, self.j])

    @property
    def s12(self):
        return self._s[self.rest, self.j]

    @property
    def s22(self):
        return float(self._s[self.j, self.j])

    def write_back(self, theta12=None, theta22=None, w12=None, w22=None):
        j, rest = self.j, self.rest
        if theta12 is not None:
            self._theta[rest, j] = theta12
            self._theta[j, rest] = theta12
        if theta22 is not None:
            self._theta[j, j] = theta22
        if w12 is not None:
            self._w[rest, j] = w12
            self._w[j, rest] = w12
        if w22 is not None:
            self._w[j, j] = w22

    def reassemble(self):
        """Rebuild (theta, w, s) from the partitioned pieces."""
        out = []
        for M11, m12, m22 in ((self.Theta11, self.theta12, self.theta22),
                              (self.W11, self.w12, self.w22),
                              (self._s[np.ix_(self.rest, self.rest)],
                               self._s[self.rest, self.j], self.s22)):
            p = M11.shape[0] + 1
            M = np.empty((p, p))
            M[np.ix_(self.rest, self.rest)] = M11
            M[self.rest, self.j] = m12
            M[self.j, self.rest] = m12
            M[self.j, self.j] = m22
            out.append(M)
        return tuple(out)


def block_view(theta, w, s, j) -> BlockView:
    return BlockView(theta, w, s, j)


def convergence_scale(S) -> float:
    """Scale for the outer stopping rule: the mean absolute off-diagonal
    entry of S, falling back to the diagonal mean when there is no
    off-diagonal mass (p = 1 or a diagonal S)."""
    S = np.asarray(S)
    p = S.shape[0]
    if p > 1:
        off = np.abs(S[~np.eye(p, dtype=bool)])
        if off.max() > 0.0:
            return float(off.mean())
    return float(np.abs(np.diag(S)).mean())


def objective(S, theta, lam, alpha, target=None, penalize_diagonal=True) -> float:
    """Penalized negative log-likelihood evaluated at theta.

    Returns +inf when theta is not positive definite so that line
    searches and comparisons can reject infeasible points.
    """
    theta = np.asarray(theta, dtype=np.float64)
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0:
        return float("inf")
    p = theta.shape[0]
    if target is None:
        diff = theta
    else:
        t = np.asarray(getattr(target, "entries", target), dtype=np.float64).ravel()
        diff = theta - np.diag(t)
    if penalize_diagonal:
        l1 = np.abs(diff).sum()
        l2 = (diff ** 2).sum()
    else:
        off = ~np.eye(p, dtype=bool)
        l1 = np.abs(diff[off]).sum()
        l2 = (diff[off] ** 2).sum()
    return float(-logdet + np.sum(S * theta)
                 + lam * (alpha * l1 + 0.5 * (1.0 - alpha) * l2))


@dataclass(frozen=True)
class KktReport:
    """Entrywise residuals of the normal equations at a fitted pair.

    max_grad: worst stationarity residual where the penalty is smooth;
    max_zero_excess: worst subgradient-bound violation at entries sitting
    exactly on the target (or at zero); max_inverse_err: max |W Theta - I|.
    """

    max_grad: float
    max_zero_excess: float
    max_inverse_err: float


def kkt_residuals(spec: ProblemSpec, fit: FitResult, zero_tol=1e-8) -> KktReport:
    """Check the fitted (theta, w) against the penalized normal equations.

    Entries within zero_tol of the kink are scored with the subgradient
    bound instead of the smooth residual.  Zero-constrained entries are
    skipped; they carry no stationarity condition.
    """
    S, theta, w = spec.S, fit.theta, fit.w
    p = spec.p
    la = spec.lam * spec.alpha
    l2 = spec.lam * (1.0 - spec.alpha)
    G = S - w
    max_grad = 0.0
    max_excess = 0.0
    masked = spec.zero_mask()
    for i in range(p):
        for j in range(p):
            if masked[i, j]:
                continue
            if i == j:
                if not spec.penalize_diagonal:
                    max_grad = max(max_grad, abs(G[i, i]))
                    continue
                d = theta[i, i] - spec.target[i]
            else:
                d = theta[i, j]
            if abs(d) <= zero_tol:
                max_excess = max(max_excess, abs(G[i, j]) - la)
            else:
                r = G[i, j] + la * np.sign(d) + l2 * d
                max_grad = max(max_grad, abs(r))
    inv_err = float(np.abs(w @ theta - np.eye(p)).max())
    return KktReport(float(max_grad), float(max(max_excess, 0.0)), inv_err)


def sample_covariance(X, correlation=False) -> np.ndarray:
    """Centered maximum-likelihood covariance X'X / n, optionally rescaled
    to a correlation matrix with exact unit diagonal."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("data must be an n x p matrix")
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    S = (Xc.T @ Xc) / n
    S = (S + S.T) / 2.0
    if correlation:
        d = np.sqrt(np.diag(S))
        if np.any(d <= 0):
            raise ValueError("zero-variance column; correlation undefined")
        S = S / np.outer(d, d)
        np.fill_diagonal(S, 1.0)
        S = (S + S.T) / 2.0
    return S


def fold_indices(n, folds, seed):
    """Deterministic fold assignment: a seeded permutation of 0..n-1 cut
    into contiguous chunks, the first n mod folds chunks one row larger."""
    n, folds = int(n), int(folds)
    if not 2 <= folds <= n:
        raise ValueError("need 2 <= folds <= n")
    perm = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, folds)
    out, start = [], 0
    for k in range(folds):
        size = base + (1 if k < extra else 0)
        out.append(np.sort(perm[start:start + size]))
        start += size
    return out


def write_matrix(path, M):
    """Write a matrix as headerless CSV with %.17g entries (lossless for
    float64 round trips)."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        for row in M:
            fh.write(",".join("%.17g" % v for v in row))
            fh.write("\n")


def read_matrix(path) -> np.ndarray:
    """Read a headerless CSV matrix written by write_matrix."""
    return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
