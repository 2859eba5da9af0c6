"""Batch command-line interface: estimate, cv, simulate, bench.

All inputs and outputs are headerless CSV matrices plus a small JSON
metadata file; nothing is interactive.  Exit codes: 0 success, 1 bad
input, 2 solver did not converge (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .core import (SolverConfig, read_matrix, sample_covariance, validate,
                   write_matrix)
from .cv import cross_validate
from .dpgelnet import dpgelnet_fit
from .evaluation import (ModelSpec, f1, gen_model, graph_confusion, kl_loss,
                         l2_loss, mcc, sample_gaussian, sp_loss)
from .gelnet import gelnet_fit
from .rope import rope_fit
from .screening import solve_blockwise
from .subsolvers import NumericalError
from .targets import make_target

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for non-convergence.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_grid(text):
    """Comma list of values, or geo:base,count for base**(0..count-1)."""
    if text.startswith("geo:"):
        base, count = text[4:].split(",")
        return float(base) ** np.arange(int(count))
    return np.array([float(t) for t in text.split(",")], dtype=np.float64)


def parse_methods(text):
    """Comma list of solver[:alpha[:target]] tokens; rope defaults to
    alpha 0, other solvers require an explicit alpha."""
    out = []
    for tok in text.split(","):
        parts = tok.strip().split(":")
        solver = parts[0]
        if solver not in ("gelnet", "dpgelnet", "rope"):
            raise ValueError(f"unknown solver {solver!r} in --methods")
        if len(parts) > 1:
            alpha = float(parts[1])
        elif solver == "rope":
            alpha = 0.0
        else:
            raise ValueError(f"method {tok!r} needs an alpha")
        if solver == "rope" and alpha != 0:
            raise ValueError("rope requires alpha = 0")
        target = parts[2] if len(parts) > 2 else None
        out.append((solver, alpha, target))
    if not out:
        raise ValueError("empty --methods")
    return out


def _config(args):
    kw = {}
    for name in ("outer_thr", "inner_thr", "outer_maxit", "inner_maxit"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return SolverConfig(**kw) if kw else None


def _load_s(args):
    if (args.s is None) == (args.data is None):
        raise ValueError("exactly one of --s and --data is required")
    if args.s is not None:
        S = read_matrix(args.s)
        if args.cor:
            d = np.sqrt(np.diag(S))
            if np.any(d <= 0):
                raise ValueError("cannot rescale: nonpositive diagonal")
            S = S / np.outer(d, d)
            np.fill_diagonal(S, 1.0)
        return S, None
    X = read_matrix(args.data)
    return sample_covariance(X, correlation=args.cor), X


def _write_fit(prefix, fit, lam, alpha, solver, wall_ms):
    write_matrix(f"{prefix}.theta.csv", fit.theta)
    write_matrix(f"{prefix}.w.csv", fit.w)
    meta = {"schema": 1, "lambda": lam, "alpha": alpha, "solver": solver,
            "niter": fit.niter, "del": fit.delta, "conv": bool(fit.conv),
            "n_components": fit.n_components,
            "max_block_size": fit.max_block_size, "wall_ms": wall_ms}
    with open(f"{prefix}.meta.json", "w") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")


def cmd_estimate(args) -> int:
    S, X = _load_s(args)
    target = make_target(args.target, S=S, data=X, seed=args.seed)
    zero = None
    if args.zero:
        pairs = read_matrix(args.zero)
        zero = [(int(i), int(j)) for i, j in np.atleast_2d(pairs)]
    spec = validate(S, args.lam, args.alpha, target,
                    penalize_diagonal=not args.no_diag_penalty, zero=zero,
                    config=_config(args))
    solver = args.solver
    if solver == "auto":
        ropeable = (spec.alpha == 0 and spec.penalize_diagonal
                    and not spec.zero_constraints)
        solver = "rope" if ropeable else "gelnet"
    warm = None
    if (args.warm_theta is None) != (args.warm_w is None):
        raise ValueError("--warm-theta and --warm-w go together")
    if args.warm_theta is not None:
        if solver not in ("gelnet", "dpgelnet"):
            raise ValueError("warm start requires gelnet or dpgelnet")
        warm = (read_matrix(args.warm_theta), read_matrix(args.warm_w))
    t0 = time.perf_counter()
    if warm is not None:
        fit_fn = gelnet_fit if solver == "gelnet" else dpgelnet_fit
        fit = fit_fn(spec, warm=warm)
    elif args.no_screening:
        fit = {"gelnet": gelnet_fit, "dpgelnet": dpgelnet_fit,
               "rope": rope_fit}[solver](spec)
    else:
        fit = solve_blockwise(spec, solver=solver, threads=args.threads)
    wall_ms = (time.perf_counter() - t0) * 1e3
    _write_fit(args.out_prefix, fit, args.lam, args.alpha, solver, wall_ms)
    if not fit.conv:
        print(f"did not converge: {fit.message}", file=sys.stderr)
        return 2
    return 0


def cmd_cv(args) -> int:
    X = read_matrix(args.data)
    res = cross_validate(X, parse_grid(args.grid), args.alpha,
                         target_kind=args.target,
                         use_correlation=args.cor, folds=args.folds,
                         seed=args.seed, solver=args.solver,
                         penalize_diagonal=not args.no_diag_penalty,
                         config=_config(args))
    # score table: grid row, one row per fold, mean row
    table = np.vstack([res.lambda_grid, res.scores, res.mean_scores])
    write_matrix(f"{args.out_prefix}.scores.csv", table)
    _write_fit(args.out_prefix, res.fit, res.lambda_opt, args.alpha,
               args.solver, 0.0)
    print(f"lambda_opt {res.lambda_opt:.17g}")
    return 0 if res.fit.conv else 2


def _simulate_rows(args):
    methods = parse_methods(args.methods)
    grid = parse_grid(args.grid)
    rows = []
    for rep in range(args.reps):
        state = np.random.SeedSequence(
            entropy=args.seed, spawn_key=(rep,)).generate_state(3)
        truth = gen_model(ModelSpec(args.model, args.p, int(state[0])))
        X = sample_gaussian(truth.sigma, args.n, int(state[1]))
        for solver, alpha, target in methods:
            res = cross_validate(X, grid, alpha, target_kind=target,
                                 use_correlation=args.cor, folds=args.folds,
                                 seed=int(state[2]), solver=solver,
                                 theta_true=truth.theta)
            th = res.fit.theta
            try:
                kl = kl_loss(truth.sigma, th)
            except ValueError:
                kl = float("inf")
            c = graph_confusion(th, truth.theta)
            rows.append([args.model, args.p, args.n, solver,
                         res.lambda_opt, alpha, target or "none",
                         kl, l2_loss(truth.theta, th),
                         sp_loss(truth.theta, th), f1(c), mcc(c)])
    return rows


def _emit_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            "%.17g" % v if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    rows = _simulate_rows(args)
    _emit_csv(args.out, ["model", "p", "n", "method", "lambda", "alpha",
                         "target", "KL", "L2", "SP", "F1", "MCC"], rows)
    return 0


def _time_repeats(fn, repeats):
    best = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best.append((time.perf_counter() - t0) * 1e3)
    return float(np.mean(best))


def _bench_blocks(args):
    rng = np.random.default_rng(args.seed)
    m, B = args.block_size, args.blocks
    S = np.zeros((m * B, m * B))
    for b in range(B):
        Xb = rng.standard_normal((3 * m, m))
        sl = slice(b * m, (b + 1) * m)
        S[sl, sl] = sample_covariance(Xb, correlation=True)
    spec = validate(S, args.lam, args.alpha)
    screened = lambda: solve_blockwise(spec, solver="gelnet",
                                       threads=args.threads)
    unscreened = lambda: gelnet_fit(spec)
    screened(), unscreened()          # untimed warm-up (JIT compilation)
    return [["blocks", "screened", _time_repeats(screened, args.repeats)],
            ["blocks", "unscreened", _time_repeats(unscreened, args.repeats)]]


def _bench_warm(args):
    rng = np.random.default_rng(args.seed)
    X = rng.standard_normal((3 * args.p, args.p))
    S = sample_covariance(X, correlation=True)
    grid = np.sort(parse_grid(args.grid))[::-1]

    def cold():
        for lam in grid:
            gelnet_fit(validate(S, lam, args.alpha))

    def warm():
        prev = None
        for lam in grid:
            fit = gelnet_fit(validate(S, lam, args.alpha), warm=prev)
            if fit.conv:
                prev = (fit.theta, fit.w)

    cold()                            # untimed warm-up (JIT compilation)
    return [["warm", "cold", _time_repeats(cold, args.repeats)],
            ["warm", "warm", _time_repeats(warm, args.repeats)]]


def cmd_bench(args) -> int:
    rows = _bench_blocks(args) if args.scenario == "blocks" else _bench_warm(args)
    _emit_csv(args.out, ["scenario", "method", "mean_wall_ms"], rows)
    return 0


def _add_tolerances(p):
    p.add_argument("--outer-thr", type=float, dest="outer_thr")
    p.add_argument("--inner-thr", type=float, dest="inner_thr")
    p.add_argument("--outer-maxit", type=int, dest="outer_maxit")
    p.add_argument("--inner-maxit", type=int, dest="inner_maxit")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="graphelnet",
                  description="Penalized precision-matrix estimation")
    sub = top.add_subparsers(dest="command", required=True,
                             parser_class=_Parser)

    pe = sub.add_parser("estimate", help="fit one penalized problem")
    pe.add_argument("--s", help="p x p input matrix CSV")
    pe.add_argument("--data", help="n x p data CSV (covariance computed)")
    pe.add_argument("--lambda", dest="lam", type=float, required=True)
    pe.add_argument("--alpha", type=float, required=True)
    pe.add_argument("--solver", default="auto",
                    choices=["gelnet", "dpgelnet", "rope", "auto"])
    pe.add_argument("--target", default=None,
                    help="identity|v-identity|eigenvalue|msc|nodewise|file:PATH")
    pe.add_argument("--cor", action="store_true",
                    help="use the correlation rescaling of the input")
    pe.add_argument("--no-diag-penalty", action="store_true")
    pe.add_argument("--zero", help="CSV of 0-based index pairs forced to zero")
    pe.add_argument("--no-screening", action="store_true")
    pe.add_argument("--warm-theta", help="warm start theta CSV")
    pe.add_argument("--warm-w", help="warm start w CSV")
    pe.add_argument("--out-prefix", default="fit")
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--threads", type=int, default=os.cpu_count())
    _add_tolerances(pe)
    pe.set_defaults(func=cmd_estimate)

    pc = sub.add_parser("cv", help="cross-validate lambda on a grid")
    pc.add_argument("--data", required=True)
    pc.add_argument("--grid", default="geo:0.9,41",
                    help='comma list or "geo:base,count"')
    pc.add_argument("--alpha", type=float, required=True)
    pc.add_argument("--target", default=None)
    pc.add_argument("--cor", action="store_true")
    pc.add_argument("--folds", type=int, default=5)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--solver", default="gelnet",
                    choices=["gelnet", "dpgelnet", "rope"])
    pc.add_argument("--no-diag-penalty", action="store_true")
    pc.add_argument("--out-prefix", default="cv")
    _add_tolerances(pc)
    pc.set_defaults(func=cmd_cv)

    ps = sub.add_parser("simulate", help="replicate a simulation model")
    ps.add_argument("--model", type=int, required=True, choices=range(1, 7))
    ps.add_argument("--p", type=int, required=True)
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--reps", type=int, default=10)
    ps.add_argument("--methods", required=True,
                    help="comma list of solver[:alpha[:target]]")
    ps.add_argument("--grid", default="geo:0.9,41")
    ps.add_argument("--folds", type=int, default=5)
    ps.add_argument("--cor", action="store_true")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", help="output CSV (default stdout)")
    ps.set_defaults(func=cmd_simulate)

    pb = sub.add_parser("bench", help="wall-time comparisons")
    pb.add_argument("--scenario", required=True, choices=["blocks", "warm"])
    pb.add_argument("--blocks", type=int, default=5)
    pb.add_argument("--block-size", type=int, default=20, dest="block_size")
    pb.add_argument("--p", type=int, default=100)
    pb.add_argument("--lambda", dest="lam", type=float, default=0.3)
    pb.add_argument("--alpha", type=float, default=1.0)
    pb.add_argument("--grid", default="geo:0.9,11")
    pb.add_argument("--repeats", type=int, default=3)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--threads", type=int, default=os.cpu_count())
    pb.add_argument("--out", help="output CSV (default stdout)")
    pb.set_defaults(func=cmd_bench)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, NumericalError, OSError) as exc:
        print(f"graphelnet: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
