"""Cross-validation: refit reproducibility, warm-path agreement with
cold fits, and input rejection."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from graphelnet import (
    ModelSpec,
    SolverConfig,
    cross_validate,
    cv_score,
    gelnet_fit,
    gen_model,
    rope_fit,
    sample_covariance,
    sample_gaussian,
    validate,
)

GRID = 0.5 * 0.8 ** np.arange(6)


def make_data(n=120, p=6, seed=0, model=5):
    spec = ModelSpec(model, p, seed=seed)
    gt = gen_model(spec)
    return sample_gaussian(gt.sigma, n, seed=seed + 1), gt


class TestScore:
    def test_matches_formula(self):
        S = np.array([[1.0, 0.2], [0.2, 1.0]])
        theta = np.diag([2.0, 4.0])
        expect = 2.0 + 4.0 - np.log(8.0)
        assert_allclose(cv_score(S, theta), expect, atol=1e-14)

    def test_indefinite_is_inf(self):
        assert cv_score(np.eye(2), np.diag([1.0, -1.0])) == np.inf


class TestCrossValidate:
    def test_singleton_grid_refit_is_direct_fit(self):
        X, _ = make_data()
        res = cross_validate(X, [0.3], alpha=0.5, seed=4)
        assert res.lambda_opt == 0.3
        S = sample_covariance(X)
        direct = gelnet_fit(validate(S, 0.3, 0.5))
        assert np.array_equal(res.fit.theta, direct.theta)
        assert np.array_equal(res.fit.w, direct.w)

    def test_singleton_with_target(self):
        X, _ = make_data(seed=2)
        res = cross_validate(X, [0.4], alpha=0.8, target_kind="msc",
                             use_correlation=True, seed=1)
        S = sample_covariance(X, correlation=True)
        from graphelnet import make_target
        direct = gelnet_fit(validate(S, 0.4, 0.8, make_target("msc", S=S)))
        assert np.array_equal(res.fit.theta, direct.theta)

    def test_deterministic(self):
        X, _ = make_data(seed=5)
        a = cross_validate(X, GRID, alpha=1.0, seed=9)
        b = cross_validate(X, GRID, alpha=1.0, seed=9)
        assert a.lambda_opt == b.lambda_opt
        assert np.array_equal(a.scores, b.scores, equal_nan=True)
        assert np.array_equal(a.fit.theta, b.fit.theta)

    def test_seed_changes_folds(self):
        X, _ = make_data(seed=6)
        a = cross_validate(X, GRID, alpha=1.0, seed=0)
        b = cross_validate(X, GRID, alpha=1.0, seed=1)
        assert not np.array_equal(a.scores, b.scores, equal_nan=True)

    def test_grid_is_descending_and_opt_in_grid(self):
        X, _ = make_data(seed=7)
        res = cross_validate(X, GRID[::-1], alpha=0.5, seed=0)
        assert np.all(np.diff(res.lambda_grid) < 0)
        assert res.lambda_opt in res.lambda_grid
        assert res.scores.shape == (5, GRID.size)
        assert res.mean_scores.shape == (GRID.size,)
        g = int(np.nanargmin(res.mean_scores))
        assert res.lambda_grid[g] == res.lambda_opt

    def test_warm_path_matches_cold_cells(self):
        # rerunning each lambda alone gives cold fits; the warm-started
        # sweep must land on the same scores
        X, _ = make_data(n=150, seed=8)
        cfg = SolverConfig(outer_thr=1e-7)
        full = cross_validate(X, GRID, alpha=0.5, seed=3, config=cfg)
        for g, lam in enumerate(full.lambda_grid):
            single = cross_validate(X, [lam], alpha=0.5, seed=3, config=cfg)
            assert np.abs(single.mean_scores[0] - full.mean_scores[g]) <= 1e-4

    def test_dpgelnet_close_to_gelnet(self):
        X, _ = make_data(seed=10)
        a = cross_validate(X, GRID, alpha=1.0, seed=2, solver="gelnet")
        b = cross_validate(X, GRID, alpha=1.0, seed=2, solver="dpgelnet")
        assert a.lambda_opt == b.lambda_opt
        assert np.abs(a.mean_scores - b.mean_scores).max() <= 1e-3

    def test_rope_solver(self):
        X, _ = make_data(seed=11)
        res = cross_validate(X, GRID, alpha=0.0, solver="rope", seed=0)
        S = sample_covariance(X)
        direct = rope_fit(validate(S, res.lambda_opt, 0.0))
        assert np.array_equal(res.fit.theta, direct.theta)

    def test_rope_needs_alpha_zero(self):
        X, _ = make_data(seed=12)
        with pytest.raises(ValueError, match="requires alpha = 0"):
            cross_validate(X, GRID, alpha=0.5, solver="rope")

    def test_true_diag_target(self):
        X, gt = make_data(seed=13)
        res = cross_validate(X, GRID, alpha=0.5, target_kind="true-diag",
                             theta_true=gt.theta, seed=0)
        assert res.fit.conv


class TestRejection:
    def test_bad_grid(self):
        X, _ = make_data()
        for bad in ([], [0.0, 0.1], [-0.2], [0.3, np.nan]):
            with pytest.raises(ValueError, match="strictly positive"):
                cross_validate(X, bad, alpha=0.5)

    def test_bad_data_shape(self):
        with pytest.raises(ValueError, match="n x p"):
            cross_validate(np.zeros(10), [0.1], alpha=0.5)

    def test_unknown_solver(self):
        X, _ = make_data()
        with pytest.raises(ValueError, match="unknown solver"):
            cross_validate(X, [0.1], alpha=0.5, solver="mystery")

    def test_bad_fold_count(self):
        X, _ = make_data(n=4)
        with pytest.raises(ValueError, match="folds"):
            cross_validate(X, [0.1], alpha=0.5, folds=10)

    def test_no_convergent_cell(self):
        X, _ = make_data()
        cfg = SolverConfig(outer_thr=1e-15, outer_maxit=1)
        with pytest.raises(ValueError, match="no lambda in the grid"):
            cross_validate(X, [0.2, 0.1], alpha=0.5, config=cfg)
