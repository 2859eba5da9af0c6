"""Block coordinate descent fits against closed forms, frozen values,
and the independent proximal-gradient oracle."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from graphelnet import (
    DiagCase,
    NumericalError,
    SolverConfig,
    gelnet_fit,
    gelnet_fit_target,
    kkt_residuals,
    objective,
    scalar_fit,
    solve_diag_quadratic,
    target_case_select,
    validate,
)
from oracles import pg_solve, random_correlation

TIGHT = SolverConfig(outer_thr=1e-10, inner_thr=1e-12,
                     outer_maxit=500, inner_maxit=50000)

S2 = np.array([[1.0, 0.5], [0.5, 1.0]])
S3 = np.array([[1.0, 0.4, 0.1],
               [0.4, 1.0, 0.3],
               [0.1, 0.3, 1.0]])

# frozen against the proximal-gradient oracle at tol 1e-13
TH2 = np.array([[0.9282004229008991, -0.2887901413929846],
                [-0.2887901413929846, 0.9282004229008991]])
OBJ2 = 2.1563322961815126
TH3_OFF01 = -0.2063599933172382
TH3_OFF12 = -0.12381600155111733
OBJ3 = 2.9280220449735466
TH2_NODIAG = np.array([[1.1477747790270325, -0.4118399306887807],
                       [-0.4118399306887807, 1.1477747790270323]])
OBJ2_NODIAG = 1.8452137019998383
SCALAR_ROOT = 0.5615528128088303  # -1.5 + sqrt(4.25)


def spec_of(S, lam, alpha, target=None, **kw):
    kw.setdefault("config", TIGHT)
    return validate(np.asarray(S, dtype=float), lam, alpha, target, **kw)


class TestClosedForms:
    def test_identity_lasso(self):
        res = gelnet_fit(spec_of(np.eye(2), 0.4, 1.0))
        assert res.conv
        assert_allclose(res.theta, np.eye(2) / 1.4, rtol=0, atol=1e-15)
        assert_allclose(res.w, 1.4 * np.eye(2), rtol=0, atol=0)

    def test_l1_kills_weak_offdiagonal(self):
        # lam*alpha = 0.6 dominates |s12| = 0.5, so the off-diagonal
        # is soft-thresholded to exactly zero
        res = gelnet_fit(spec_of(S2, 0.6, 1.0))
        assert res.conv
        assert res.theta[0, 1] == 0.0 and res.theta[1, 0] == 0.0
        assert_allclose(np.diag(res.theta), [1 / 1.6, 1 / 1.6], atol=1e-15)
        assert res.w[0, 1] == 0.0
        assert_allclose(np.diag(res.w), [1.6, 1.6], atol=0)

    def test_frozen_2x2(self):
        res = gelnet_fit(spec_of(S2, 0.2, 0.5))
        assert res.conv
        assert_allclose(res.theta, TH2, atol=1e-7)
        assert abs(objective(S2, res.theta, 0.2, 0.5) - OBJ2) < 1e-9

    def test_frozen_3x3_identity_target(self):
        res = gelnet_fit_target(spec_of(S3, 0.3, 0.5, target=np.ones(3)))
        assert res.conv
        # F_t lands inside the band for every variable: the diagonal is
        # pinned to the target exactly
        assert np.all(np.diag(res.theta) == 1.0)
        assert_allclose(res.theta[0, 1], TH3_OFF01, atol=1e-7)
        assert_allclose(res.theta[1, 2], TH3_OFF12, atol=1e-7)
        assert res.theta[0, 2] == 0.0
        got = objective(S3, res.theta, 0.3, 0.5, target=np.ones(3))
        assert abs(got - OBJ3) < 1e-9

    def test_frozen_unpenalized_diagonal(self):
        res = gelnet_fit(spec_of(S2, 0.2, 0.5, penalize_diagonal=False))
        assert res.conv
        assert_allclose(res.theta, TH2_NODIAG, atol=1e-7)
        got = objective(S2, res.theta, 0.2, 0.5, penalize_diagonal=False)
        assert abs(got - OBJ2_NODIAG) < 1e-9

    def test_target_fixed_point(self):
        # S = I and T = I: theta = W = I satisfies every case test at
        # equality, so the first sweep changes nothing
        res = gelnet_fit_target(spec_of(np.eye(2), 1.0, 0.5, target=np.ones(2)))
        assert res.conv
        assert np.array_equal(res.theta, np.eye(2))
        assert np.array_equal(res.w, np.eye(2))

    def test_scalar_problem(self):
        res = gelnet_fit(spec_of(np.array([[1.0]]), 1.0, 0.5))
        assert res.conv and res.max_block_size == 1
        th = res.theta[0, 0]
        assert_allclose(th, SCALAR_ROOT, atol=1e-14)
        # stationarity of the scalar objective at theta > 0
        assert abs(-1.0 / th + 1.0 + 0.5 + 0.5 * th) < 1e-12

    def test_huge_target_reports_failure(self):
        S = random_correlation(3, 0)
        res = gelnet_fit_target(spec_of(S, 1.0, 0.5, target=np.full(3, 1e12)))
        assert not res.conv
        assert "target too large" in res.message

    def test_huge_target_alpha_one_stays_bounded(self):
        # pure l1 pull toward the target is bounded, so even an absurd
        # target leaves the solution finite
        S = random_correlation(3, 1)
        res = gelnet_fit_target(spec_of(S, 0.5, 1.0, target=np.full(3, 1e160)))
        assert res.conv
        assert np.all(np.diag(res.theta) < 10.0)


class TestAgainstOracle:
    @pytest.mark.parametrize("seed,p,alpha", [(0, 3, 1.0), (1, 4, 0.5),
                                              (2, 5, 0.0), (3, 6, 0.8)])
    def test_random_instances(self, seed, p, alpha):
        S = random_correlation(p, seed)
        res = gelnet_fit(spec_of(S, 0.3, alpha))
        assert res.conv
        ref, _ = pg_solve(S, 0.3, alpha)
        assert_allclose(res.theta, ref, atol=1e-6)

    def test_diagonal_target(self):
        S = random_correlation(4, 7)
        t = np.linspace(0.5, 2.0, 4)
        res = gelnet_fit_target(spec_of(S, 0.5, 0.7, target=t))
        assert res.conv
        ref, _ = pg_solve(S, 0.5, 0.7, T=np.diag(t))
        assert_allclose(res.theta, ref, atol=1e-6)

    def test_unpenalized_diagonal(self):
        S = random_correlation(4, 3)
        res = gelnet_fit(spec_of(S, 0.4, 0.6, penalize_diagonal=False))
        assert res.conv
        ref, _ = pg_solve(S, 0.4, 0.6, diag_pen=False)
        assert_allclose(res.theta, ref, atol=1e-6)


def _prefix_thetas(spec, sweeps):
    """Rerun the deterministic cold-start trajectory cut off after
    1..sweeps outer iterations."""
    out = []
    for k in range(1, sweeps + 1):
        cfg = SolverConfig(outer_thr=1e-15, inner_thr=1e-12,
                           outer_maxit=k, inner_maxit=50000)
        res = gelnet_fit(validate(spec.S, spec.lam, spec.alpha, spec.target,
                                  penalize_diagonal=spec.penalize_diagonal,
                                  config=cfg))
        out.append(res.theta)
    return out


class TestInvariants:
    def test_objective_non_increasing(self):
        S = random_correlation(6, 11)
        spec = spec_of(S, 0.2, 0.5)
        vals = [objective(S, th, 0.2, 0.5) for th in _prefix_thetas(spec, 6)]
        for prev, cur in zip(vals, vals[1:]):
            assert cur <= prev + 1e-10 * max(1.0, abs(prev))

    def test_objective_non_increasing_with_target(self):
        S = random_correlation(5, 12)
        t = np.full(5, 0.8)
        spec = spec_of(S, 0.4, 0.9, target=t)
        vals = [objective(S, th, 0.4, 0.9, target=t)
                for th in _prefix_thetas(spec, 6)]
        for prev, cur in zip(vals, vals[1:]):
            assert cur <= prev + 1e-10 * max(1.0, abs(prev))

    def test_unpenalized_diag_of_w_is_diag_of_s(self):
        S = random_correlation(5, 4)
        for k in range(1, 5):
            cfg = SolverConfig(outer_thr=1e-15, inner_thr=1e-12, outer_maxit=k,
                               inner_maxit=50000)
            res = gelnet_fit(validate(S, 0.3, 0.7, penalize_diagonal=False,
                                      config=cfg))
            assert np.array_equal(np.diag(res.w), np.diag(S))

    def test_zero_constraints_pin_entries(self):
        S = random_correlation(5, 2)
        spec = spec_of(S, 0.1, 0.5, zero=[(0, 3), (1, 4)])
        res = gelnet_fit(spec)
        assert res.conv
        for i, j in ((0, 3), (1, 4)):
            assert res.theta[i, j] == 0.0 and res.theta[j, i] == 0.0
        rep = kkt_residuals(spec, res)
        assert rep.max_grad < 1e-7
        assert rep.max_inverse_err < 1e-7

    def test_warm_start_resumes(self):
        S = random_correlation(6, 9)
        spec = spec_of(S, 0.2, 0.8)
        cold = gelnet_fit(spec)
        warm = gelnet_fit(spec, warm=(cold.theta, cold.w))
        assert warm.conv and warm.niter <= 2
        assert_allclose(warm.theta, cold.theta, atol=1e-9)

    def test_warm_start_validation(self):
        spec = spec_of(S2, 0.2, 0.5)
        with pytest.raises(ValueError, match="dimensions do not match"):
            gelnet_fit(spec, warm=(np.eye(3), np.eye(3)))
        bad_w = np.array([[1.0, 0.3], [-0.3, 1.0]])
        with pytest.raises(ValueError, match="warm w must be symmetric"):
            gelnet_fit(spec, warm=(np.eye(2), bad_w))
        with pytest.raises(ValueError, match="positive diagonal"):
            gelnet_fit(spec, warm=(-np.eye(2), np.eye(2)))


class TestDiagCases:
    def test_case_selection(self):
        assert target_case_select(0.3, 0.5) is DiagCase.AT
        assert target_case_select(0.7, 0.5) is DiagCase.ABOVE
        assert target_case_select(-0.7, 0.5) is DiagCase.BELOW
        # band edges belong to the AT case
        assert target_case_select(0.5, 0.5) is DiagCase.AT
        assert target_case_select(-0.5, 0.5) is DiagCase.AT
        with pytest.raises(ValueError):
            target_case_select(0.0, -0.1)

    def test_quadratic_above_zero_target(self):
        th, w = solve_diag_quadratic(DiagCase.ABOVE, 1.0, 1.0, 0.5, 0.0, 0.0)
        assert_allclose(th, SCALAR_ROOT, atol=1e-15)
        # w22 equals 1/theta + dot by construction of the root
        assert abs(w - 1.0 / th) < 1e-12

    def test_at_case_returns_target(self):
        th, w = solve_diag_quadratic(DiagCase.AT, 1.0, 1.0, 0.5, 1.0, 0.0)
        assert th == 1.0 and w == 1.0

    def test_at_with_zero_target_degrades_to_above(self):
        a = solve_diag_quadratic(DiagCase.AT, 1.0, 1.0, 0.5, 0.0, 0.0)
        b = solve_diag_quadratic(DiagCase.ABOVE, 1.0, 1.0, 0.5, 0.0, 0.0)
        assert a == b

    def test_alpha_one_is_linear(self):
        # the ridge coefficient lam*(1-alpha) vanishes: theta = 1/bq
        th, w = solve_diag_quadratic(DiagCase.ABOVE, 1.0, 0.5, 1.0, 0.2, 0.0)
        assert_allclose(th, 1.0 / 1.5, rtol=0, atol=0)
        assert w == 1.5

    def test_alpha_one_no_positive_root(self):
        with pytest.raises(NumericalError, match="no positive root"):
            solve_diag_quadratic(DiagCase.BELOW, 1.0, 2.0, 1.0, 5.0, 0.0)
        with pytest.raises(NumericalError, match="no positive root"):
            # a large dot product pushes bq nonpositive
            solve_diag_quadratic(DiagCase.ABOVE, 1.0, 0.5, 1.0, 1.0, 2.0)

    def test_scalar_fit_branches(self):
        th, w, msg = scalar_fit(1.0, 1.0, 0.5)
        assert msg == "" and abs(th - SCALAR_ROOT) < 1e-15
        # below-target branch: theta = 1/(s - lam) at alpha = 1
        th, w, msg = scalar_fit(2.0, 0.5, 1.0, t=10.0)
        assert msg == "" and abs(th - 1.0 / 1.5) < 1e-15 and w == 1.5
        # neither strict branch is consistent: theta sticks to the target
        th, w, msg = scalar_fit(1.0, 1.0, 1.0, t=1.0)
        assert msg == "" and th == 1.0 and w == 1.0
        th, w, msg = scalar_fit(1.0, 0.3, 0.5, penalize_diagonal=False)
        assert msg == "" and th == 1.0 and w == 1.0
        th, w, msg = scalar_fit(-1.0, 0.0, 0.5)
        assert msg != "" and np.isnan(th)


class TestRouting:
    def test_alpha_zero_with_target_refused(self):
        spec = spec_of(S2, 0.2, 0.0, target=np.ones(2))
        with pytest.raises(ValueError, match="use rope_solve"):
            gelnet_fit_target(spec)

    def test_unpenalized_target_is_inert(self):
        spec_t = spec_of(S2, 0.2, 0.5, target=np.ones(2),
                         penalize_diagonal=False)
        spec_0 = spec_of(S2, 0.2, 0.5, penalize_diagonal=False)
        a = gelnet_fit_target(spec_t)
        b = gelnet_fit(spec_0)
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.w, b.w)

    def test_gelnet_fit_routes_targets(self):
        spec = spec_of(S3, 0.3, 0.5, target=np.ones(3))
        a = gelnet_fit(spec)
        b = gelnet_fit_target(spec)
        assert np.array_equal(a.theta, b.theta)
