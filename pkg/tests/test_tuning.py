import math

import numpy as np
import pytest

from snrlab import (ParamSpace, RegimeMismatchError, ridge_fit)
from snrlab.tuning import (Family, Provenance, Tuning, default_grid,
                           enet_default_tuning, grid_risk_table,
                           lasso_default_lambda, oracle_tune,
                           ridge_default_lambda, scaled_error)

from conftest import make_dataset


class TestRidgeDefault:
    def test_direct_substitution(self):
        t = ridge_default_lambda(1000, ParamSpace(k=10, tau=1.0, sigma=1.0))
        assert t.lam == pytest.approx(100.0)
        assert t.provenance is Provenance.PAPER_FORMULA

    def test_arithmetic(self):
        t = ridge_default_lambda(500, ParamSpace(k=12, tau=0.5, sigma=1.0))
        assert t.lam == pytest.approx(500 / (12 * 0.25), rel=1e-12)
        assert t.lam == pytest.approx(166.67, abs=0.01)

    def test_scale_invariance(self):
        a = ridge_default_lambda(300, ParamSpace(k=5, tau=0.7, sigma=1.1))
        b = ridge_default_lambda(300, ParamSpace(k=5, tau=2.1, sigma=3.3))
        assert a.lam == pytest.approx(b.lam, rel=1e-12)


class TestLassoDefault:
    def test_value(self):
        t = lasso_default_lambda(1000, 10, 1.0)
        assert t.lam == pytest.approx(math.sqrt(2 * math.log(100)), rel=1e-12)
        assert t.lam == pytest.approx(3.0349, abs=1e-4)

    def test_linear_in_sigma(self):
        a = lasso_default_lambda(1000, 10, 1.0, epsilon=0.0)
        b = lasso_default_lambda(1000, 10, 2.0, epsilon=0.0)
        assert b.lam == pytest.approx(2 * a.lam, rel=1e-12)

    def test_small_gap_still_positive(self):
        t = lasso_default_lambda(11, 10, 1.0)
        assert 0 < t.lam < 1

    def test_requires_p_above_k(self):
        with pytest.raises(ValueError):
            lasso_default_lambda(10, 10, 1.0)


class TestEnetDefault:
    def test_moderate_snr_value(self):
        t = enet_default_tuning(1000, ParamSpace(k=10, tau=1.0, sigma=1.0))
        assert t.lam == pytest.approx(4.0)
        assert t.gamma == pytest.approx(50 * math.exp(-1.5) - 1, rel=1e-12)
        assert t.gamma == pytest.approx(10.157, abs=1e-3)

    def test_regime_mismatch(self):
        with pytest.raises(RegimeMismatchError):
            enet_default_tuning(1000, ParamSpace(k=10, tau=2.0, sigma=1.0))
        # gamma would have been ~ -0.969
        try:
            enet_default_tuning(1000, ParamSpace(k=10, tau=2.0, sigma=1.0))
        except RegimeMismatchError as exc:
            assert "-0.969" in str(exc)

    def test_scaling(self):
        a = enet_default_tuning(1000, ParamSpace(k=10, tau=1.0, sigma=1.0))
        b = enet_default_tuning(1000, ParamSpace(k=10, tau=3.0, sigma=3.0))
        assert b.gamma == pytest.approx(a.gamma, rel=1e-12)
        assert b.lam == pytest.approx(3 * a.lam, rel=1e-12)


class TestTuningValidation:
    def test_negative_lam(self):
        with pytest.raises(ValueError):
            Tuning(Family.RIDGE, lam=-1.0)

    def test_enet_gamma_bound(self):
        with pytest.raises(ValueError):
            Tuning(Family.ELASTIC_NET, lam=1.0, gamma=-1.0)

    def test_bss_needs_k(self):
        with pytest.raises(ValueError):
            Tuning(Family.BEST_SUBSET, k=0)


class TestOracleTune:
    def test_single_point_grid(self):
        ds = [make_dataset(20, 10, k=2, tau=1.0, sigma=0.5, seed=1)]
        grid = [Tuning(Family.RIDGE, lam=3.0)]
        best = oracle_tune(Family.RIDGE, ds, grid)
        assert best.lam == 3.0
        assert best.provenance is Provenance.ORACLE_GRID

    def test_noiseless_ridge_prefers_no_shrinkage(self):
        ds = [make_dataset(30, 10, k=3, tau=1.0, sigma=0.0, seed=2)]
        grid = [Tuning(Family.RIDGE, lam=1e-6), Tuning(Family.RIDGE, lam=1e3)]
        assert oracle_tune(Family.RIDGE, ds, grid).lam == 1e-6

    def test_tie_breaks_toward_smaller_lam(self):
        ds = [make_dataset(25, 8, k=2, tau=1.0, sigma=0.5, seed=3)]
        lam_max = float(np.abs(ds[0].X.T @ ds[0].y).max())
        grid = [Tuning(Family.LASSO, lam=5 * lam_max),
                Tuning(Family.LASSO, lam=2 * lam_max)]
        # both far above lam_max give the zero fit, identical risk
        assert oracle_tune(Family.LASSO, ds, grid).lam == 2 * lam_max

    def test_ridge_grid_matches_bruteforce(self):
        datasets = [make_dataset(200, 100, k=5, tau=1.0, sigma=4.0, seed=s)
                    for s in range(20)]
        lams = np.logspace(-2, 4, 40)
        grid = [Tuning(Family.RIDGE, lam=float(l)) for l in lams]
        best = oracle_tune(Family.RIDGE, datasets, grid)
        # independent recomputation, one plain fit per grid point
        risks = np.zeros(40)
        for ds in datasets:
            beta = ds.beta.to_dense()
            for i, l in enumerate(lams):
                coef = ridge_fit(ds.X, ds.y, float(l)).coefficients
                risks[i] += scaled_error(coef, beta)
        brute = lams[int(np.argmin(risks))]
        idx_best = int(np.argmin(np.abs(lams - best.lam)))
        idx_brute = int(np.argmin(np.abs(lams - brute)))
        assert abs(idx_best - idx_brute) <= 1

    def test_failing_grid_point_excluded(self):
        # lam = 0 ridge on p > n is singular; the other point must win
        ds = [make_dataset(10, 20, k=2, tau=1.0, sigma=0.5, seed=4)]
        grid = [Tuning(Family.RIDGE, lam=0.0), Tuning(Family.RIDGE, lam=1.0)]
        assert oracle_tune(Family.RIDGE, ds, grid).lam == 1.0

    def test_validation(self):
        ds = [make_dataset(10, 5, k=2, tau=1.0, sigma=0.5, seed=5)]
        with pytest.raises(ValueError):
            oracle_tune(Family.RIDGE, ds, [])
        with pytest.raises(ValueError):
            oracle_tune(Family.RIDGE, ds, [Tuning(Family.LASSO, lam=1.0)])
        mixed = ds + [make_dataset(11, 5, k=2, tau=1.0, sigma=0.5, seed=6)]
        with pytest.raises(ValueError):
            oracle_tune(Family.RIDGE, mixed, [Tuning(Family.RIDGE, lam=1.0)])


class TestGrids:
    @pytest.mark.parametrize("family", list(Family))
    def test_default_grids_are_wellformed(self, family):
        grid = default_grid(family, p=200, k=5, tau=1.0, sigma=0.8)
        assert grid
        assert all(t.family is family for t in grid)
        if family in (Family.RIDGE, Family.LASSO):
            assert len(grid) == 40
            lams = [t.lam for t in grid]
            assert lams == sorted(lams)

    def test_grid_risk_table_enet_matches_fit(self):
        ds = [make_dataset(30, 12, k=3, tau=1.0, sigma=1.0, seed=7)]
        grid = default_grid(Family.ELASTIC_NET, 12, 3, 1.0, 1.0)
        table = grid_risk_table(Family.ELASTIC_NET, ds, grid)
        from snrlab import enet_fit
        beta = ds[0].beta.to_dense()
        for t, risk in zip(grid, table):
            coef = enet_fit(ds[0].X, ds[0].y, t.lam, t.gamma).coefficients
            assert risk == pytest.approx(scaled_error(coef, beta), rel=1e-12)
