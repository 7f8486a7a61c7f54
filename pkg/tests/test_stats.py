"""Least squares and the t-distribution machinery, cross-checked against scipy."""

import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from catreg import (
    NumericalError,
    ValidationError,
    adjusted_r2,
    ols_fit,
    pearson_r,
    reg_inc_beta,
    t_pvalue,
)


class TestRegIncBeta:
    def test_bounds(self):
        assert reg_inc_beta(2.0, 3.0, 0.0) == 0.0
        assert reg_inc_beta(2.0, 3.0, 1.0) == 1.0

    def test_against_scipy_grid(self):
        # independent oracle: scipy's betainc over a broad grid
        for a in (0.5, 1.0, 2.5, 5.0, 40.0, 250.0):
            for b in (0.5, 1.0, 3.5, 12.0, 100.0):
                for x in np.linspace(0.001, 0.999, 23):
                    ours = reg_inc_beta(a, b, float(x))
                    oracle = float(scipy.special.betainc(a, b, x))
                    assert abs(ours - oracle) < 1e-10, (a, b, x)

    def test_symmetry_identity(self):
        # I_x(a,b) = 1 - I_{1-x}(b,a) to 1e-12 across a grid
        for a in (0.5, 1.5, 7.0, 33.0):
            for b in (0.5, 2.0, 11.0):
                for x in np.linspace(0.01, 0.99, 33):
                    lhs = reg_inc_beta(a, b, float(x))
                    rhs = 1.0 - reg_inc_beta(b, a, float(1.0 - x))
                    assert abs(lhs - rhs) < 1e-12

    def test_domain_validation(self):
        with pytest.raises(ValidationError):
            reg_inc_beta(0.0, 1.0, 0.5)
        with pytest.raises(ValidationError):
            reg_inc_beta(1.0, 1.0, 1.5)


class TestTPvalue:
    def test_reference_values(self):
        # classic two-sided 5% points
        assert t_pvalue(2.228, 10) == pytest.approx(0.05, abs=5e-4)
        assert t_pvalue(1.962, 1000) == pytest.approx(0.05, abs=5e-4)

    def test_zero_statistic_is_exactly_one(self):
        for df in (1, 2, 5, 30, 193):
            assert t_pvalue(0.0, df) == 1.0

    def test_symmetry_exact(self):
        for df in (1, 4, 17, 120):
            for t in np.linspace(-6.0, 6.0, 41):
                assert t_pvalue(float(t), df) == t_pvalue(float(-t), df)

    def test_against_scipy(self):
        for df in (1, 2, 7, 29, 180, 1500):
            for t in (-4.2, -1.3, -0.1, 0.4, 2.6, 8.0):
                oracle = 2.0 * float(scipy.stats.t.sf(abs(t), df))
                assert t_pvalue(t, df) == pytest.approx(oracle, abs=1e-12)

    def test_df_validated(self):
        with pytest.raises(ValidationError):
            t_pvalue(1.0, 0)

    @given(
        st.floats(-50, 50, allow_nan=False),
        st.integers(min_value=1, max_value=500),
    )
    @settings(max_examples=200, deadline=None)
    def test_pvalue_in_unit_interval(self, t, df):
        p = t_pvalue(t, df)
        assert 0.0 <= p <= 1.0

    def test_monotone_decreasing_in_abs_t(self):
        for df in (1, 6, 60):
            grid = [t_pvalue(t, df) for t in np.linspace(0.0, 9.0, 60)]
            assert all(a >= b for a, b in zip(grid, grid[1:]))


class TestAdjustedR2:
    def test_metadata_sized_fit(self):
        # n=194, p=9: R^2 0.548 -> 0.526; 0.546 -> 0.5238 (displays as 0.523)
        assert adjusted_r2(0.548, 194, 9) == pytest.approx(0.526, abs=1e-3)
        assert adjusted_r2(0.546, 194, 9) == pytest.approx(0.5238, abs=1e-3)

    def test_requires_spare_df(self):
        with pytest.raises(ValidationError):
            adjusted_r2(0.5, 10, 9)


class TestPearson:
    def test_known_value(self):
        assert pearson_r([1, 2, 3], [1, 2, 4]) == pytest.approx(0.98198, abs=1e-5)

    def test_perfect_correlation(self):
        assert pearson_r([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]) == pytest.approx(1.0)

    def test_zero_variance_rejected(self):
        with pytest.raises(ValidationError):
            pearson_r([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


class TestOlsFit:
    def test_exact_line(self):
        # y = x exactly: slope 1, intercept 0, R^2 = 1
        fit = ols_fit(np.array([[1.0], [2.0], [3.0]]), np.array([1.0, 2.0, 3.0]))
        assert fit.coef[0] == pytest.approx(1.0, abs=1e-12)
        assert fit.intercept == pytest.approx(0.0, abs=1e-12)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)
        # slope of an exact line is overwhelmingly significant
        assert fit.pvalue[0] < 1e-10

    def test_against_scipy_linregress(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=60)
        y = 2.5 * x + 1.0 + rng.normal(scale=0.7, size=60)
        fit = ols_fit(x.reshape(-1, 1), y)
        oracle = scipy.stats.linregress(x, y)
        assert fit.coef[0] == pytest.approx(oracle.slope, abs=1e-10)
        assert fit.intercept == pytest.approx(oracle.intercept, abs=1e-10)
        assert fit.pvalue[0] == pytest.approx(oracle.pvalue, abs=1e-10)
        assert fit.stderr[0] == pytest.approx(oracle.stderr, abs=1e-10)
        assert fit.r2 == pytest.approx(oracle.rvalue**2, abs=1e-10)

    def test_residuals_orthogonal_to_design(self):
        rng = np.random.default_rng(2)
        for seed in range(10):
            rng = np.random.default_rng(seed)
            n, p = int(rng.integers(10, 80)), int(rng.integers(1, 6))
            X = rng.normal(size=(n, p))
            y = rng.normal(size=n)
            fit = ols_fit(X, y)
            resid = y - fit.predict(X)
            # orthogonal to every column and to the intercept
            assert abs(float(resid.sum())) < 1e-8
            for j in range(p):
                assert abs(float(resid @ X[:, j])) < 1e-8

    def test_refit_on_fitted_values_gives_r2_one(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(30, 3))
        y = rng.normal(size=30)
        fit = ols_fit(X, y)
        refit = ols_fit(X, fit.predict(X))
        assert refit.r2 == pytest.approx(1.0, abs=1e-10)

    def test_single_standardized_predictor_std_coef_is_pearson(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=50)
        y = 1.4 * x + rng.normal(scale=0.8, size=50)
        fit = ols_fit(x.reshape(-1, 1), y)
        assert fit.std_coef[0] == pytest.approx(pearson_r(x, y), abs=1e-10)

    def test_rank_deficiency_raises_numerical(self):
        x = np.arange(10.0)
        X = np.column_stack([x, 2.0 * x])  # exactly collinear
        with pytest.raises(NumericalError, match="rank"):
            ols_fit(X, x)

    def test_too_few_rows_rejected(self):
        X = np.eye(3)
        with pytest.raises(ValidationError, match="too few rows"):
            ols_fit(X, np.array([1.0, 2.0, 3.0]))

    def test_standardized_coefficients_definition(self):
        rng = np.random.default_rng(21)
        X = rng.normal(size=(40, 2)) * np.array([3.0, 0.5])
        y = X @ np.array([1.0, -2.0]) + rng.normal(size=40)
        fit = ols_fit(X, y)
        sd_y = float(np.std(y))
        for j in range(2):
            expected = fit.coef[j] * float(np.std(X[:, j])) / sd_y
            assert fit.std_coef[j] == pytest.approx(expected, abs=1e-12)
