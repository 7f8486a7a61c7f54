"""Least squares with t-based inference.

The linear solve goes through a QR decomposition (never explicit normal
equations); rank is screened with a singular-value ratio test. Two-sided
p-values come from the Student-t distribution evaluated through a hand-rolled
regularized incomplete beta function, kept dependency-free on purpose:

    p = I_{df/(df+t^2)}(df/2, 1/2)

The continued fraction follows the classical Lentz scheme and must shrink its
correction term below 1e-12 within 300 iterations, else NumericalError.

Everything here is a pure function over immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

_BETA_EPS = 1e-12
_BETA_MAX_ITER = 300
_FPMIN = 1e-300
_RANK_TOL = 1e-10


def _beta_cf(a: float, b: float, x: float) -> float:
    # Lentz continued fraction for the incomplete beta; see reg_inc_beta.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise NumericalError(
        f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not (a > 0 and b > 0):
        raise ValidationError("reg_inc_beta requires a > 0 and b > 0")
    if not (0.0 <= x <= 1.0):
        raise ValidationError("reg_inc_beta requires 0 <= x <= 1")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        + math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
    )
    front = math.exp(ln_front)
    # use the expansion on the side where it converges fast, the symmetry
    # I_x(a,b) = 1 - I_{1-x}(b,a) on the other
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_pvalue(t: float, df: float) -> float:
    """Two-sided p-value for a t statistic with df residual degrees of freedom."""
    if not math.isfinite(df) or df < 1:
        raise ValidationError(f"degrees of freedom must be >= 1, got {df}")
    if math.isnan(t):
        raise ValidationError("t statistic must not be NaN")
    if math.isinf(t):
        return 0.0
    # t = 0 gives x = 1 and an exact p of 1.0; symmetry in t holds exactly
    # because t enters only through t*t
    x = df / (df + t * t)
    return reg_inc_beta(0.5 * df, 0.5, x)


def adjusted_r2(r2: float, n: int, p: int) -> float:
    """Adjusted R^2 = 1 - (1 - R^2)(n - 1)/(n - p - 1)."""
    if n <= p + 1:
        raise ValidationError(f"adjusted R^2 needs n > p + 1 (n={n}, p={p})")
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


def pearson_r(x, y) -> float:
    """Pearson correlation of two equal-length vectors with nonzero variance."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.ndim != 1 or ya.ndim != 1 or xa.size != ya.size:
        raise ValidationError("pearson_r requires two 1-d vectors of equal length")
    if xa.size < 2:
        raise ValidationError("pearson_r requires length >= 2")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise ValidationError("pearson_r requires nonzero variance in both vectors")
    return float((xc @ yc) / math.sqrt(sxx * syy))


@dataclass(frozen=True)
class OlsFit:
    """Ordinary least squares fit with per-coefficient inference.

    Arrays are aligned with `names` (predictors only; the intercept is kept
    separate). Standardized coefficients use population standard deviations:
    std_coef = coef * sd(x) / sd(y).
    """

    names: tuple[str, ...]
    coef: np.ndarray
    intercept: float
    std_coef: np.ndarray
    stderr: np.ndarray
    tstat: np.ndarray
    pvalue: np.ndarray
    intercept_stderr: float
    intercept_tstat: float
    intercept_pvalue: float
    r2: float
    adj_r2: float
    n: int
    p: int
    has_intercept: bool

    def predict(self, design) -> np.ndarray:
        X = np.asarray(design, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.shape[1] != self.p:
            raise ValidationError(
                f"design has {X.shape[1]} columns, fit expects {self.p}"
            )
        return X @ self.coef + self.intercept


def _t_and_p(coef: float, se: float, df: int) -> tuple[float, float]:
    if se == 0.0:
        # zero residual variance: the statistic degenerates
        if coef == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, coef), 0.0
    t = coef / se
    return t, t_pvalue(t, df)


def ols_fit(design, response, intercept: bool = True, names=None) -> OlsFit:
    """Least squares of `response` on the columns of `design`.

    Solves through QR after a rank screen (smallest/largest singular value
    ratio below 1e-10 raises NumericalError). Requires n > p + 1 with an
    intercept so that at least one residual degree of freedom remains.
    """
    X0 = np.asarray(design, dtype=float)
    if X0.ndim == 1:
        X0 = X0.reshape(-1, 1)
    if X0.ndim != 2:
        raise ValidationError("design must be a 2-d array")
    y = np.asarray(response, dtype=float)
    if y.ndim != 1 or y.size != X0.shape[0]:
        raise ValidationError("response length must match the design row count")
    if not np.all(np.isfinite(X0)) or not np.all(np.isfinite(y)):
        raise ValidationError("design and response must be finite")
    n, p = X0.shape
    if p < 1:
        raise ValidationError("design needs at least one column")
    ncols = p + 1 if intercept else p
    if n <= ncols:
        raise ValidationError(
            f"too few rows for inference: n={n} must exceed {ncols} fitted parameters"
        )
    if names is None:
        names = tuple(f"x{j + 1}" for j in range(p))
    else:
        names = tuple(names)
        if len(names) != p:
            raise ValidationError("names must match the number of design columns")

    X = np.column_stack([np.ones(n), X0]) if intercept else X0
    singular = np.linalg.svd(X, compute_uv=False)
    if singular[0] == 0.0 or singular[-1] <= singular[0] * _RANK_TOL:
        raise NumericalError(
            "design matrix is rank-deficient (singular value ratio below 1e-10)"
        )
    Q, R = np.linalg.qr(X)
    b_full = np.linalg.solve(R, Q.T @ y)
    fitted = X @ b_full
    resid = y - fitted
    sse = float(resid @ resid)
    if intercept:
        sst = float(((y - y.mean()) ** 2).sum())
    else:
        sst = float((y**2).sum())
    if sst <= 0.0:
        raise ValidationError("response has zero variance")
    r2 = min(1.0, max(0.0, 1.0 - sse / sst))
    adj = adjusted_r2(r2, n, p) if n > p + 1 else math.nan

    df_resid = n - X.shape[1]
    sigma2 = sse / df_resid
    Rinv = np.linalg.inv(R)
    xtx_inv_diag = np.einsum("ij,ij->i", Rinv, Rinv)
    se_full = np.sqrt(np.maximum(sigma2 * xtx_inv_diag, 0.0))

    tstats = np.empty(X.shape[1])
    pvals = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        tstats[j], pvals[j] = _t_and_p(float(b_full[j]), float(se_full[j]), df_resid)

    sd_y = float(np.std(y))
    sd_x = np.std(X0, axis=0)
    if intercept:
        coef = b_full[1:]
        se = se_full[1:]
        t_pred = tstats[1:]
        p_pred = pvals[1:]
        b0 = float(b_full[0])
        se0, t0, p0 = float(se_full[0]), float(tstats[0]), float(pvals[0])
    else:
        coef = b_full
        se = se_full
        t_pred = tstats
        p_pred = pvals
        b0, se0, t0, p0 = 0.0, math.nan, math.nan, math.nan
    std_coef = coef * sd_x / sd_y if sd_y > 0 else np.zeros_like(coef)

    return OlsFit(
        names=names,
        coef=np.array(coef, dtype=float),
        intercept=b0,
        std_coef=np.array(std_coef, dtype=float),
        stderr=np.array(se, dtype=float),
        tstat=np.array(t_pred, dtype=float),
        pvalue=np.array(p_pred, dtype=float),
        intercept_stderr=se0,
        intercept_tstat=t0,
        intercept_pvalue=p0,
        r2=r2,
        adj_r2=adj,
        n=n,
        p=p,
        has_intercept=intercept,
    )
