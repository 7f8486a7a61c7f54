"""Shared dataset builders for the test suite. Everything is seeded."""

from __future__ import annotations

import numpy as np

from catreg import Dataset, Observation, Variable

LETTERS = "ABCDEFGHIJ"


def numeric_dataset(seed: int, n: int, p: int) -> Dataset:
    """Random linear signal over p numeric predictors plus noise."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    beta = rng.normal(size=p)
    y = X @ beta + rng.normal(scale=0.5, size=n)
    variables = tuple(
        [Variable(f"x{j + 1}", "numeric") for j in range(p)]
        + [Variable("y", "numeric", role="dependent")]
    )
    rows = tuple(
        Observation(tuple(float(v) for v in X[i]) + (float(y[i]),)) for i in range(n)
    )
    return Dataset(variables, rows)


def _codes_with_all_categories(rng, n: int, n_cats: int) -> np.ndarray:
    codes = np.concatenate([np.arange(n_cats), rng.integers(0, n_cats, n - n_cats)])
    rng.shuffle(codes)
    return codes


def single_cat_dataset(seed: int, n: int, n_cats: int, level: str = "nominal") -> Dataset:
    """One categorical predictor with per-category effects plus noise."""
    rng = np.random.default_rng(seed)
    codes = _codes_with_all_categories(rng, n, n_cats)
    effects = rng.normal(size=n_cats)
    if level == "ordinal":
        effects = np.sort(effects)
    y = effects[codes] + rng.normal(scale=0.6, size=n)
    cats = tuple(LETTERS[:n_cats])
    variables = (
        Variable("c", level, cats),
        Variable("y", "numeric", role="dependent"),
    )
    rows = tuple(Observation((cats[codes[i]], float(y[i]))) for i in range(n))
    return Dataset(variables, rows)


def mixed_dataset(seed: int, n: int = 80) -> Dataset:
    """Ordinal + nominal + two numeric predictors with genuine signal."""
    rng = np.random.default_rng(seed)
    o1 = _codes_with_all_categories(rng, n, 4)
    n1 = _codes_with_all_categories(rng, n, 3)
    x1 = rng.normal(size=n)
    x2 = rng.normal(size=n)
    y = (
        np.array([0.0, 0.7, 1.5, 2.1])[o1]
        + np.array([0.0, 1.2, -0.8])[n1]
        + 0.9 * x1
        + rng.normal(scale=0.5, size=n)
    )
    A = tuple(LETTERS[:4])
    B = tuple(LETTERS[:3])
    variables = (
        Variable("ord1", "ordinal", A),
        Variable("nom1", "nominal", B),
        Variable("num1", "numeric"),
        Variable("num2", "numeric"),
        Variable("y", "numeric", role="dependent"),
    )
    rows = tuple(
        Observation((A[o1[i]], B[n1[i]], float(x1[i]), float(x2[i]), float(y[i])))
        for i in range(n)
    )
    return Dataset(variables, rows)


def planted_pipeline_dataset(seed: int, n: int = 160) -> Dataset:
    """Three informative predictors (ordinal, nominal, numeric) plus two noise
    predictors (ordinal, numeric). The informative set is {ord1, nom1, num1}."""
    rng = np.random.default_rng(seed)
    o1 = _codes_with_all_categories(rng, n, 4)
    n1 = _codes_with_all_categories(rng, n, 3)
    o2 = _codes_with_all_categories(rng, n, 3)
    x1 = rng.normal(size=n)
    x2 = rng.normal(size=n)
    y = (
        np.array([0.0, 0.8, 1.6, 2.4])[o1]
        + np.array([0.0, 1.5, -1.0])[n1]
        + 1.2 * x1
        + rng.normal(scale=0.5, size=n)
    )
    A = tuple(LETTERS[:4])
    B = tuple(LETTERS[:3])
    variables = (
        Variable("ord1", "ordinal", A),
        Variable("nom1", "nominal", B),
        Variable("ord2", "ordinal", B),
        Variable("num1", "numeric"),
        Variable("num2", "numeric"),
        Variable("y", "numeric", role="dependent"),
    )
    rows = tuple(
        Observation(
            (A[o1[i]], B[n1[i]], B[o2[i]], float(x1[i]), float(x2[i]), float(y[i]))
        )
        for i in range(n)
    )
    return Dataset(variables, rows)


PLANTED_SET = {"ord1", "nom1", "num1"}


def assert_quantification_constraints(dataset: Dataset, fit, tol: float = 1e-9) -> None:
    """Every quantified categorical column must have mean ~0 and mean square ~1."""
    for name, mapping in fit.quantifications.categorical.items():
        labels = dataset.labels(name)
        values = np.array([mapping[lbl] for lbl in labels])
        assert abs(values.mean()) < tol, f"{name}: mean {values.mean()}"
        assert abs(np.mean(values**2) - 1.0) < tol, f"{name}: ms {np.mean(values**2)}"
    for name, (mean, scale) in fit.quantifications.numeric.items():
        col = (dataset.column(name) - mean) / scale
        assert abs(col.mean()) < tol
        assert abs(np.mean(col**2) - 1.0) < tol


def assert_ordinal_monotone(dataset: Dataset, fit) -> None:
    """Ordinal quantifications must be non-decreasing in declared category order."""
    for name, mapping in fit.quantifications.categorical.items():
        var = dataset.variable(name)
        if var.level != "ordinal":
            continue
        values = [mapping[c] for c in var.categories if c in mapping]
        for a, b in zip(values, values[1:]):
            assert a <= b, f"{name}: quantification not monotone ({values})"


def assert_trace_monotone(fit, tol: float = 1e-12) -> None:
    trace = fit.r2_trace
    for a, b in zip(trace, trace[1:]):
        assert b - a >= -tol, f"R^2 trace decreased: {a} -> {b}"
