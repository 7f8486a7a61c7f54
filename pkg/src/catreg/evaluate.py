"""Prediction-quality evaluation: MRE/MMRE, dummy-coded baseline, k-fold CV.

The magnitude of relative error of one prediction is |actual - predicted| /
actual, which requires a strictly positive actual. MMRE averages those over a
set of records. By default predictions made on the log scale are exponentiated
back to counts before the error is taken ("count" scale); "log" keeps the raw
scale and is flagged in every report.

Fold plans are deterministic: a seeded uniform shuffle followed by round-robin
assignment, so fold sizes differ by at most one and the same (n, k, seed)
always yields the same plan. Two methods share one plan in a comparison, and
test rows showing a category unseen in their training part are excluded from
scoring and counted per fold.

The baseline method dummy-codes categorical predictors (c-1 indicators against
the first declared category) and fits plain least squares; the contender runs
the full quantify-then-select pipeline per training fold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, population_standardize
from .errors import UnseenCategoryError, ValidationError
from .scaling import CatregConfig
from .stats import ols_fit
from .stepwise import StepwiseConfig

BASELINE = "dummy-ols"
CONTENDER = "catreg-stepwise"
METHODS = (BASELINE, CONTENDER)

COUNT_SCALE = "count"
LOG_SCALE = "log"
MRE_SCALES = (COUNT_SCALE, LOG_SCALE)


@dataclass(frozen=True)
class EvaluationRecord:
    """One scored prediction."""

    row_id: str
    actual: float
    predicted: float


def mre(actual: float, predicted: float) -> float:
    """Magnitude of relative error |actual - predicted| / actual (actual > 0)."""
    if not (actual > 0) or not math.isfinite(actual):
        raise ValidationError(f"mre requires a strictly positive actual, got {actual}")
    if not math.isfinite(predicted):
        raise ValidationError("mre requires a finite prediction")
    return abs(actual - predicted) / actual


def mmre(records) -> float:
    """Mean MRE over evaluation records (non-empty)."""
    records = list(records)
    if not records:
        raise ValidationError("mmre requires at least one record")
    return float(np.mean([mre(r.actual, r.predicted) for r in records]))


@dataclass(frozen=True)
class MethodConfigs:
    """Settings shared by both evaluation methods.

    catreg/stepwise/max_rounds configure the contender pipeline; mre_scale
    controls whether errors are taken on back-transformed counts (default) or
    on the raw log scale.
    """

    catreg: CatregConfig = CatregConfig()
    stepwise: StepwiseConfig = StepwiseConfig()
    max_rounds: int = 10
    mre_scale: str = COUNT_SCALE

    def __post_init__(self):
        if self.mre_scale not in MRE_SCALES:
            raise ValidationError(f"mre_scale must be one of {MRE_SCALES}")
        if self.max_rounds < 1:
            raise ValidationError("max_rounds must be >= 1")


@dataclass(frozen=True)
class FoldPlan:
    """Deterministic assignment of each row index to a fold in 0..k-1."""

    k: int
    seed: int
    assignment: tuple[int, ...]

    def fold_indices(self, fold: int) -> tuple[list[int], list[int]]:
        """(train_indices, test_indices) for one fold."""
        if not (0 <= fold < self.k):
            raise ValidationError(f"fold must lie in [0, {self.k})")
        train = [i for i, a in enumerate(self.assignment) if a != fold]
        test = [i for i, a in enumerate(self.assignment) if a == fold]
        return train, test


def fold_plan(n: int, k: int, seed: int) -> FoldPlan:
    """Shuffle row indices with the seed, then deal them round-robin into k folds."""
    if n < 2:
        raise ValidationError("fold_plan requires n >= 2")
    if not (2 <= k <= n):
        raise ValidationError(f"k must satisfy 2 <= k <= n (k={k}, n={n})")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignment = np.empty(n, dtype=int)
    for pos, row in enumerate(perm):
        assignment[row] = pos % k
    return FoldPlan(k=k, seed=seed, assignment=tuple(int(a) for a in assignment))


@dataclass(frozen=True)
class DummyDesign:
    """Dummy-coded design: c-1 indicators per categorical (first declared
    observed category as reference), numeric columns standardized."""

    variables: tuple[str, ...]
    names: tuple[str, ...]
    matrix: np.ndarray
    categorical_levels: dict
    numeric_scaling: dict

    def row_vector(self, values) -> np.ndarray | None:
        """Encode one row ({variable -> raw value}); None if a category is unseen."""
        parts: list[float] = []
        for var in self.variables:
            if var in self.categorical_levels:
                observed = self.categorical_levels[var]
                label = values[var]
                if label not in observed:
                    return None
                parts.extend(1.0 if label == cat else 0.0 for cat in observed[1:])
            else:
                mean, scale = self.numeric_scaling[var]
                parts.append((float(values[var]) - mean) / scale)
        return np.array(parts, dtype=float)


def dummy_design(dataset: Dataset, predictors=None) -> DummyDesign:
    """Build the dummy-coded design matrix for the dataset's predictors."""
    names = list(predictors) if predictors is not None else [v.name for v in dataset.predictors]
    if not names:
        raise ValidationError("dummy_design needs at least one predictor")
    col_names: list[str] = []
    col_arrays: list[np.ndarray] = []
    categorical_levels: dict = {}
    numeric_scaling: dict = {}
    for name in names:
        var = dataset.variable(name)
        if var.is_categorical:
            codes, observed = dataset.codes(name)
            if len(observed) < 2:
                raise ValidationError(
                    f"categorical predictor '{name}' has a single observed category"
                )
            categorical_levels[name] = observed
            for k, cat in enumerate(observed[1:], start=1):
                col_names.append(f"{name}={cat}")
                col_arrays.append((codes == k).astype(float))
        else:
            x, mean, scale = population_standardize(dataset.column(name))
            numeric_scaling[name] = (mean, scale)
            col_names.append(name)
            col_arrays.append(x)
    return DummyDesign(
        variables=tuple(names),
        names=tuple(col_names),
        matrix=np.column_stack(col_arrays),
        categorical_levels=categorical_levels,
        numeric_scaling=numeric_scaling,
    )


@dataclass(frozen=True)
class FoldOutcome:
    """Scores for one fold of one method."""

    fold: int
    n_train: int
    n_test: int
    n_excluded: int
    mmre_value: float
    note: str = ""


@dataclass(frozen=True)
class MethodEvaluation:
    """Per-fold MMRE for one method under one fold plan."""

    method: str
    k: int
    seed: int
    mre_scale: str
    plan: FoldPlan
    folds: tuple[FoldOutcome, ...]
    average: float

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "seed": self.seed,
            "mre_scale": self.mre_scale,
            "folds": [
                {
                    "fold": f.fold + 1,
                    "n_train": f.n_train,
                    "n_test": f.n_test,
                    "excluded": f.n_excluded,
                    "mmre": f.mmre_value,
                    "note": f.note,
                }
                for f in self.folds
            ],
            "average_mmre": self.average,
        }


def _dummy_fitter(train: Dataset, full: Dataset, configs: MethodConfigs):
    dep = full.dependent.name
    design = dummy_design(train)
    fit = ols_fit(design.matrix, train.column(dep), intercept=True, names=design.names)

    def predict_row(i: int):
        values = {name: full.value(i, name) for name in design.variables}
        vec = design.row_vector(values)
        if vec is None:
            return None
        return fit.intercept + float(vec @ fit.coef)

    return predict_row, ""


def _contender_fitter(train: Dataset, full: Dataset, configs: MethodConfigs):
    # imported here: pipeline depends on this module for reporting types
    from .pipeline import run_pipeline

    dep = full.dependent.name
    result = run_pipeline(
        train,
        catreg_config=configs.catreg,
        stepwise_config=configs.stepwise,
        max_rounds=configs.max_rounds,
    )
    if result.model is None:
        fallback = float(train.column(dep).mean())
        return (lambda i: fallback), "empty selection; intercept-only fallback"
    model = result.model

    def predict_row(i: int):
        values = {mv.name: full.value(i, mv.name) for mv in model.variables}
        try:
            return model.linear_estimate(values)
        except UnseenCategoryError:
            return None

    return predict_row, ""


_FITTERS = {BASELINE: _dummy_fitter, CONTENDER: _contender_fitter}


def crossval(
    dataset: Dataset,
    k: int,
    seed: int,
    method: str,
    configs: MethodConfigs | None = None,
) -> MethodEvaluation:
    """Evaluate one method under the deterministic k-fold plan for (n, k, seed).

    Preconditions follow from the method itself: every training part must be
    fittable (enough rows, enough observed categories). Test rows whose
    category never occurs in their training part are excluded and counted.
    """
    configs = configs or MethodConfigs()
    if method not in METHODS:
        raise ValidationError(f"method must be one of {METHODS}, got {method!r}")
    plan = fold_plan(dataset.n, k, seed)
    dep = dataset.dependent.name
    y = dataset.column(dep)
    outcomes: list[FoldOutcome] = []
    for fold in range(k):
        train_idx, test_idx = plan.fold_indices(fold)
        train = dataset.subset(train_idx)
        predict_row, note = _FITTERS[method](train, dataset, configs)
        records: list[EvaluationRecord] = []
        excluded = 0
        for i in test_idx:
            estimate = predict_row(i)
            if estimate is None:
                excluded += 1
                continue
            if configs.mre_scale == COUNT_SCALE:
                records.append(
                    EvaluationRecord(dataset.row_id(i), math.exp(y[i]), math.exp(estimate))
                )
            else:
                records.append(EvaluationRecord(dataset.row_id(i), float(y[i]), estimate))
        if not records:
            raise ValidationError(
                f"fold {fold + 1}: every test row was excluded; nothing to score"
            )
        outcomes.append(
            FoldOutcome(
                fold=fold,
                n_train=len(train_idx),
                n_test=len(test_idx),
                n_excluded=excluded,
                mmre_value=mmre(records),
                note=note,
            )
        )
    average = float(np.mean([f.mmre_value for f in outcomes]))
    return MethodEvaluation(
        method=method,
        k=k,
        seed=seed,
        mre_scale=configs.mre_scale,
        plan=plan,
        folds=tuple(outcomes),
        average=average,
    )


@dataclass(frozen=True)
class EvaluationReport:
    """Paired per-fold comparison of the two methods under one fold plan.

    improvement is baseline minus contender, per fold and on the averages;
    excluded counts are reported per method and fold.
    """

    k: int
    seed: int
    mre_scale: str
    baseline: tuple[float, ...]
    contender: tuple[float, ...]
    improvement: tuple[float, ...]
    baseline_avg: float
    contender_avg: float
    improvement_avg: float
    baseline_excluded: tuple[int, ...]
    contender_excluded: tuple[int, ...]
    notes: tuple[str, ...] = ()

    @classmethod
    def from_fold_mmres(
        cls,
        baseline,
        contender,
        k: int | None = None,
        seed: int = 0,
        mre_scale: str = COUNT_SCALE,
        baseline_excluded=None,
        contender_excluded=None,
        notes=(),
    ) -> "EvaluationReport":
        baseline = tuple(float(v) for v in baseline)
        contender = tuple(float(v) for v in contender)
        if len(baseline) != len(contender) or not baseline:
            raise ValidationError("per-fold MMRE lists must be non-empty and paired")
        improvement = tuple(b - m for b, m in zip(baseline, contender))
        return cls(
            k=k if k is not None else len(baseline),
            seed=seed,
            mre_scale=mre_scale,
            baseline=baseline,
            contender=contender,
            improvement=improvement,
            baseline_avg=float(np.mean(baseline)),
            contender_avg=float(np.mean(contender)),
            improvement_avg=float(np.mean(improvement)),
            baseline_excluded=tuple(baseline_excluded or (0,) * len(baseline)),
            contender_excluded=tuple(contender_excluded or (0,) * len(contender)),
            notes=tuple(notes),
        )

    @classmethod
    def from_methods(
        cls, baseline: MethodEvaluation, contender: MethodEvaluation
    ) -> "EvaluationReport":
        if baseline.plan != contender.plan:
            raise ValidationError("paired comparison requires one shared fold plan")
        notes = []
        for src in (baseline, contender):
            for f in src.folds:
                if f.note:
                    notes.append(f"{src.method} fold {f.fold + 1}: {f.note}")
        return cls.from_fold_mmres(
            [f.mmre_value for f in baseline.folds],
            [f.mmre_value for f in contender.folds],
            k=baseline.k,
            seed=baseline.seed,
            mre_scale=baseline.mre_scale,
            baseline_excluded=[f.n_excluded for f in baseline.folds],
            contender_excluded=[f.n_excluded for f in contender.folds],
            notes=notes,
        )

    def as_dict(self) -> dict:
        folds = []
        for i in range(len(self.baseline)):
            folds.append(
                {
                    "fold": i + 1,
                    BASELINE: self.baseline[i],
                    CONTENDER: self.contender[i],
                    "improvement": self.improvement[i],
                    "excluded": {
                        BASELINE: self.baseline_excluded[i],
                        CONTENDER: self.contender_excluded[i],
                    },
                }
            )
        return {
            "k": self.k,
            "seed": self.seed,
            "mre_scale": self.mre_scale,
            "folds": folds,
            "average": {
                BASELINE: self.baseline_avg,
                CONTENDER: self.contender_avg,
                "improvement": self.improvement_avg,
            },
            "notes": list(self.notes),
        }

    def as_table(self) -> str:
        """Aligned text table: one row per fold plus the average row."""
        header = ["fold", BASELINE, CONTENDER, "improvement"]
        rows = []
        for i in range(len(self.baseline)):
            rows.append(
                [
                    str(i + 1),
                    f"{self.baseline[i]:.4f}",
                    f"{self.contender[i]:.4f}",
                    f"{self.improvement[i]:.4f}",
                ]
            )
        rows.append(
            [
                "average",
                f"{self.baseline_avg:.4f}",
                f"{self.contender_avg:.4f}",
                f"{self.improvement_avg:.4f}",
            ]
        )
        widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))]
        lines = [
            f"MMRE by fold ({self.mre_scale} scale, k={self.k}, seed={self.seed})",
            "  ".join(h.ljust(widths[c]) for c, h in enumerate(header)),
        ]
        for r in rows:
            lines.append("  ".join(r[c].ljust(widths[c]) for c in range(len(header))))
        excluded_total = sum(self.baseline_excluded) + sum(self.contender_excluded)
        if excluded_total:
            lines.append(
                f"excluded rows (unseen categories): {BASELINE} "
                f"{sum(self.baseline_excluded)}, {CONTENDER} {sum(self.contender_excluded)}"
            )
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)
