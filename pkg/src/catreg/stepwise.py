"""Stepwise linear regression gated by coefficient p-values.

Each step first tries to enter the best not-yet-included candidate: every
candidate is fitted alongside the current set, and the one with the smallest
coefficient p-value enters if that p-value is below alpha_enter (ties broken
by declared column order). The step then removes, one at a time, the included
variable with the largest p-value while it exceeds alpha_remove. Steps repeat
until a full step changes nothing or max_steps is hit. alpha_enter must not
exceed alpha_remove, which rules out enter/remove cycling.

Candidates whose augmented fit is impossible (rank-deficient design, or too
few rows) are skipped for that step and noted in the diagnostics. The trace
records every entry and removal with its triggering p-value; the reported
final fit is recomputed from scratch on the selected columns so it can be
audited independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .stats import OlsFit, ols_fit

ENTERED = "entered"
REMOVED = "removed"


@dataclass(frozen=True)
class StepwiseConfig:
    """Entry/removal thresholds and the step budget.

    max_steps defaults to twice the number of candidate columns when None.
    Requires 0 < alpha_enter <= alpha_remove < 1.
    """

    alpha_enter: float = 0.05
    alpha_remove: float = 0.10
    max_steps: int | None = None

    def __post_init__(self):
        if not (0.0 < self.alpha_enter < 1.0) or not (0.0 < self.alpha_remove < 1.0):
            raise ValidationError("alpha thresholds must lie strictly between 0 and 1")
        if self.alpha_enter > self.alpha_remove:
            raise ValidationError(
                "alpha_enter must not exceed alpha_remove (prevents enter/remove cycling)"
            )
        if self.max_steps is not None and self.max_steps < 1:
            raise ValidationError("max_steps must be >= 1 when given")


@dataclass(frozen=True)
class StepwiseEvent:
    """One audited action: which variable entered or left at which step, and why."""

    step: int
    variable: str
    action: str
    pvalue: float


@dataclass(frozen=True)
class StepwiseTrace:
    """Full audit of a stepwise run.

    selected preserves entry order (minus removals). fit is None when nothing
    survived selection.
    """

    events: tuple[StepwiseEvent, ...]
    selected: tuple[str, ...]
    fit: OlsFit | None
    diagnostics: tuple[str, ...]


def _fit_or_none(columns, names, y, diagnostics, step, context):
    try:
        design = np.column_stack([columns[name] for name in names])
        return ols_fit(design, y, intercept=True, names=names)
    except (NumericalError, ValidationError) as exc:
        diagnostics.append(f"step {step}: {context} skipped ({exc})")
        return None


def stepwise_fit(columns, response, config: StepwiseConfig | None = None) -> StepwiseTrace:
    """Run p-value-gated stepwise selection over named columns.

    columns: ordered mapping of name -> 1-d numeric array (insertion order is
    the declared order used for tie-breaking). response: 1-d numeric array of
    the same length.
    """
    cfg = config or StepwiseConfig()
    if not columns:
        raise ValidationError("stepwise_fit needs at least one candidate column")
    names = list(columns.keys())
    y = np.asarray(response, dtype=float)
    if y.ndim != 1:
        raise ValidationError("response must be a 1-d array")
    cols: dict[str, np.ndarray] = {}
    for name in names:
        arr = np.asarray(columns[name], dtype=float)
        if arr.ndim != 1 or arr.size != y.size:
            raise ValidationError(
                f"column '{name}' must be 1-d and match the response length"
            )
        cols[name] = arr
    max_steps = cfg.max_steps if cfg.max_steps is not None else 2 * len(names)

    included: list[str] = []
    events: list[StepwiseEvent] = []
    diagnostics: list[str] = []

    for step in range(1, max_steps + 1):
        changed = False

        # entry phase: best candidate by smallest coefficient p-value,
        # declared order breaking ties
        best_name = None
        best_p = None
        for name in names:
            if name in included:
                continue
            fit = _fit_or_none(
                cols, included + [name], y, diagnostics, step, f"candidate '{name}'"
            )
            if fit is None:
                continue
            p = float(fit.pvalue[-1])
            if best_p is None or p < best_p:
                best_p = p
                best_name = name
        if best_name is not None and best_p < cfg.alpha_enter:
            included.append(best_name)
            events.append(StepwiseEvent(step, best_name, ENTERED, best_p))
            changed = True

        # removal phase: repeatedly drop the worst offender above alpha_remove
        while included:
            fit = _fit_or_none(cols, included, y, diagnostics, step, "included set")
            if fit is None:
                # the included set itself became unfittable; undo nothing,
                # surface the problem instead of silently continuing
                raise NumericalError(
                    f"step {step}: the included set {included} cannot be fitted"
                )
            worst_idx = None
            worst_p = None
            # scan in declared column order so p-value ties resolve deterministically
            for idx in sorted(range(len(included)), key=lambda i: names.index(included[i])):
                p = float(fit.pvalue[idx])
                if worst_p is None or p > worst_p:
                    worst_p = p
                    worst_idx = idx
            if worst_p is not None and worst_p > cfg.alpha_remove:
                name = included.pop(worst_idx)
                events.append(StepwiseEvent(step, name, REMOVED, worst_p))
                changed = True
            else:
                break

        if not changed:
            break

    final_fit = None
    if included:
        design = np.column_stack([cols[name] for name in included])
        final_fit = ols_fit(design, y, intercept=True, names=included)
    return StepwiseTrace(
        events=tuple(events),
        selected=tuple(included),
        fit=final_fit,
        diagnostics=tuple(diagnostics),
    )
