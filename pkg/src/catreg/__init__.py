"""Optimal-scaling categorical regression with stepwise selection and
cross-validated MMRE benchmarking against a dummy-coded baseline."""

from .data import (
    DEPENDENT,
    NOMINAL,
    NUMERIC,
    ORDINAL,
    PREDICTOR,
    Dataset,
    Observation,
    QuantificationMap,
    Variable,
    column_as_quantified,
    dataset_from_json,
    dataset_to_json,
    load_dataset,
    population_standardize,
    save_dataset,
)
from .errors import CatregError, NumericalError, UnseenCategoryError, ValidationError
from .evaluate import (
    BASELINE,
    CONTENDER,
    DummyDesign,
    EvaluationRecord,
    EvaluationReport,
    FoldPlan,
    MethodConfigs,
    MethodEvaluation,
    crossval,
    dummy_design,
    fold_plan,
    mmre,
    mre,
)
from .ingest import (
    GearingTable,
    QuestionnaireSchema,
    apply_backfire,
    backfire,
    filter_rows,
    ingest_dataset,
    load_gearing,
    load_responses,
    load_schema,
    log_transform,
)
from .pipeline import (
    PipelineResult,
    RoundRecord,
    SerializedModel,
    compare_baseline,
    load_model,
    predict,
    run_pipeline,
    save_model,
)
from .scaling import CatregConfig, CatregFit, catreg_fit, pava
from .stats import OlsFit, adjusted_r2, ols_fit, pearson_r, reg_inc_beta, t_pvalue
from .stepwise import StepwiseConfig, StepwiseEvent, StepwiseTrace, stepwise_fit

__version__ = "0.1.0"

__all__ = [
    "BASELINE",
    "CONTENDER",
    "CatregConfig",
    "CatregError",
    "CatregFit",
    "Dataset",
    "DEPENDENT",
    "DummyDesign",
    "EvaluationRecord",
    "EvaluationReport",
    "FoldPlan",
    "GearingTable",
    "MethodConfigs",
    "MethodEvaluation",
    "NOMINAL",
    "NUMERIC",
    "NumericalError",
    "Observation",
    "OlsFit",
    "ORDINAL",
    "PipelineResult",
    "PREDICTOR",
    "QuantificationMap",
    "QuestionnaireSchema",
    "RoundRecord",
    "SerializedModel",
    "StepwiseConfig",
    "StepwiseEvent",
    "StepwiseTrace",
    "UnseenCategoryError",
    "ValidationError",
    "Variable",
    "adjusted_r2",
    "apply_backfire",
    "backfire",
    "catreg_fit",
    "column_as_quantified",
    "compare_baseline",
    "crossval",
    "dataset_from_json",
    "dataset_to_json",
    "dummy_design",
    "filter_rows",
    "fold_plan",
    "ingest_dataset",
    "load_dataset",
    "load_gearing",
    "load_model",
    "load_responses",
    "load_schema",
    "log_transform",
    "mmre",
    "mre",
    "ols_fit",
    "pava",
    "pearson_r",
    "population_standardize",
    "predict",
    "reg_inc_beta",
    "run_pipeline",
    "save_dataset",
    "save_model",
    "stepwise_fit",
    "t_pvalue",
]
