"""Functional quantile autocorrelation (FQA) white-noise tests for functional time series."""

from .core import CurveMatrix, EvalGrid, ValidationError, load_csv, log_returns, save_csv, validate
from .dgp import Contamination, ScenarioSpec, contaminate, generate
from .fqa import (
    DEFAULT_LEVELS,
    DegenerateCellError,
    FqaGrid,
    FqaParams,
    FqaVector,
    fqa_hat,
    fqa_vector,
    joint_prob,
    marginal_prob,
    omnibus_stat,
)
from .harness import (
    ExperimentReport,
    ExperimentSpec,
    run_data_test,
    run_power,
    run_size,
    shuffle_series,
    time_pipeline,
)
from .inference import (
    NullSpec,
    SummandMatrix,
    TestResult,
    eigenvalues,
    estimate_omega,
    fixed_cell_test,
    indicator_summands,
    mc_null_sample,
    omnibus_test,
)
from .kernels import BACKEND
from .quantiles import (
    ExcursionTable,
    QuantileCurveSet,
    ecdf_at,
    excursion_fraction,
    excursion_table,
    quantile_curves,
)

__version__ = "0.1.0"
