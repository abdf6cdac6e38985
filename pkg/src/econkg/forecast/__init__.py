"""Multi-horizon forecasting with Lasso variable selection.

Baseline models draw on a fixed statistical panel; knowledge-graph models draw
on the variables linked to the target in the graph. Each horizon gets its own
direct model regressing the future target on a lag window of the inputs.
"""

from .panel import TimeSeriesPanel, PanelError, load_panel
from .design import ForecastTask, DesignMatrix, build_design_matrix, kg_feature_set, load_alias_map
from .lasso import LassoFit, fit_lasso, lambda_max, default_lambda_grid, select_lambda
from .metrics import evaluate, dm_test
from .experiment import (
    TargetSpec,
    ExperimentConfig,
    ForecastReport,
    plot_report,
    run_experiment,
    write_report,
)

__all__ = [
    "TimeSeriesPanel", "PanelError", "load_panel",
    "ForecastTask", "DesignMatrix", "build_design_matrix", "kg_feature_set", "load_alias_map",
    "LassoFit", "fit_lasso", "lambda_max", "default_lambda_grid", "select_lambda",
    "evaluate", "dm_test",
    "TargetSpec", "ExperimentConfig", "ForecastReport", "plot_report",
    "run_experiment", "write_report",
]
