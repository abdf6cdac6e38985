"""The forecasting comparison: baseline statistical inputs vs. KG-guided inputs.

For every target and horizon both models get their own design matrix, penalty
selection, fit and test-set evaluation on a shared chronological test block;
the Diebold-Mariano test compares their per-period losses.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ..kgraph import KnowledgeGraph
from .design import ForecastTask, build_design_matrix, kg_feature_set
from .lasso import default_lambda_grid, fit_lasso, select_lambda
from .metrics import dm_test, evaluate, percentage_loss, squared_loss
from .panel import TimeSeriesPanel

__all__ = ["TargetSpec", "ExperimentConfig", "ModelResult", "HorizonResult",
           "ForecastReport", "run_experiment", "write_report", "plot_report"]


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class TargetSpec:
    name: str  # report label
    baseline_column: str  # target column in the baseline panel
    kg_entity: str  # node name in the knowledge graph
    kg_column: str | None = None  # target column in the KG panel; defaults to baseline_column

    @property
    def kg_target_column(self) -> str:
        return self.kg_column or self.baseline_column


@dataclass
class ExperimentConfig:
    targets: list[TargetSpec]
    horizons: list[int] = field(default_factory=lambda: list(range(1, 13)))
    lag_window: int = 3
    test_fraction: float = 0.2
    hops: int = 1
    lambda_grid_size: int = 50
    lambda_min_ratio: float = 1e-3
    n_folds: int = 5
    dm_loss: str = "squared"  # squared | percentage
    seed: int = 0
    dummy_columns: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.targets:
            raise ValueError("no targets configured")
        if any(not 1 <= h <= 12 for h in self.horizons):
            raise ValueError("horizons must lie in 1..12")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.dm_loss not in ("squared", "percentage"):
            raise ValueError(f"unknown dm_loss {self.dm_loss!r}")

    def settings(self) -> dict:
        return {
            "horizons": self.horizons,
            "lag_window": self.lag_window,
            "test_fraction": self.test_fraction,
            "hops": self.hops,
            "lambda_grid_size": self.lambda_grid_size,
            "lambda_min_ratio": self.lambda_min_ratio,
            "n_folds": self.n_folds,
            "dm_loss": self.dm_loss,
            "seed": self.seed,
            "dummy_columns": self.dummy_columns,
        }


@dataclass
class ModelResult:
    mape: float
    rmse: float
    lam: float
    selected_features: list[str]
    predictions: list[float]
    actuals: list[float]
    test_months: list[str]


@dataclass
class HorizonResult:
    target: str
    horizon: int
    baseline: ModelResult
    kg: ModelResult
    dm_statistic: float
    dm_p_value: float


@dataclass
class ForecastReport:
    results: list[HorizonResult]
    settings: dict

    def rows(self) -> list[dict]:
        out = []
        for r in self.results:
            for model, m in (("baseline", r.baseline), ("kg", r.kg)):
                out.append({
                    "target": r.target,
                    "horizon": r.horizon,
                    "model": model,
                    "mape": m.mape,
                    "rmse": m.rmse,
                    "dm_p": r.dm_p_value,
                })
        return out


def _standardize_mask(columns: list[str], dummy_columns: list[str]) -> np.ndarray:
    dummies = set(dummy_columns)
    return np.array([c.split("@", 1)[0] not in dummies for c in columns])


def _fit_and_evaluate(design, n_test: int, config: ExperimentConfig) -> ModelResult:
    mask = _standardize_mask(design.columns, config.dummy_columns)
    X_train, y_train = design.X[:-n_test], design.y[:-n_test]
    X_test, y_test = design.X[-n_test:], design.y[-n_test:]
    grid = default_lambda_grid(
        X_train, y_train,
        size=config.lambda_grid_size,
        min_ratio=config.lambda_min_ratio,
        standardize_mask=mask,
    )
    lam = select_lambda(X_train, y_train, grid, n_folds=config.n_folds,
                        standardize_mask=mask)
    fit = fit_lasso(X_train, y_train, lam, standardize_mask=mask)
    predictions = fit.predict(X_test)
    test_months = design.target_months[-n_test:]
    mape, rmse = evaluate(predictions, y_test, months=test_months)
    selected = [design.columns[j] for j in fit.active_set]
    return ModelResult(
        mape=mape,
        rmse=rmse,
        lam=lam,
        selected_features=selected,
        predictions=[float(v) for v in predictions],
        actuals=[float(v) for v in y_test],
        test_months=test_months,
    )


def run_experiment(
    config: ExperimentConfig,
    baseline_panel: TimeSeriesPanel,
    kg_panel: TimeSeriesPanel,
    graph: KnowledgeGraph,
    name_map: dict[str, list[str]],
) -> ForecastReport:
    """Fit both models per (target, horizon) and compare them with the DM test.

    Both models are restricted to the forecast origins usable by each, and the
    test block is the shared chronological tail.
    """
    results: list[HorizonResult] = []
    for target in config.targets:
        baseline_features = tuple(baseline_panel.columns)
        kg_features = tuple(kg_feature_set(
            graph, target.kg_entity, kg_panel, name_map, hops=config.hops))
        for horizon in config.horizons:
            try:
                base_design = build_design_matrix(baseline_panel, ForecastTask(
                    target=target.baseline_column, horizon=horizon,
                    features=baseline_features, lag_window=config.lag_window))
                kg_design = build_design_matrix(kg_panel, ForecastTask(
                    target=target.kg_target_column, horizon=horizon,
                    features=kg_features, lag_window=config.lag_window))

                common = sorted(set(base_design.row_months) & set(kg_design.row_months))
                if not common:
                    raise ExperimentError("no shared forecast origins")
                base_keep = [i for i, m in enumerate(base_design.row_months) if m in set(common)]
                kg_keep = [i for i, m in enumerate(kg_design.row_months) if m in set(common)]
                base_design.X = base_design.X[base_keep]
                base_design.y = base_design.y[base_keep]
                base_design.row_months = [base_design.row_months[i] for i in base_keep]
                base_design.target_months = [base_design.target_months[i] for i in base_keep]
                kg_design.X = kg_design.X[kg_keep]
                kg_design.y = kg_design.y[kg_keep]
                kg_design.row_months = [kg_design.row_months[i] for i in kg_keep]
                kg_design.target_months = [kg_design.target_months[i] for i in kg_keep]

                n = len(common)
                n_test = max(1, int(round(config.test_fraction * n)))
                if n_test >= n:
                    raise ExperimentError(f"not enough rows to split: {n}")

                base_result = _fit_and_evaluate(base_design, n_test, config)
                kg_result = _fit_and_evaluate(kg_design, n_test, config)

                loss = squared_loss if config.dm_loss == "squared" else percentage_loss
                loss_base = loss(base_result.predictions, base_result.actuals)
                loss_kg = loss(kg_result.predictions, kg_result.actuals)
                statistic, p_value = dm_test(loss_base, loss_kg, horizon=horizon)
            except Exception as exc:
                raise ExperimentError(
                    f"target {target.name!r}, horizon {horizon}: {exc}"
                ) from exc
            results.append(HorizonResult(
                target=target.name,
                horizon=horizon,
                baseline=base_result,
                kg=kg_result,
                dm_statistic=statistic,
                dm_p_value=p_value,
            ))
    return ForecastReport(results=results, settings=config.settings())


def write_report(report: ForecastReport, out_dir) -> list[str]:
    """Write report.csv and report.json; returns the paths written."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "report.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["target", "horizon", "model",
                                                "mape", "rmse", "dm_p"])
        writer.writeheader()
        for row in report.rows():
            writer.writerow(row)

    json_path = os.path.join(out_dir, "report.json")
    payload = {
        "settings": report.settings,
        "results": [
            {
                "target": r.target,
                "horizon": r.horizon,
                "dm_statistic": r.dm_statistic,
                "dm_p_value": r.dm_p_value,
                "baseline": {
                    "mape": r.baseline.mape, "rmse": r.baseline.rmse,
                    "lambda": r.baseline.lam,
                    "selected_features": r.baseline.selected_features,
                    "test_months": r.baseline.test_months,
                    "predictions": r.baseline.predictions,
                    "actuals": r.baseline.actuals,
                },
                "kg": {
                    "mape": r.kg.mape, "rmse": r.kg.rmse,
                    "lambda": r.kg.lam,
                    "selected_features": r.kg.selected_features,
                    "test_months": r.kg.test_months,
                    "predictions": r.kg.predictions,
                    "actuals": r.kg.actuals,
                },
            }
            for r in report.results
        ],
    }
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [csv_path, json_path]


def plot_report(report: ForecastReport, out_dir) -> list[str]:
    """Per-target error curves over horizons, MAPE left and RMSE right."""
    import os

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    targets = sorted({r.target for r in report.results})
    for target in targets:
        rows = sorted((r for r in report.results if r.target == target),
                      key=lambda r: r.horizon)
        horizons = [r.horizon for r in rows]
        fig, (ax_mape, ax_rmse) = plt.subplots(1, 2, figsize=(10, 4))
        ax_mape.plot(horizons, [r.baseline.mape for r in rows], "o-", label="baseline")
        ax_mape.plot(horizons, [r.kg.mape for r in rows], "s-", label="kg")
        ax_mape.set_xlabel("months ahead")
        ax_mape.set_ylabel("MAPE (%)")
        ax_mape.set_title(f"MAPE: {target}")
        ax_mape.legend()
        ax_rmse.plot(horizons, [r.baseline.rmse for r in rows], "o-", label="baseline")
        ax_rmse.plot(horizons, [r.kg.rmse for r in rows], "s-", label="kg")
        ax_rmse.set_xlabel("months ahead")
        ax_rmse.set_ylabel("RMSE")
        ax_rmse.set_title(f"RMSE: {target}")
        ax_rmse.legend()
        fig.tight_layout()
        safe = "".join(c if c.isalnum() else "_" for c in target)
        path = os.path.join(out_dir, f"errors_{safe}.png")
        fig.savefig(path, dpi=100, metadata={"Software": "econkg"})
        plt.close(fig)
        paths.append(path)
    return paths
