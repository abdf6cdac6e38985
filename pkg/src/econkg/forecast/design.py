"""Direct multi-horizon design matrices and KG-guided feature selection.

For horizon ``i`` every usable forecast origin t contributes one row holding
the lag window values x[t-L..t] of each feature, with target value y[t+i].
Rows never touch data after t on the input side, so there is no leakage by
construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..kgraph import KnowledgeGraph, linked_variables
from .panel import PanelError, TimeSeriesPanel

__all__ = ["ForecastTask", "DesignMatrix", "build_design_matrix",
           "kg_feature_set", "load_alias_map"]


@dataclass(frozen=True)
class ForecastTask:
    target: str
    horizon: int
    features: tuple[str, ...]
    lag_window: int = 3  # window covers t-lag_window .. t

    def __post_init__(self):
        if not 1 <= self.horizon <= 12:
            raise ValueError(f"horizon {self.horizon} outside 1..12")
        if self.lag_window < 0:
            raise ValueError("lag_window must be >= 0")
        if not self.features:
            raise ValueError("feature list is empty")


@dataclass
class DesignMatrix:
    X: np.ndarray  # (rows, len(features) * (lag_window + 1))
    y: np.ndarray
    row_months: list[str]  # forecast origin t per row
    target_months: list[str]  # month being predicted, t + horizon
    columns: list[str]  # "<feature>@t-3" ... "<feature>@t-0"
    lag_offsets: list[int] = field(default_factory=list)  # per column, <= 0

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


def build_design_matrix(panel: TimeSeriesPanel, task: ForecastTask) -> DesignMatrix:
    """Rows are forecast origins where the whole lag window and y[t+i] exist."""
    for name in (task.target, *task.features):
        if name not in panel.columns:
            raise PanelError(f"column {name!r} not in panel")
    L = task.lag_window
    horizon = task.horizon
    target = panel.column(task.target)
    feature_values = [panel.column(f) for f in task.features]

    columns: list[str] = []
    offsets: list[int] = []
    for feature in task.features:
        for lag in range(L, -1, -1):
            columns.append(f"{feature}@t-{lag}")
            offsets.append(-lag)

    rows: list[list[float]] = []
    y: list[float] = []
    row_months: list[str] = []
    target_months: list[str] = []
    for t in range(L, panel.n_months - horizon):
        window_ok = all(
            np.all(np.isfinite(values[t - L : t + 1])) for values in feature_values
        )
        if not window_ok or not np.isfinite(target[t + horizon]):
            continue
        row: list[float] = []
        for values in feature_values:
            row.extend(float(values[t - lag]) for lag in range(L, -1, -1))
        rows.append(row)
        y.append(float(target[t + horizon]))
        row_months.append(panel.months[t])
        target_months.append(panel.months[t + horizon])
    if not rows:
        raise PanelError(
            f"no usable rows for target {task.target!r} at horizon {horizon}"
        )
    return DesignMatrix(
        X=np.array(rows),
        y=np.array(y),
        row_months=row_months,
        target_months=target_months,
        columns=columns,
        lag_offsets=offsets,
    )


def load_alias_map(path) -> dict[str, list[str]]:
    """entity,column CSV -> entity name to panel column names (order preserved)."""
    mapping: dict[str, list[str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "entity" not in reader.fieldnames \
                or "column" not in reader.fieldnames:
            raise ValueError(f"{path}: expected 'entity,column' header")
        for row in reader:
            entity = (row.get("entity") or "").strip()
            column = (row.get("column") or "").strip()
            if not entity or not column:
                continue
            mapping.setdefault(entity, [])
            if column not in mapping[entity]:
                mapping[entity].append(column)
    return mapping


def kg_feature_set(
    graph: KnowledgeGraph,
    target: str,
    panel: TimeSeriesPanel,
    name_map: dict[str, list[str]],
    hops: int = 1,
) -> list[str]:
    """Panel columns for the KG model: target history plus linked variables.

    Linked entities map to panel columns through the alias table; only columns
    observed over the whole panel are kept (the target's own column is always
    included). Order: target columns first, then linked entities in hop order.
    """
    target_columns = [c for c in name_map.get(target, []) if c in panel.columns]
    if not target_columns:
        raise PanelError(f"target {target!r} maps to no panel column")
    selected = list(target_columns)
    for entity in linked_variables(graph, target, hops):
        for column in name_map.get(entity, []):
            if column in panel.columns and column not in selected \
                    and panel.fully_observed(column):
                selected.append(column)
    return selected
