"""Monthly time-series panel: aligned named columns over a contiguous month range."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = ["PanelError", "TimeSeriesPanel", "load_panel", "month_ordinal"]

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


class PanelError(ValueError):
    pass


def month_ordinal(month: str) -> int:
    """YYYY-MM -> months since year 0; raises on malformed input."""
    m = _MONTH_RE.match(month)
    if not m:
        raise PanelError(f"bad month {month!r}: expected YYYY-MM")
    year, mon = int(m.group(1)), int(m.group(2))
    if not 1 <= mon <= 12:
        raise PanelError(f"bad month {month!r}: month out of range")
    return year * 12 + (mon - 1)


@dataclass
class TimeSeriesPanel:
    """Missing values are explicit NaN slots; months are gap-free."""

    months: list[str]
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        ordinals = [month_ordinal(m) for m in self.months]
        for prev, cur, month in zip(ordinals, ordinals[1:], self.months[1:]):
            if cur == prev:
                raise PanelError(f"duplicate month {month}")
            if cur < prev:
                raise PanelError(f"months out of order at {month}")
            if cur != prev + 1:
                raise PanelError(f"month gap before {month}")
        for name, values in self.columns.items():
            if len(values) != len(self.months):
                raise PanelError(
                    f"column {name!r} has {len(values)} values for "
                    f"{len(self.months)} months"
                )

    @property
    def n_months(self) -> int:
        return len(self.months)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise PanelError(f"unknown column {name!r}")
        return self.columns[name]

    def fully_observed(self, name: str) -> bool:
        return bool(np.all(np.isfinite(self.column(name))))

    def missing_months(self, name: str) -> list[str]:
        values = self.column(name)
        return [m for m, v in zip(self.months, values) if not np.isfinite(v)]


def load_panel(path) -> TimeSeriesPanel:
    """Read a panel CSV: first column ``month`` (YYYY-MM), numeric columns after.

    Empty cells are missing values. Month contiguity and ordering are enforced.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PanelError(f"{path}: empty file") from None
        if not header or header[0].strip().lower() != "month":
            raise PanelError(f"{path}: first column must be 'month'")
        names = [h.strip() for h in header[1:]]
        if len(set(names)) != len(names):
            raise PanelError(f"{path}: duplicate column names")
        months: list[str] = []
        raw_columns: list[list[float]] = [[] for _ in names]
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(names) + 1:
                raise PanelError(f"{path}: row {row_no} has {len(row)} cells, "
                                 f"expected {len(names) + 1}")
            months.append(row[0].strip())
            for i, cell in enumerate(row[1:]):
                cell = cell.strip()
                if cell == "":
                    raw_columns[i].append(float("nan"))
                else:
                    try:
                        raw_columns[i].append(float(cell))
                    except ValueError:
                        raise PanelError(
                            f"{path}: row {row_no}, column {names[i]!r}: "
                            f"non-numeric cell {cell!r}"
                        ) from None
    columns = {name: np.array(vals) for name, vals in zip(names, raw_columns)}
    return TimeSeriesPanel(months=months, columns=columns)
