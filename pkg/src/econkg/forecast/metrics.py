"""Forecast error metrics and the Diebold-Mariano equal-accuracy test."""

from __future__ import annotations

import numpy as np
from scipy import stats

__all__ = ["evaluate", "dm_test", "squared_loss", "percentage_loss"]


class MetricError(ValueError):
    pass


def evaluate(
    predictions,
    actuals,
    months: list[str] | None = None,
) -> tuple[float, float]:
    """(MAPE, RMSE). MAPE needs non-zero actuals; the offending month is named."""
    p = np.asarray(predictions, dtype=float)
    a = np.asarray(actuals, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or len(p) < 1:
        raise MetricError("predictions and actuals must be equal-length 1-d arrays")
    zero = np.flatnonzero(a == 0.0)
    if zero.size:
        where = months[zero[0]] if months else f"position {int(zero[0])}"
        raise MetricError(f"MAPE undefined: actual value is zero at {where}")
    mape = float(100.0 * np.mean(np.abs((a - p) / a)))
    rmse = float(np.sqrt(np.mean((a - p) ** 2)))
    return mape, rmse


def squared_loss(predictions, actuals) -> np.ndarray:
    p = np.asarray(predictions, dtype=float)
    a = np.asarray(actuals, dtype=float)
    return (a - p) ** 2


def percentage_loss(predictions, actuals) -> np.ndarray:
    p = np.asarray(predictions, dtype=float)
    a = np.asarray(actuals, dtype=float)
    if np.any(a == 0.0):
        raise MetricError("percentage loss undefined for zero actuals")
    return np.abs((a - p) / a)


def dm_test(loss_a, loss_b, horizon: int = 1) -> tuple[float, float]:
    """Diebold-Mariano statistic and two-sided p-value on per-period losses.

    The loss differential d_t = loss_a - loss_b is tested for zero mean with
    a rectangular-kernel long-run variance truncated at lag horizon-1, the
    Harvey-Leybourne-Newbold small-sample factor, and Student-t(T-1) critical
    values. Positive statistics mean the first series loses more.
    """
    a = np.asarray(loss_a, dtype=float)
    b = np.asarray(loss_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise MetricError("loss series must be equal-length 1-d arrays")
    T = len(a)
    if horizon < 1:
        raise MetricError("horizon must be >= 1")
    if T < horizon + 2:
        raise MetricError(f"need at least horizon + 2 = {horizon + 2} losses, got {T}")
    d = a - b
    if np.all(d == d[0]):
        if d[0] == 0.0:
            raise MetricError("degenerate statistic: identical loss series")
        raise MetricError("long-run variance not positive")
    d_bar = float(d.mean())
    centered = d - d_bar

    def gamma(k: int) -> float:
        return float((centered[k:] * centered[: T - k]).sum() / T)

    v = gamma(0) + 2.0 * sum(gamma(k) for k in range(1, horizon))
    if v <= 0:
        raise MetricError("long-run variance not positive")
    dm = d_bar / np.sqrt(v / T)
    hln = np.sqrt((T + 1 - 2 * horizon + horizon * (horizon - 1) / T) / T)
    statistic = float(hln * dm)
    p_value = float(2.0 * stats.t.sf(abs(statistic), df=T - 1))
    return statistic, p_value
