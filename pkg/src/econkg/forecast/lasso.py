"""L1-penalized least squares by cyclic coordinate descent with soft-thresholding.

Minimizes (1/2n)||y - b0 - Xb||^2 + lambda * ||b||_1 with the intercept
unpenalized. Columns are standardized internally (optionally masked, so 0/1
dummies keep their scale); returned coefficients are in original units.
Updates run on the Gram matrix with active-set sweeps, so repeated fits along
a penalty path are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LassoFit", "fit_lasso", "lambda_max", "default_lambda_grid", "select_lambda"]


class LassoError(ValueError):
    pass


@dataclass(frozen=True)
class LassoFit:
    coefficients: np.ndarray  # original units
    intercept: float
    lam: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    n_iterations: int
    converged: bool

    @property
    def active_set(self) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.coefficients)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + np.asarray(X, dtype=float) @ self.coefficients


def _standardize(X: np.ndarray, standardize_mask: np.ndarray | None):
    n, p = X.shape
    if standardize_mask is None:
        standardize_mask = np.ones(p, dtype=bool)
    means = X.mean(axis=0)  # centering is penalty-neutral, applied to all columns
    scales = np.ones(p)
    std = X.std(axis=0)
    for j in range(p):
        if standardize_mask[j] and std[j] > 0:
            scales[j] = std[j]
    Xs = (X - means) / scales
    return Xs, means, scales


def soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


class _Workspace:
    """Standardized design shared across fits on the same (X, y)."""

    def __init__(self, X, y, standardize_mask=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise LassoError("X must be (n, p) and y (n,) with matching n")
        if X.shape[0] == 0:
            raise LassoError("no rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise LassoError("non-finite values in X or y")
        self.X = X
        self.y = y
        n, p = X.shape
        self.n, self.p = n, p
        self.Xs, self.means, self.scales = _standardize(X, standardize_mask)
        self.y_mean = float(y.mean())
        r = y - self.y_mean
        # per-column dots keep lambda >= lambda_max an exact null model
        self.c = np.array([(self.Xs[:, j] @ r) / n for j in range(p)])
        self.G = self.Xs.T @ self.Xs / n

    def lambda_max(self) -> float:
        return float(np.max(np.abs(self.c))) if self.p else 0.0

    def solve(self, lam: float, beta0=None, tol=1e-8, max_iter=100_000):
        if lam < 0:
            raise LassoError("lambda must be non-negative")
        p = self.p
        beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=float)
        g = self.c - self.G @ beta if beta0 is not None and np.any(beta) else self.c.copy()
        diag = np.diag(self.G).copy()

        def sweep(indices) -> float:
            max_delta = 0.0
            for j in indices:
                if diag[j] == 0.0:
                    continue
                old = beta[j]
                rho = g[j] + diag[j] * old
                new = soft_threshold(rho, lam) / diag[j]
                if new != old:
                    g[:] = g - self.G[:, j] * (new - old)
                    beta[j] = new
                    delta = abs(new - old)
                    if delta > max_delta:
                        max_delta = delta
            return max_delta

        everything = range(p)
        n_iter = 0
        converged = False
        while n_iter < max_iter:
            n_iter += 1
            if sweep(everything) < tol:
                converged = True
                break
            active = np.flatnonzero(beta)
            while n_iter < max_iter and len(active):
                n_iter += 1
                if sweep(active) < tol:
                    break
        return beta, n_iter, converged

    def finish(self, beta, lam, n_iter, converged) -> LassoFit:
        coefficients = beta / self.scales
        intercept = self.y_mean - float(coefficients @ self.means)
        return LassoFit(
            coefficients=coefficients,
            intercept=intercept,
            lam=float(lam),
            feature_means=self.means,
            feature_scales=self.scales,
            n_iterations=n_iter,
            converged=converged,
        )


def fit_lasso(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    standardize_mask: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> LassoFit:
    """Cyclic coordinate descent; converged when the largest coefficient
    change in a sweep falls below ``tol``."""
    ws = _Workspace(X, y, standardize_mask)
    beta, n_iter, converged = ws.solve(lam, tol=tol, max_iter=max_iter)
    return ws.finish(beta, lam, n_iter, converged)


def lambda_max(
    X: np.ndarray,
    y: np.ndarray,
    standardize_mask: np.ndarray | None = None,
) -> float:
    """Smallest penalty with an all-zero solution: max_j |(1/n) x_j'(y - ybar)|."""
    return _Workspace(X, y, standardize_mask).lambda_max()


def default_lambda_grid(
    X: np.ndarray,
    y: np.ndarray,
    size: int = 50,
    min_ratio: float = 1e-3,
    standardize_mask: np.ndarray | None = None,
) -> list[float]:
    """Log-spaced grid from lambda_max down to lambda_max * min_ratio."""
    top = lambda_max(X, y, standardize_mask)
    if top <= 0:
        return [0.0]
    return list(np.geomspace(top, top * min_ratio, num=size))


def select_lambda(
    X: np.ndarray,
    y: np.ndarray,
    grid: list[float],
    n_folds: int = 5,
    min_train: int = 8,
    standardize_mask: np.ndarray | None = None,
) -> float:
    """Pick the penalty by expanding-window rolling-origin validation.

    Rows must be in chronological order. The mean validation RMSE across
    folds decides; ties go to the larger (sparser) penalty. Fits along the
    descending grid are warm-started within each fold.
    """
    if not grid:
        raise LassoError("empty lambda grid")
    if len(grid) == 1:
        return float(grid[0])
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    initial = max(min_train, n // 2)  # first origin: at least half the sample
    k = min(n_folds, n - initial)
    if k < 3:
        raise LassoError(
            f"insufficient rows for validation: {n} rows leave {k} folds "
            f"(need >= 3 beyond the initial window of {initial})"
        )
    block = (n - initial) // k
    start0 = n - k * block
    path = sorted(grid, reverse=True)

    errors = np.zeros((len(path), k))
    for fold in range(k):
        cut = start0 + fold * block
        ws = _Workspace(X[:cut], y[:cut], standardize_mask)
        X_val = X[cut : cut + block]
        y_val = y[cut : cut + block]
        beta = None
        for i, lam in enumerate(path):
            beta, n_iter, converged = ws.solve(lam, beta0=beta)
            fit = ws.finish(beta, lam, n_iter, converged)
            pred = fit.predict(X_val)
            errors[i, fold] = float(np.sqrt(np.mean((y_val - pred) ** 2)))

    means = errors.mean(axis=1)
    best_i = 0
    for i in range(1, len(path)):
        if means[i] < means[best_i]:
            best_i = i
    return float(path[best_i])
