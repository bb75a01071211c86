"""Velocity fits, inverse-size extrapolation and velocity-peak location."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HcbError

WINDOW_TOL = 1e-9


class FitError(HcbError, ValueError):
    """Not enough or degenerate data for a fit."""


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int


@dataclass(frozen=True)
class ExtrapolationResult:
    limit_value: float
    coefficient: float
    inputs: tuple
    limit_stderr: float
    coefficient_stderr: float


def _ols(x, y):
    """Ordinary least squares y = a x + b; returns (a, b, r2, cov)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    dof = len(x) - 2
    sigma2 = ss_res / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return float(coef[0]), float(coef[1]), min(1.0, max(0.0, r2)), cov


def _window_points(times, values, window):
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = window
    mask = (t >= lo - WINDOW_TOL) & (t <= hi + WINDOW_TOL)
    return t[mask], v[mask]


def fit_line(times, values, window=(2.0, 10.0)) -> FitResult:
    t, v = _window_points(times, values, window)
    if len(t) < 3:
        cadence = float(np.median(np.diff(times))) if len(times) > 1 else float("nan")
        raise FitError(
            f"only {len(t)} points in window {window} (recording cadence {cadence:g}); need 3"
        )
    a, b, r2, _ = _ols(t, v)
    return FitResult(a, b, r2, (float(window[0]), float(window[1])), len(t))


def fit_velocity(series, window=(2.0, 10.0)) -> FitResult:
    """Least-squares slope of the radius against time inside ``window``."""
    return fit_line(series.times, series.radius, window)


def fit_sqrt_time(series, window=(2.0, 10.0)) -> FitResult:
    """Radius against sqrt(t); the slope and r^2 are the diffusive-law analogue."""
    t, r = _window_points(series.times, series.radius, window)
    if len(t) < 3:
        raise FitError(f"only {len(t)} points in window {window}; need 3")
    a, b, r2, _ = _ols(np.sqrt(t), r)
    return FitResult(a, b, r2, (float(window[0]), float(window[1])), len(t))


def extrapolate_inverse_size(points) -> ExtrapolationResult:
    """Fit value = limit + coefficient / size by least squares in 1/size."""
    pts = sorted((float(s), float(v)) for s, v in points)
    sizes = np.array([p[0] for p in pts])
    if len(pts) < 3:
        raise FitError(f"need at least 3 sizes, got {len(pts)}")
    if len(np.unique(sizes)) != len(sizes) or np.any(sizes <= 0):
        raise FitError(f"sizes must be distinct and positive, got {sizes.tolist()}")
    a, b, _, cov = _ols(1.0 / sizes, [p[1] for p in pts])
    return ExtrapolationResult(
        limit_value=b,
        coefficient=a,
        inputs=tuple(pts),
        limit_stderr=float(np.sqrt(cov[1, 1])),
        coefficient_stderr=float(np.sqrt(cov[0, 0])),
    )


def find_velocity_peak(points):
    """Grid maximum of V(W) refined by a parabola through it and its neighbours.

    Raises FitError when the maximum sits on the edge of the grid.
    """
    pts = sorted((float(w), float(v)) for w, v in points)
    if len(pts) < 5:
        raise FitError(f"peak search needs at least 5 points, got {len(pts)}")
    W = np.array([p[0] for p in pts])
    V = np.array([p[1] for p in pts])
    if np.any(np.diff(W) <= 0):
        raise FitError("W grid must be strictly increasing")
    k = int(np.argmax(V))
    if k == 0 or k == len(V) - 1:
        raise FitError(f"maximum at grid edge W={W[k]:g}; widen the scan")
    x, y = W[k - 1 : k + 2], V[k - 1 : k + 2]
    # vertex of the interpolating parabola, written relative to the middle point
    h1, h2 = x[0] - x[1], x[2] - x[1]
    d1, d2 = y[0] - y[1], y[2] - y[1]
    denom = d1 * h2 - d2 * h1
    if denom == 0:
        return float(W[k]), float(V[k])
    a = (d1 * h2 - d2 * h1) / (h1 * h2 * (h1 - h2))
    b = (d2 * h1**2 - d1 * h2**2) / (h1 * h2 * (h1 - h2))
    if a >= 0:
        return float(W[k]), float(V[k])
    dx = -b / (2 * a)
    return float(x[1] + dx), float(y[1] + b * dx + a * dx * dx)
