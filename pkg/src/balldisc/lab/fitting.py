"""Least-squares power laws in log-log coordinates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residual: float  # max |log residual|
    points: int

    def predict(self, N):
        return np.exp(self.intercept) * np.asarray(N, dtype=float) ** self.slope

    def within(self, target, tol):
        return abs(self.slope - target) <= tol


def fit_exponent(N, values):
    """Fit value = C N^slope by least squares on (log N, log value)."""
    x = np.asarray(N, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("N and values must be 1-d arrays of equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    if np.any(y <= 0) or np.any(x <= 0):
        bad = [(float(a), float(b)) for a, b in zip(x, y) if a <= 0 or b <= 0]
        raise ValueError(f"nonpositive entries: {bad}")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = float(np.max(np.abs(A @ [slope, icpt] - ly)))
    return ScalingFit(float(slope), float(icpt), res, len(x))
