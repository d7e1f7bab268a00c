"""Log-log least-squares fits used as empirical polynomial-bound witnesses."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateFitError


@dataclass(frozen=True)
class BoundFit:
    """Fit ``log y = slope * log x + intercept``.

    ``max_residual`` is the largest absolute residual, so
    ``y <= exp(intercept + max_residual) * x**slope`` on the fitted data.
    """

    slope: float
    intercept: float
    max_residual: float
    n: int
    degenerate: bool = False

    def envelope(self, x: float) -> float:
        return math.exp(self.intercept + self.max_residual) * x**self.slope

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundFit":
        return cls(**d)

    @classmethod
    def degenerate_fit(cls, n: int) -> "BoundFit":
        return cls(math.nan, math.nan, math.nan, n, True)


def fit_loglog(xs, ys, min_points: int = 2) -> BoundFit:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateFitError("x and y must be 1-d arrays of equal length")
    if len(x) < min_points:
        raise DegenerateFitError(f"need at least {min_points} points, got {len(x)}")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(x * y)):
        raise DegenerateFitError("log-log fit needs finite positive values")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0.0:
        raise DegenerateFitError("all x values coincide")
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return BoundFit(float(slope), float(intercept), float(np.max(np.abs(resid))), len(x))
