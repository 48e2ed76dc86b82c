"""Least-squares power-law fits in log-log space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ReliabilityError

MIN_FIT_POINTS = 4


@dataclass(frozen=True)
class ExponentFit:
    """``y ~ constant * x**exponent`` fitted on ``log y = log c + e log x``."""

    exponent: float
    constant: float
    r2: float
    points_used: int
    rms_residual: float
    xs: tuple
    ys: tuple
    extras: dict = field(default_factory=dict)

    def predict(self, x):
        return self.constant * np.asarray(x, dtype=float) ** self.exponent

    def to_dict(self):
        out = {
            "exponent": self.exponent,
            "constant": self.constant,
            "r2": self.r2,
            "points_used": self.points_used,
            "rms_residual": self.rms_residual,
        }
        out.update(self.extras)
        return out


def loglog_fit(x, y, min_points=MIN_FIT_POINTS, extras=None) -> ExponentFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < min_points:
        raise ReliabilityError(f"need at least {min_points} points for a fit, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ReliabilityError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack((lx, np.ones_like(lx)))
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(
        exponent=float(slope),
        constant=float(np.exp(intercept)),
        r2=float(r2),
        points_used=int(x.size),
        rms_residual=float(np.sqrt(ss_res / x.size)),
        xs=tuple(x.tolist()),
        ys=tuple(y.tolist()),
        extras=dict(extras or {}),
    )
