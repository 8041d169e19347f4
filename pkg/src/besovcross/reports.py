"""Scaling-law reports: log-log fits, compensated-ratio spreads and verdicts."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


def fit_loglog(points) -> tuple:
    """Least-squares line through ``(x, log2 y)``.

    Returns ``(slope, intercept, residual)`` with ``residual`` the largest
    absolute deviation of ``log2 y`` from the line.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        raise ValueError("ordinates must be positive and finite")
    if np.ptp(xs) == 0 or len(set(xs.tolist())) < 2:
        raise ValueError("abscissae are degenerate")
    ly = np.log2(ys)
    A = np.vstack([xs, np.ones_like(xs)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    residual = float(np.max(np.abs(ly - (slope * xs + intercept))))
    return float(slope), float(intercept), residual


def spread(values) -> float:
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        return 1.0
    if np.any(v <= 0):
        return math.inf
    return float(v.max() / v.min())


@dataclass
class RateReport:
    """Outcome of one scaling-law check.

    ``verdict`` is true iff the fitted slope is within ``tolerance`` of
    ``predicted_slope`` (when a tolerance is set) and the compensated ratio
    spread is within ``spread_bound`` (when a bound is set).
    """

    label: str
    xs: list
    ys: list
    slope: float
    intercept: float
    residual: float
    predicted_slope: float | None
    ratio_spread: float
    tolerance: float | None
    spread_bound: float | None
    verdict: bool
    rows: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @classmethod
    def build(cls, label, xs, values, compensated, predicted_slope=None, tolerance=None,
              spread_bound=None, rows=None, notes=None) -> "RateReport":
        xs = [float(x) for x in xs]
        values = [float(v) for v in values]
        if len(xs) >= 3:
            slope, intercept, residual = fit_loglog(zip(xs, values))
        else:
            slope = intercept = residual = math.nan
        sp = spread(compensated)
        ok = True
        if tolerance is not None:
            ok &= bool(abs(slope - predicted_slope) <= tolerance)
        if spread_bound is not None:
            ok &= bool(sp <= spread_bound)
        return cls(label=label, xs=xs, ys=[math.log2(v) for v in values], slope=slope,
                   intercept=intercept, residual=residual, predicted_slope=predicted_slope,
                   ratio_spread=sp, tolerance=tolerance, spread_bound=spread_bound,
                   verdict=ok, rows=list(rows or []), notes=dict(notes or {}))

    def summary(self) -> str:
        state = "PASS" if self.verdict else "FAIL"
        pred = "-" if self.predicted_slope is None else f"{self.predicted_slope:+.4f}"
        return (f"[{state}] {self.label}: slope {self.slope:+.4f} (predicted {pred}, "
                f"tol {self.tolerance}), spread {self.ratio_spread:.4f} (bound {self.spread_bound})")

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True)

    def to_csv(self, columns=("n", "M", "error", "compensated", "predicted")) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in self.rows:
            w.writerow([_fmt(row.get(c)) for c in columns])
        return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj
