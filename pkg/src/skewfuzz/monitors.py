"""Monitor templates: turn a per-partition metric vector into a verdict and a score.

Each template returns ``Verdict(triggered, score)`` where ``score`` is the
continuous feedback used to rank inputs and ``triggered`` means
``score >= threshold``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MonitorError
from .metrics import Metric, MetricsReport, metric_name


@dataclass(frozen=True)
class Verdict:
    triggered: bool
    score: float


def _as_array(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise MonitorError("monitors need a non-empty metric vector")
    return arr


def quartiles(values: Sequence[float]) -> tuple[float, float]:
    """First and third quartile with linear interpolation at ranks 0.25(n-1) and 0.75(n-1)."""
    arr = _as_array(values)
    q1, q3 = np.percentile(arr, [25.0, 75.0], method="linear")
    return float(q1), float(q3)


def next_comparison_ratio(values: Sequence[float]) -> float:
    """Largest value divided by the largest of the rest (one copy of the max removed)."""
    arr = np.sort(_as_array(values))
    top = arr[-1]
    if top <= 0:
        return 0.0
    if arr.size == 1:
        return math.inf
    second = arr[-2]
    if second <= 0:
        return math.inf
    return float(top / second)


def iqr_score(values: Sequence[float]) -> float:
    arr = _as_array(values)
    q1, q3 = quartiles(arr)
    top = float(arr.max())
    iqr = q3 - q1
    if iqr == 0:
        return math.inf if top > q3 else 0.0
    return (top - q3) / iqr


def skewness(values: Sequence[float]) -> float:
    """Population skewness g1 = m3 / m2**1.5; zero for fewer than 3 values or no spread."""
    # Sorting first makes the floating-point result independent of input order.
    arr = np.sort(_as_array(values))
    if arr.size < 3:
        return 0.0
    dev = arr - arr.mean()
    m2 = float(np.mean(dev**2))
    if m2 <= 0 or m2 < 1e-24 * max(1.0, float(np.mean(arr**2))):
        return 0.0
    return float(np.mean(dev**3)) / m2**1.5


@dataclass(frozen=True)
class MonitorTemplate:
    threshold: float
    name = "MonitorTemplate"

    def score(self, values: Sequence[float]) -> float:
        raise NotImplementedError

    def evaluate(self, values: Sequence[float]) -> Verdict:
        s = self.score(values)
        return Verdict(bool(s >= self.threshold), s)


@dataclass(frozen=True)
class MaximumThreshold(MonitorTemplate):
    name = "MaximumThreshold"

    def score(self, values):
        return float(_as_array(values).max())


@dataclass(frozen=True)
class NextComparison(MonitorTemplate):
    name = "NextComparison"

    def score(self, values):
        return next_comparison_ratio(values)


@dataclass(frozen=True)
class IQROutlier(MonitorTemplate):
    name = "IQROutlier"

    def score(self, values):
        return iqr_score(values)


@dataclass(frozen=True)
class Skewness(MonitorTemplate):
    name = "Skewness"

    def score(self, values):
        return skewness(values)


TEMPLATES = {cls.name: cls for cls in (MaximumThreshold, NextComparison, IQROutlier, Skewness)}


def make_template(name: str, threshold: float) -> MonitorTemplate:
    try:
        return TEMPLATES[name](float(threshold))
    except KeyError:
        raise MonitorError(f"unknown monitor template {name!r}") from None


def evaluate(template: MonitorTemplate, values: Sequence[float]) -> Verdict:
    return template.evaluate(values)


@dataclass(frozen=True)
class MonitorBinding:
    """A template applied to one metric of one stage."""

    template: MonitorTemplate
    metric: Metric
    stage_id: int

    def check(self, report: MetricsReport) -> Verdict:
        values = report.extract(self.metric, self.stage_id)
        if not values:
            raise MonitorError(f"stage {self.stage_id} produced no {metric_name(self.metric)} values")
        return self.template.evaluate(values)
