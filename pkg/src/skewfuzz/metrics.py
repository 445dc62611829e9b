"""Per-partition task metrics and user-defined counters."""

from __future__ import annotations

import contextvars
import json
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .errors import MetricError


class MetricKind(Enum):
    JobExecutionTime = "JobExecutionTime"
    GarbageCollectionTime = "GarbageCollectionTime"
    PeakMemoryUsage = "PeakMemoryUsage"
    MemoryBytesSpilled = "MemoryBytesSpilled"
    InputReadRecords = "InputReadRecords"
    OutputWriteRecords = "OutputWriteRecords"
    ShuffleReadRecords = "ShuffleReadRecords"
    ShuffleReadBytes = "ShuffleReadBytes"
    ShuffleWriteRecords = "ShuffleWriteRecords"
    ShuffleWriteBytes = "ShuffleWriteBytes"


@dataclass(frozen=True)
class Custom:
    """A user-defined counter, incremented from inside UDFs."""

    name: str

    def __str__(self) -> str:
        return f"Custom:{self.name}"


Metric = Union[MetricKind, Custom]

ALIASES = {"Runtime": MetricKind.JobExecutionTime}


def parse_metric(name: str) -> Metric:
    if name in ALIASES:
        return ALIASES[name]
    if name.startswith("Custom:"):
        return Custom(name[len("Custom:") :])
    try:
        return MetricKind(name)
    except ValueError:
        raise MetricError(f"unknown metric {name!r}") from None


def metric_name(metric: Metric) -> str:
    return str(metric) if isinstance(metric, Custom) else metric.value


class SkewCategory(Enum):
    Data = "Data"
    Computation = "Computation"
    Memory = "Memory"


_CATEGORIES = {
    MetricKind.JobExecutionTime: {SkewCategory.Computation, SkewCategory.Data},
    MetricKind.GarbageCollectionTime: {SkewCategory.Memory},
    MetricKind.PeakMemoryUsage: {SkewCategory.Memory},
    MetricKind.MemoryBytesSpilled: {SkewCategory.Memory},
}


def skew_categories(metric: Metric) -> frozenset:
    """Skew categories a metric can reveal; empty for custom counters."""
    if isinstance(metric, Custom):
        return frozenset()
    return frozenset(_CATEGORIES.get(metric, {SkewCategory.Data}))


def primary_category(metric: Metric) -> SkewCategory | None:
    """The category used to weight mutations for a metric (Computation wins for runtime)."""
    cats = skew_categories(metric)
    for c in (SkewCategory.Computation, SkewCategory.Memory, SkewCategory.Data):
        if c in cats:
            return c
    return None


class MetricsReport:
    """Metric values keyed by (stage, partition)."""

    def __init__(self):
        self._tasks: dict[int, dict[int, dict[Metric, float]]] = {}

    def record_task(self, stage_id: int, partition: int, values: dict) -> None:
        self._tasks.setdefault(stage_id, {}).setdefault(partition, {}).update(values)

    def stages(self) -> list[int]:
        return sorted(self._tasks)

    def partitions(self, stage_id: int) -> int:
        parts = self._tasks.get(stage_id)
        return 0 if not parts else max(parts) + 1

    def get(self, stage_id: int, partition: int, metric: Metric):
        return self._tasks[stage_id][partition][metric]

    def extract(self, metric: Metric, stage_id: int) -> list:
        parts = self._tasks.get(stage_id)
        if not parts:
            return []
        out = []
        for p in range(max(parts) + 1):
            task = parts.get(p, {})
            if metric in task:
                out.append(task[metric])
            elif isinstance(metric, Custom):
                if not any(metric in t for t in parts.values()):
                    raise MetricError(f"unknown counter {metric.name!r} for stage {stage_id}")
                out.append(0)
            else:
                out.append(0)
        return out

    def to_dict(self) -> dict:
        return {
            str(s): {
                str(p): {metric_name(m): v for m, v in task.items()}
                for p, task in sorted(parts.items())
            }
            for s, parts in sorted(self._tasks.items())
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        report = cls()
        for s, parts in json.loads(text).items():
            for p, task in parts.items():
                report.record_task(int(s), int(p), {parse_metric(k): v for k, v in task.items()})
        return report


def extract(report: MetricsReport, metric: Metric, stage_id: int) -> list:
    return report.extract(metric, stage_id)


def record_task(report: MetricsReport, stage_id: int, partition: int, values: dict) -> None:
    report.record_task(stage_id, partition, values)


class CustomCounters:
    """Counter values for one task; UDFs reach the active instance through ``increment``."""

    def __init__(self, declared=()):
        self.values: dict[str, int] = {name: 0 for name in declared}

    def add(self, name: str, amount: int = 1) -> None:
        self.values[name] = self.values.get(name, 0) + amount


_active: contextvars.ContextVar[CustomCounters | None] = contextvars.ContextVar(
    "skewfuzz_counters", default=None
)


def increment(name: str, amount: int = 1) -> None:
    """Bump a custom counter for the running task; a no-op outside the engine."""
    counters = _active.get()
    if counters is not None:
        counters.add(name, amount)


def activate(counters: CustomCounters | None):
    return _active.set(counters)


def deactivate(token) -> None:
    _active.reset(token)
