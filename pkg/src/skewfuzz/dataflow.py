"""A small in-process dataflow engine with per-partition task metrics.

A pipeline is a linear chain of stages, one operator per stage. Narrow
operators (map, flat_map, filter) keep the partitioning. Shuffle operators
(group_by_key, reduce_by_key) move records to ``stable_hash(key) % n``
output partitions. For a shuffle stage, task ``t`` covers both the map side
of input partition ``t`` and the reduce side of output partition ``t``, so
its metric vectors have ``max(m, n)`` entries.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import metrics as M
from .errors import ConstraintError, SchemaError, UdfError
from .values import CollectionT, Dataset, Schema, TupleT, canonical_bytes, estimate_bytes, stable_hash


@dataclass(frozen=True)
class Map:
    fn: Callable
    out_schema: Schema
    counters: tuple = ()


@dataclass(frozen=True)
class FlatMap:
    fn: Callable
    out_schema: Schema
    counters: tuple = ()


@dataclass(frozen=True)
class Filter:
    fn: Callable
    counters: tuple = ()


@dataclass(frozen=True)
class GroupByKey:
    counters: tuple = ()


@dataclass(frozen=True)
class ReduceByKey:
    fn: Callable
    counters: tuple = ()


SHUFFLE_OPS = (GroupByKey, ReduceByKey)


@dataclass(frozen=True)
class Stage:
    stage_id: int
    name: str
    op: object
    input_schema: Schema
    output_schema: Schema

    @property
    def is_shuffle(self) -> bool:
        return isinstance(self.op, SHUFFLE_OPS)


@dataclass(frozen=True)
class Pipeline:
    name: str
    input_schema: Schema
    stages: tuple
    n_shuffle_partitions: int
    spill_threshold_bytes: int | None = None
    gc_ns_per_byte: float = 0.0
    # Task times are reported in nanoseconds but truncated to this
    # granularity, like a cluster scheduler that reports milliseconds.
    timer_resolution_ns: int = 1_000_000

    def __post_init__(self):
        if self.n_shuffle_partitions < 1:
            raise ValueError("n_shuffle_partitions must be positive")
        if self.timer_resolution_ns < 1:
            raise ValueError("timer_resolution_ns must be positive")
        for i, st in enumerate(self.stages):
            if st.stage_id != i:
                raise ValueError("stage ids must be 0..n-1 in order")

    def stage(self, ref: int | str) -> Stage:
        if isinstance(ref, int):
            if not 0 <= ref < len(self.stages):
                raise KeyError(f"no stage {ref} in pipeline {self.name!r}")
            return self.stages[ref]
        for st in self.stages:
            if st.name == ref:
                return st
        raise KeyError(f"no stage named {ref!r} in pipeline {self.name!r}")

    @property
    def output_schema(self) -> Schema:
        return self.stages[-1].output_schema if self.stages else self.input_schema


def _key_schema(schema: Schema, what: str) -> tuple:
    if not (isinstance(schema, TupleT) and len(schema.items) == 2):
        raise SchemaError(f"{what} needs (key, value) records, got {schema}")
    return schema.items


class PipelineBuilder:
    """Fluent construction of a linear pipeline."""

    def __init__(self, name: str, input_schema: Schema, n_shuffle_partitions: int, **engine):
        self.name = name
        self.input_schema = input_schema
        self.n_shuffle_partitions = n_shuffle_partitions
        self.engine = engine
        self._stages: list[Stage] = []
        self._schema = input_schema

    def _add(self, op, out_schema: Schema, name: str | None) -> "PipelineBuilder":
        sid = len(self._stages)
        self._stages.append(Stage(sid, name or f"stage{sid}", op, self._schema, out_schema))
        self._schema = out_schema
        return self

    def map(self, fn, out_schema, name=None, counters=()):
        return self._add(Map(fn, out_schema, tuple(counters)), out_schema, name)

    def flat_map(self, fn, out_schema, name=None, counters=()):
        return self._add(FlatMap(fn, out_schema, tuple(counters)), out_schema, name)

    def filter(self, fn, name=None, counters=()):
        return self._add(Filter(fn, tuple(counters)), self._schema, name)

    def group_by_key(self, name=None):
        k, v = _key_schema(self._schema, "group_by_key")
        return self._add(GroupByKey(), TupleT(k, CollectionT(v)), name)

    def reduce_by_key(self, fn, name=None, counters=()):
        _key_schema(self._schema, "reduce_by_key")
        return self._add(ReduceByKey(fn, tuple(counters)), self._schema, name)

    def build(self) -> Pipeline:
        return Pipeline(self.name, self.input_schema, tuple(self._stages), self.n_shuffle_partitions, **self.engine)


@dataclass(frozen=True)
class TapPoint:
    """Where UDF-level fuzzing injects data: the input of ``stage_id``."""

    stage_id: int
    keys_unique: bool = False


def group_key(key):
    """A dict key for a record key; unhashable keys use their canonical bytes."""
    try:
        hash(key)
        return key
    except TypeError:
        return canonical_bytes(key)


def shuffle(records: Sequence, n: int) -> list[list]:
    """Route (key, value) records to ``stable_hash(key) % n``; order within a bucket is kept."""
    buckets: list[list] = [[] for _ in range(n)]
    for rec in records:
        buckets[stable_hash(rec[0]) % n].append(rec)
    return buckets


class _Task:
    """Times one task and captures its custom counters."""

    __slots__ = ("counters", "token", "t0", "elapsed")

    def __init__(self, declared):
        self.counters = M.CustomCounters(declared)
        self.elapsed = 0

    def __enter__(self):
        self.token = M.activate(self.counters)
        self.t0 = time.perf_counter_ns()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter_ns() - self.t0
        M.deactivate(self.token)
        return False


def _bytes(records) -> int:
    return sum(map(estimate_bytes, records))


def _quantize(pipeline: Pipeline, elapsed_ns: int) -> int:
    res = pipeline.timer_resolution_ns
    return elapsed_ns - elapsed_ns % res


def _memory_metrics(pipeline: Pipeline, peak: int, alloc: int) -> dict:
    spill = 0
    if pipeline.spill_threshold_bytes is not None and peak > pipeline.spill_threshold_bytes:
        spill = peak - pipeline.spill_threshold_bytes
    return {
        M.MetricKind.PeakMemoryUsage: peak,
        M.MetricKind.MemoryBytesSpilled: spill,
        M.MetricKind.GarbageCollectionTime: int(round(alloc * pipeline.gc_ns_per_byte)),
    }


def _run_narrow(pipeline, stage, parts, report):
    op = stage.op
    fn = op.fn
    out_parts = []
    for i, part in enumerate(parts):
        task = _Task(op.counters)
        try:
            with task:
                if isinstance(op, Map):
                    out = [fn(r) for r in part]
                elif isinstance(op, FlatMap):
                    out = [y for r in part for y in fn(r)]
                else:
                    out = [r for r in part if fn(r)]
        except Exception as exc:
            raise UdfError(stage.stage_id, i, exc) from exc
        out_parts.append(out)
        if report is not None:
            out_bytes = _bytes(out)
            values = {
                M.MetricKind.JobExecutionTime: _quantize(pipeline, task.elapsed),
                M.MetricKind.InputReadRecords: len(part),
                M.MetricKind.OutputWriteRecords: len(out),
                M.MetricKind.ShuffleReadRecords: 0,
                M.MetricKind.ShuffleReadBytes: 0,
                M.MetricKind.ShuffleWriteRecords: 0,
                M.MetricKind.ShuffleWriteBytes: 0,
            }
            values.update(_memory_metrics(pipeline, out_bytes, out_bytes))
            values.update({M.Custom(k): v for k, v in task.counters.values.items()})
            report.record_task(stage.stage_id, i, values)
    return out_parts


def _hashable_keys(records) -> bool:
    # All keys of a dataset share one schema, so the first key decides.
    for rec in records:
        try:
            hash(rec[0])
            return True
        except TypeError:
            return False
    return True


def _combine(records, fn):
    acc: dict = {}
    if _hashable_keys(records):
        for k, v in records:
            if k in acc:
                acc[k] = fn(acc[k], v)
            else:
                acc[k] = v
        return list(acc.items())
    keys: dict = {}
    for k, v in records:
        g = canonical_bytes(k)
        if g in acc:
            acc[g] = fn(acc[g], v)
        else:
            acc[g] = v
            keys[g] = k
    return [(keys[g], v) for g, v in acc.items()]


def _group(records):
    groups: dict = {}
    keys: dict = {}
    key_of = (lambda k: k) if _hashable_keys(records) else canonical_bytes
    for k, v in records:
        g = key_of(k)
        if g in groups:
            groups[g].append(v)
        else:
            groups[g] = [v]
            keys[g] = k
    out = []
    for g, vs in groups.items():
        if len(vs) > 1:
            vs.sort(key=canonical_bytes)
        out.append((keys[g], vs))
    return out


def _run_shuffle(pipeline, stage, parts, report):
    op = stage.op
    n = pipeline.n_shuffle_partitions
    m = len(parts)
    reducing = isinstance(op, ReduceByKey)

    buckets_by_map = []
    map_tasks = []
    written = []
    for i, part in enumerate(parts):
        task = _Task(op.counters)
        try:
            with task:
                recs = _combine(part, op.fn) if reducing else part
                buckets_by_map.append(shuffle(recs, n))
        except Exception as exc:
            raise UdfError(stage.stage_id, i, exc) from exc
        map_tasks.append(task)
        written.append(recs)

    out_parts = []
    reduce_tasks = []
    incoming = []
    for j in range(n):
        task = _Task(op.counters)
        try:
            with task:
                recs = [r for buckets in buckets_by_map for r in buckets[j]]
                out = _combine(recs, op.fn) if reducing else _group(recs)
        except Exception as exc:
            raise UdfError(stage.stage_id, j, exc) from exc
        reduce_tasks.append(task)
        incoming.append(recs)
        out_parts.append(out)

    if report is not None:
        for t in range(max(m, n)):
            elapsed = 0
            counters: dict = {}
            w_recs = w_bytes = r_recs = r_bytes = out_recs = out_bytes = in_recs = 0
            if t < m:
                elapsed += map_tasks[t].elapsed
                in_recs = len(parts[t])
                w_recs = len(written[t])
                w_bytes = _bytes(written[t])
                for k, v in map_tasks[t].counters.values.items():
                    counters[k] = counters.get(k, 0) + v
            if t < n:
                elapsed += reduce_tasks[t].elapsed
                r_recs = len(incoming[t])
                r_bytes = _bytes(incoming[t])
                out_recs = len(out_parts[t])
                out_bytes = _bytes(out_parts[t])
                for k, v in reduce_tasks[t].counters.values.items():
                    counters[k] = counters.get(k, 0) + v
            values = {
                M.MetricKind.JobExecutionTime: _quantize(pipeline, elapsed),
                M.MetricKind.InputReadRecords: in_recs,
                M.MetricKind.OutputWriteRecords: out_recs,
                M.MetricKind.ShuffleReadRecords: r_recs,
                M.MetricKind.ShuffleReadBytes: r_bytes,
                M.MetricKind.ShuffleWriteRecords: w_recs,
                M.MetricKind.ShuffleWriteBytes: w_bytes,
            }
            values.update(_memory_metrics(pipeline, max(w_bytes, out_bytes), w_bytes + out_bytes))
            values.update({M.Custom(k): v for k, v in counters.items()})
            report.record_task(stage.stage_id, t, values)
    return out_parts


def _run_stages(pipeline: Pipeline, parts, start: int, stop: int, report) -> list:
    for stage in pipeline.stages[start:stop]:
        if stage.is_shuffle:
            parts = _run_shuffle(pipeline, stage, parts, report)
        else:
            parts = _run_narrow(pipeline, stage, parts, report)
    return parts


def _check_schema(data: Dataset, expected: Schema, where: str) -> None:
    if data.schema != expected:
        raise SchemaError(f"{where} expects {expected}, got {data.schema}")


def execute(pipeline: Pipeline, data: Dataset, report: M.MetricsReport | None = None) -> Dataset:
    """Run every stage; metrics go to ``report`` when one is given."""
    _check_schema(data, pipeline.input_schema, f"pipeline {pipeline.name!r}")
    parts = _run_stages(pipeline, data.partitions, 0, len(pipeline.stages), report)
    return Dataset(pipeline.output_schema, tuple(parts))


def execute_prefix(pipeline: Pipeline, data: Dataset, tap: TapPoint) -> Dataset:
    """The dataset that would be fed to the tap stage when running on ``data``."""
    _check_schema(data, pipeline.input_schema, f"pipeline {pipeline.name!r}")
    stage = pipeline.stage(tap.stage_id)
    parts = _run_stages(pipeline, data.partitions, 0, tap.stage_id, None)
    return Dataset(stage.input_schema, tuple(parts))


def check_unique_keys(data: Dataset) -> None:
    seen = set()
    for rec in data.records():
        g = group_key(rec[0])
        if g in seen:
            raise ConstraintError(f"duplicate key {rec[0]!r} at a keys-unique tap")
        seen.add(g)


def execute_from(
    pipeline: Pipeline, tap: TapPoint, data: Dataset, report: M.MetricsReport | None = None
) -> Dataset:
    """Run the stages from the tap onward on an injected dataset."""
    stage = pipeline.stage(tap.stage_id)
    _check_schema(data, stage.input_schema, f"tap stage {stage.name!r}")
    if tap.keys_unique:
        check_unique_keys(data)
    parts = _run_stages(pipeline, data.partitions, tap.stage_id, len(pipeline.stages), report)
    return Dataset(pipeline.output_schema, tuple(parts))
