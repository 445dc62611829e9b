import pytest

from skewfuzz import metrics as M
from skewfuzz.dataflow import PipelineBuilder, execute
from skewfuzz.errors import MetricError
from skewfuzz.metrics import Custom, MetricKind, MetricsReport, SkewCategory
from skewfuzz.values import Dataset, IntT, StrT, TupleT


def test_ten_distinct_kinds():
    assert len(MetricKind) == 10
    assert len({k.value for k in MetricKind}) == 10


def test_parse_metric():
    assert M.parse_metric("Runtime") is MetricKind.JobExecutionTime
    assert M.parse_metric("ShuffleReadRecords") is MetricKind.ShuffleReadRecords
    assert M.parse_metric("Custom:hits") == Custom("hits")
    with pytest.raises(MetricError):
        M.parse_metric("Latency")


def test_categories():
    assert M.primary_category(MetricKind.JobExecutionTime) is SkewCategory.Computation
    assert M.primary_category(MetricKind.ShuffleWriteRecords) is SkewCategory.Data
    assert M.primary_category(MetricKind.PeakMemoryUsage) is SkewCategory.Memory
    assert M.primary_category(Custom("x")) is None


def test_record_extract():
    r = MetricsReport()
    r.record_task(0, 0, {MetricKind.OutputWriteRecords: 3})
    r.record_task(0, 1, {MetricKind.OutputWriteRecords: 5})
    assert r.extract(MetricKind.OutputWriteRecords, 0) == [3, 5]
    assert r.extract(MetricKind.OutputWriteRecords, 7) == []


def test_unknown_custom_counter():
    r = MetricsReport()
    r.record_task(0, 0, {Custom("a"): 1})
    with pytest.raises(MetricError):
        r.extract(Custom("b"), 0)


def test_json_round_trip():
    r = MetricsReport()
    r.record_task(1, 0, {MetricKind.ShuffleReadBytes: 10, Custom("c"): 2})
    back = MetricsReport.from_json(r.to_json())
    assert back.to_dict() == r.to_dict()


def test_increment_outside_task_is_noop():
    M.increment("nothing")


def _counting_pipeline():
    def udf(x):
        for _ in range(x):
            M.increment("steps")
        return x

    return (
        PipelineBuilder("count", IntT(), 2)
        .map(udf, IntT(), name="work", counters=("steps",))
        .build()
    )


def test_custom_counter_counts_per_task():
    p = _counting_pipeline()
    r = MetricsReport()
    execute(p, Dataset(IntT(), ([1, 2], [], [5])), r)
    assert r.extract(Custom("steps"), 0) == [3, 0, 5]


def test_every_task_has_all_kinds():
    p = (
        PipelineBuilder("wc", StrT(), 3)
        .map(lambda w: (w, 1), TupleT(StrT(), IntT()))
        .reduce_by_key(lambda a, b: a + b)
        .build()
    )
    r = MetricsReport()
    execute(p, Dataset(StrT(), (["a", "b"], ["a"])), r)
    for s in r.stages():
        for part in range(r.partitions(s)):
            for kind in MetricKind:
                assert r.get(s, part, kind) >= 0
    assert r.extract(MetricKind.ShuffleWriteRecords, 0) == [0, 0]
    assert len(r.extract(MetricKind.ShuffleReadRecords, 1)) == 3
