"""
A word count on the in-process engine, with per-partition metrics
=================================================================
"""

# %%
from skewfuzz.dataflow import PipelineBuilder, TapPoint, execute, execute_from, execute_prefix
from skewfuzz.metrics import MetricKind, MetricsReport
from skewfuzz.values import Dataset, IntT, StrT, TupleT

wc = (
    PipelineBuilder("wc", StrT(), 3)
    .flat_map(str.split, StrT(), name="split")
    .map(lambda w: (w, 1), TupleT(StrT(), IntT()), name="pairs")
    .reduce_by_key(lambda a, b: a + b, name="counts")
    .build()
)
lines = Dataset(StrT(), (["a a b", "c"], ["a d d d"]))

# %%
report = MetricsReport()
out = execute(wc, lines, report)
print(sorted(out.records()))

# %%
# Shuffle stages report both map-side writes and reduce-side reads.
counts = wc.stage("counts").stage_id
print("write", report.extract(MetricKind.ShuffleWriteRecords, counts))
print("read ", report.extract(MetricKind.ShuffleReadRecords, counts))

# %%
# Cutting the pipeline at a tap point and resuming gives the same answer.
tap = TapPoint(counts)
middle = execute_prefix(wc, lines, tap)
print(middle.partitions)
print(execute_from(wc, tap, middle) == out)
