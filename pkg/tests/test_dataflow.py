import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewfuzz.benchmarks import BUILDERS, GENERATORS, build_collatz, build_stock, build_wordcount, solve_collatz
from skewfuzz.dataflow import (
    PipelineBuilder,
    TapPoint,
    execute,
    execute_from,
    execute_prefix,
    shuffle,
)
from skewfuzz.errors import ConstraintError, SchemaError, UdfError
from skewfuzz.metrics import MetricKind, MetricsReport
from skewfuzz.values import CollectionT, Dataset, FloatT, IntT, StrT, TupleT, stable_hash
from strategies import pair_datasets

SMALL_INPUTS = {
    "collatz": {},
    "wordcount": {"n_partitions": 4, "lines_per_partition": 10, "words_per_line": 8},
    "deptgpas": {"n_partitions": 6, "records_per_partition": 30},
    "stock": {"n_symbols": 6, "n_days": 15, "n_partitions": 4},
}


def _records(ds):
    return sorted(ds.records(), key=repr)


def _wordcount_pipeline(n=3):
    return (
        PipelineBuilder("wc", StrT(), n)
        .flat_map(str.split, StrT(), name="split")
        .map(lambda w: (w, 1), TupleT(StrT(), IntT()), name="pairs")
        .reduce_by_key(lambda a, b: a + b, name="counts")
        .build()
    )


def test_wordcount_hand_count():
    out = execute(_wordcount_pipeline(), Dataset(StrT(), (["a a b"],)))
    assert _records(out) == [("a", 2), ("b", 1)]


def test_filter_identity():
    p = PipelineBuilder("id", IntT(), 2).filter(lambda x: True).build()
    ds = Dataset(IntT(), ([1, 2], [3]))
    assert execute(p, ds) == ds


def test_group_by_key_output_schema():
    p = PipelineBuilder("g", TupleT(StrT(), FloatT()), 2).group_by_key().build()
    assert p.output_schema == TupleT(StrT(), CollectionT(FloatT()))
    with pytest.raises(SchemaError):
        PipelineBuilder("bad", IntT(), 2).group_by_key().build()


def test_group_values_sorted_canonically():
    p = PipelineBuilder("g", TupleT(StrT(), IntT()), 1).group_by_key().build()
    out = execute(p, Dataset(TupleT(StrT(), IntT()), ([("k", 3), ("k", 1)], [("k", 2)])))
    assert out.partitions[0] == [("k", [1, 2, 3])]


def test_collatz_program_on_seed():
    b = build_collatz()
    out = execute(b.pipeline, GENERATORS["collatz"]())
    assert len(out) == 4


def test_collatz_tap_input():
    b = build_collatz()
    tap_ds = execute_prefix(b.pipeline, GENERATORS["collatz"](), b.tap)
    assert _records(tap_ds) == [(1, [1]), (2, [1]), (3, [1]), (4, [1])]


def test_collatz_execute_from_runs_kernel():
    b = build_collatz()
    ds = Dataset(b.pipeline.stage(b.tap.stage_id).input_schema, ([(3, [1])],))
    out = execute_from(b.pipeline, b.tap, ds)
    assert list(out.records()) == [(3, solve_collatz(3))]


def test_prefix_at_stage_zero_is_input():
    p = _wordcount_pipeline()
    ds = Dataset(StrT(), (["x y"], ["z"]))
    assert execute_prefix(p, ds, TapPoint(0)) == ds


def test_wordcount_tap_pairs():
    b = build_wordcount()
    tap_ds = execute_prefix(b.pipeline, Dataset(StrT(), (["a b"],)), b.tap)
    assert _records(tap_ds) == [("a", 1), ("b", 1)]


def test_stock_duplicate_keys_rejected():
    b = build_stock()
    schema = b.pipeline.stage(b.tap.stage_id).input_schema
    ds = Dataset(schema, ([("AAA", [1.0, 2.0])], [("AAA", [3.0])]))
    with pytest.raises(ConstraintError):
        execute_from(b.pipeline, b.tap, ds)


def test_schema_mismatch_rejected():
    with pytest.raises(SchemaError):
        execute(_wordcount_pipeline(), Dataset(IntT(), ([1],)))


def test_udf_errors_wrapped():
    p = PipelineBuilder("boom", IntT(), 2).map(lambda x: 1 // x, IntT(), name="div").build()
    with pytest.raises(UdfError) as exc:
        execute(p, Dataset(IntT(), ([1], [0])))
    assert exc.value.stage_id == 0 and exc.value.partition == 1
    assert isinstance(exc.value.cause, ZeroDivisionError)


def test_shuffle_examples():
    recs = [(k, 1) for k in "abcdefg"]
    assert shuffle(recs, 1) == [recs]
    buckets = shuffle(recs, 3)
    assert sum(map(len, buckets)) == len(recs)
    for j, b in enumerate(buckets):
        assert all(stable_hash(k) % 3 == j for k, _ in b)


@settings(max_examples=100)
@given(pair_datasets(), st.integers(1, 5))
def test_shuffle_conserves_and_is_deterministic(ds, n):
    recs = list(ds.records())
    out = shuffle(recs, n)
    assert sum(map(len, out)) == len(recs)
    assert shuffle(recs, n) == out


def test_shuffle_metric_vector_covers_map_and_reduce_sides():
    p = _wordcount_pipeline(n=5)
    r = MetricsReport()
    execute(p, Dataset(StrT(), (["a b c"], ["d"])), r)
    s = p.stage("counts").stage_id
    assert len(r.extract(MetricKind.ShuffleReadRecords, s)) == 5
    assert r.extract(MetricKind.ShuffleWriteRecords, s)[:2] == [3, 1]


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_conservation_on_benchmarks(name):
    b = BUILDERS[name]()
    r = MetricsReport()
    execute(b.pipeline, GENERATORS[name](**SMALL_INPUTS[name]), r)
    for stage in b.pipeline.stages:
        if not stage.is_shuffle:
            continue
        for kind_w, kind_r in (
            (MetricKind.ShuffleWriteRecords, MetricKind.ShuffleReadRecords),
            (MetricKind.ShuffleWriteBytes, MetricKind.ShuffleReadBytes),
        ):
            assert sum(r.extract(kind_w, stage.stage_id)) == sum(r.extract(kind_r, stage.stage_id))


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_composition_on_benchmarks(name):
    b = BUILDERS[name]()
    seed = GENERATORS[name](**SMALL_INPUTS[name])
    whole = execute(b.pipeline, seed)
    for stage in b.pipeline.stages:
        tap = TapPoint(stage.stage_id)
        split = execute_from(b.pipeline, tap, execute_prefix(b.pipeline, seed, tap))
        assert split == whole, stage.name
