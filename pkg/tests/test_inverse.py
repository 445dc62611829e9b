from collections import Counter

import pytest

from skewfuzz import benchmarks as B
from skewfuzz.dataflow import execute_prefix
from skewfuzz.errors import InverseError, RegistryError, SchemaError
from skewfuzz.inverse import (
    InverseRegistry,
    PseudoInverse,
    apply_inverse,
    default_registry,
    multiset_jaccard,
    validate_inverse,
)
from skewfuzz.values import CollectionT, Dataset, FloatT, IntT, StrT, TupleT

REG = default_registry()
COLLATZ = TupleT(IntT(), CollectionT(IntT()))


def test_shipped_ids():
    assert sorted(REG.ids()) == [
        "collatz.flatten",
        "deptgpas.course_per_record",
        "stock.chrono_fill",
        "wordcount.lines50",
    ]


def test_collatz_flatten():
    ds = Dataset(COLLATZ, ([(474680340, [1])], [(2, [1])], [(3, [1])], [(4, [1])]))
    out = apply_inverse(REG, "collatz.flatten", ds)
    assert list(out.records()) == ["474680340", "2", "3", "4"]


def test_wordcount_lines():
    pairs = Dataset(TupleT(StrT(), IntT()), ([(f"w{i}", 1) for i in range(120)],))
    out = apply_inverse(REG, "wordcount.lines50", pairs)
    assert [len(line.split()) for line in out.records()] == [50, 50, 20]


def test_stock_lines():
    ds = Dataset(TupleT(StrT(), CollectionT(FloatT())), ([("AB", [1.5, 0.25])],))
    out = apply_inverse(REG, "stock.chrono_fill", ds)
    assert list(out.records()) == ["AB,1970-01-01,0,0,0,1.5,0,0", "AB,1970-01-02,0,0,0,0.25,0,0"]


def test_stock_lift_preserves_price_order():
    b = B.build_stock()
    prices = [float(x) for x in range(400, 0, -1)]
    ds = Dataset(TupleT(StrT(), CollectionT(FloatT())), ([("Z", prices)],))
    rep = validate_inverse(REG, "stock.chrono_fill", ds, b.pipeline)
    assert list(rep.rederived.records()) == [("Z", prices)]


def test_collatz_validation():
    b = B.build_collatz()
    rep = validate_inverse(REG, "collatz.flatten", Dataset(COLLATZ, ([(3, [1])],)), b.pipeline)
    assert rep.schema_ok and rep.key_overlap == 1.0
    assert list(rep.rederived.records()) == [(3, [1])]


def test_deptgpas_is_only_approximate():
    b = B.build_deptgpas()
    sample = Dataset(TupleT(StrT(), FloatT()), ([("EE", 80.7)],))
    out = apply_inverse(REG, "deptgpas.course_per_record", sample)
    assert list(out.records()) == ["42,EE0,80"]
    rep = validate_inverse(REG, "deptgpas.course_per_record", sample, b.pipeline)
    assert rep.schema_ok and rep.key_overlap == 1.0
    assert list(rep.rederived.records()) == [("EE", 80.0)]


def test_empty_sample():
    b = B.build_collatz()
    rep = validate_inverse(REG, "collatz.flatten", Dataset(COLLATZ, ([],)), b.pipeline)
    assert rep.schema_ok and rep.key_overlap == 1.0


def test_multiset_jaccard():
    assert multiset_jaccard(Counter("aab"), Counter("ab")) == pytest.approx(2 / 3)
    assert multiset_jaccard(Counter(), Counter()) == 1.0


def test_registry_errors():
    reg = InverseRegistry()
    with pytest.raises(RegistryError):
        reg.get("nope")
    inv = PseudoInverse("bad", "p", 0, IntT(), StrT(), lambda ds: 1 / 0, "")
    reg.register(inv)
    with pytest.raises(RegistryError):
        reg.register(inv)
    with pytest.raises(InverseError):
        apply_inverse(reg, "bad", Dataset(IntT(), ([1],)))
    with pytest.raises(SchemaError):
        apply_inverse(reg, "bad", Dataset(StrT(), (["x"],)))


def test_inverse_output_schema_checked():
    reg = InverseRegistry()
    reg.register(PseudoInverse("wrong", "p", 0, IntT(), StrT(), lambda ds: ds, ""))
    with pytest.raises(SchemaError):
        apply_inverse(reg, "wrong", Dataset(IntT(), ([1],)))


def test_round_trip_keys_on_generated_seed():
    b = B.build_wordcount()
    tap = execute_prefix(b.pipeline, B.gen_wordcount(n_partitions=2, lines_per_partition=5), b.tap)
    rep = validate_inverse(REG, "wordcount.lines50", tap, b.pipeline)
    assert rep.schema_ok and rep.key_overlap == 1.0
