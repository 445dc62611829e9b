"""Benchmark programs, their compute kernels, input generators and inverses."""

from __future__ import annotations

import datetime as _dt
import math
import re
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import metrics
from .dataflow import Pipeline, PipelineBuilder, TapPoint
from .errors import DomainError
from .fuzzer import Budget, Campaign
from .inverse import InverseRegistry, PseudoInverse
from .metrics import Custom, Metric, MetricKind, primary_category
from .monitors import MonitorBinding, MonitorTemplate, NextComparison, Skewness
from .mutations import MutationConfig, derive_mutations
from .values import CollectionT, Dataset, FloatT, IntT, StrT, TupleT, read_text_dir

# Kernels


def collatz_length(n: int) -> int:
    """Number of 3n+1 steps needed to reach 1."""
    if n < 1:
        raise DomainError(f"collatz_length needs n >= 1, got {n}")
    steps = 0
    while n != 1:
        n = n >> 1 if n % 2 == 0 else 3 * n + 1
        steps += 1
    return steps


COLLATZ_MODULUS = 1_000_003


def solve_collatz(n: int, work_scale: float = 1.0) -> int:
    """Busy loop of work_scale * L**3 steps, L being the Collatz length of ``n``."""
    length = collatz_length(n)
    acc = 0
    for i in range(int(work_scale * length**3)):
        acc = (acc + i) % COLLATZ_MODULUS
    return acc


PROFIT_COUNTER = "maxProfitIncrements"


def max_profit_k3(prices: Sequence[float], on_increment: Callable[[], None] | None = None) -> float:
    """Best profit from at most three buy/sell transactions.

    ``on_increment`` is called once per price at which the best profit so far
    strictly increases.
    """
    b1 = b2 = b3 = -math.inf
    s1 = s2 = s3 = 0.0
    for p in prices:
        b1 = max(b1, -p)
        s1 = max(s1, b1 + p)
        b2 = max(b2, s1 - p)
        s2 = max(s2, b2 + p)
        b3 = max(b3, s2 - p)
        best = max(s3, b3 + p)
        if best > s3 and on_increment is not None:
            on_increment()
        s3 = best
    return s3


def median(values: Sequence[float]) -> float:
    vs = sorted(values)
    n = len(vs)
    if n == 0:
        raise DomainError("median of an empty collection")
    mid = n // 2
    return float(vs[mid]) if n % 2 else (vs[mid - 1] + vs[mid]) / 2.0


_NUMBER = re.compile(r"-?\d+(\.\d*)?([eE][-+]?\d+)?")


def _parse_number(text: str) -> float | None:
    text = text.strip()
    if text.isascii() and _NUMBER.fullmatch(text):
        value = float(text)
        if math.isfinite(value):
            return value
    return None


_DEPT = re.compile(r"[A-Za-z]*")


def department(course: str) -> str:
    """Leading run of ASCII letters of a course id."""
    return _DEPT.match(course).group(0)


@dataclass(frozen=True)
class Benchmark:
    """A program together with its default tap, symptom and lifting function."""

    name: str
    pipeline: Pipeline
    tap: TapPoint
    monitor: MonitorBinding
    inverse: str
    mutation_config: MutationConfig = MutationConfig()

    @property
    def metric(self) -> Metric:
        return self.monitor.metric

    def udf_mutations(self, config: MutationConfig | None = None):
        cfg = config or self.mutation_config
        stage = self.pipeline.stage(self.tap.stage_id)
        return derive_mutations(stage.input_schema, primary_category(self.metric), cfg, self.tap.keys_unique)

    def program_mutations(self, config: MutationConfig | None = None):
        cfg = config or self.mutation_config
        return derive_mutations(self.pipeline.input_schema, None, replace(cfg, disable=frozenset(), weight_overrides={}))

    def campaign(
        self,
        seed: Dataset,
        budget: Budget = Budget(),
        rng_seed: int = 0,
        mutation_config: MutationConfig | None = None,
        template: MonitorTemplate | None = None,
    ) -> Campaign:
        monitor = self.monitor if template is None else replace(self.monitor, template=template)
        return Campaign(
            pipeline=self.pipeline,
            tap=self.tap,
            monitor=monitor,
            seed=seed,
            udf_mutations=tuple(self.udf_mutations(mutation_config)),
            program_mutations=tuple(self.program_mutations(mutation_config)),
            inverse=self.inverse,
            budget=budget,
            rng_seed=rng_seed,
        )


# Collatz


def _parse_ints(line: str) -> list[int]:
    out = []
    for tok in line.split():
        if tok.isascii() and tok.isdigit():
            n = int(tok)
            if 1 <= n < 2**63:
                out.append(n)
    return out


def build_collatz(work_scale: float = 1.0, n_shuffle_partitions: int = 4) -> Benchmark:
    def solved(rec):
        k, vs = rec
        return (k, sum(solve_collatz(k, work_scale) for _ in vs))

    pipeline = (
        PipelineBuilder("collatz", StrT(), n_shuffle_partitions)
        .flat_map(_parse_ints, IntT(), name="parse")
        .map(lambda i: (i, 1), TupleT(IntT(), IntT()), name="pairs")
        .group_by_key(name="grouped")
        .map(solved, TupleT(IntT(), IntT()), name="solved")
        .reduce_by_key(lambda a, b: a + b, name="sums")
        .build()
    )
    tap = TapPoint(pipeline.stage("solved").stage_id, keys_unique=True)
    monitor = MonitorBinding(NextComparison(5.0), MetricKind.JobExecutionTime, tap.stage_id)
    return Benchmark("collatz", pipeline, tap, monitor, "collatz.flatten")


def gen_collatz_seed() -> Dataset:
    return Dataset(StrT(), (["1"], ["2"], ["3"], ["4"]))


def _collatz_flatten(ds: Dataset) -> Dataset:
    return Dataset(StrT(), tuple([str(k) for k, vs in part for _ in vs] for part in ds.partitions))


# WordCount


def _words(line: str) -> list[str]:
    return line.split()


def build_wordcount(n_shuffle_partitions: int = 20) -> Benchmark:
    pipeline = (
        PipelineBuilder("wordcount", StrT(), n_shuffle_partitions)
        .flat_map(_words, StrT(), name="split")
        .map(lambda w: (w, 1), TupleT(StrT(), IntT()), name="pairs")
        .reduce_by_key(lambda a, b: a + b, name="counts")
        .build()
    )
    tap = TapPoint(pipeline.stage("counts").stage_id)
    monitor = MonitorBinding(Skewness(2.0), MetricKind.ShuffleWriteRecords, tap.stage_id)
    config = MutationConfig(disable={"value"}, duplication_factor=0.01)
    return Benchmark("wordcount", pipeline, tap, monitor, "wordcount.lines50", config)


def _pseudo_word(rng: np.random.Generator) -> str:
    letters = "abcdefghijklmnopqrstuvwxyz"
    return "".join(letters[i] for i in rng.integers(0, 26, int(rng.integers(3, 9))))


def gen_wordcount(
    n_partitions: int = 20,
    lines_per_partition: int = 100,
    words_per_line: int = 20,
    vocabulary: int = 4000,
    zipf_exponent: float = 1.1,
    rng_seed: int = 0,
) -> Dataset:
    """Random sentences over a Zipf-distributed vocabulary of pseudo-words."""
    rng = np.random.default_rng(rng_seed)
    vocab: list[str] = []
    seen = set()
    while len(vocab) < vocabulary:
        w = _pseudo_word(rng)
        if w not in seen:
            seen.add(w)
            vocab.append(w)
    ranks = np.arange(1, vocabulary + 1, dtype=float)
    probs = ranks**-zipf_exponent
    probs /= probs.sum()
    parts = []
    for _ in range(n_partitions):
        draws = rng.choice(vocabulary, size=(lines_per_partition, words_per_line), p=probs)
        parts.append([" ".join(vocab[i] for i in row) for row in draws])
    return Dataset(StrT(), tuple(parts))


def gen_wordcount_sample(path, n_partitions: int | None = 20) -> Dataset:
    """Load a user-supplied text corpus (a directory of part files), one sentence or paragraph per line."""
    return read_text_dir(path, n_partitions)


WORDS_PER_LINE = 50


def _wordcount_lines(ds: Dataset) -> Dataset:
    parts = []
    for part in ds.partitions:
        words = [w for w, _ in part]
        parts.append([" ".join(words[i : i + WORDS_PER_LINE]) for i in range(0, len(words), WORDS_PER_LINE)])
    return Dataset(StrT(), tuple(parts))


# DeptGPAs


def _parse_grade_line(line: str) -> list:
    fields = line.split(",")
    if len(fields) != 3:
        return []
    grade = _parse_number(fields[2])
    if grade is None:
        return []
    return [(fields[1], (grade, 1))]


def _pair_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def build_deptgpas(n_shuffle_partitions: int = 40) -> Benchmark:
    pipeline = (
        PipelineBuilder("deptgpas", StrT(), n_shuffle_partitions)
        .flat_map(_parse_grade_line, TupleT(StrT(), TupleT(FloatT(), IntT())), name="parse")
        .reduce_by_key(_pair_add, name="courseTotals")
        .map(lambda r: (department(r[0]), r[1][0] / r[1][1]), TupleT(StrT(), FloatT()), name="courseAvg")
        .group_by_key(name="deptGroups")
        .map(lambda r: (r[0], median(r[1])), TupleT(StrT(), FloatT()), name="deptMedian")
        .build()
    )
    tap = TapPoint(pipeline.stage("deptGroups").stage_id)
    monitor = MonitorBinding(NextComparison(100.0), MetricKind.ShuffleReadRecords, tap.stage_id)
    config = MutationConfig(duplication_factor=5.0, float_range=(0.0, 4.0))
    return Benchmark("deptgpas", pipeline, tap, monitor, "deptgpas.course_per_record", config)


DEPARTMENTS = ("Physics", "MATH", "STATS", "EE", "CS")


def gen_deptgpas(
    n_partitions: int = 40,
    records_per_partition: int = 5000,
    departments: Sequence[str] = DEPARTMENTS,
    courses_per_department: int = 20,
    students: int = 200,
    rng_seed: int = 0,
) -> Dataset:
    """Lines of ``studentID,courseID,grade`` with integer grades 0 to 4."""
    rng = np.random.default_rng(rng_seed)
    courses = [f"{d}{100 + i}" for d in departments for i in range(courses_per_department)]
    parts = []
    for _ in range(n_partitions):
        sid = rng.integers(0, students, records_per_partition)
        cid = rng.integers(0, len(courses), records_per_partition)
        grade = rng.integers(0, 5, records_per_partition)
        parts.append([f"{s},{courses[c]},{g}" for s, c, g in zip(sid, cid, grade)])
    return Dataset(StrT(), tuple(parts))


def _grade(avg: float) -> int:
    # Truncate like an integer cast, so ("EE", 80.7) lifts to grade 80.
    return int(avg) if math.isfinite(avg) else 0


def _deptgpas_lines(ds: Dataset) -> Dataset:
    parts = []
    j = 0
    for part in ds.partitions:
        lines = []
        for dept, avg in part:
            lines.append(f"42,{dept}{j},{_grade(avg)}")
            j += 1
        parts.append(lines)
    return Dataset(StrT(), tuple(parts))


# Stock buy and sell


def _parse_stock_line(line: str) -> list:
    fields = line.split(",")
    if len(fields) != 8:
        return []
    close = _parse_number(fields[5])
    if close is None:
        return []
    return [(fields[0], (fields[1], close))]


def _chronological(rec):
    sym, quotes = rec
    return (sym, [c for _, c in sorted(quotes, key=lambda q: q[0])])


def _profit(rec):
    sym, prices = rec
    return (sym, max_profit_k3(prices, lambda: metrics.increment(PROFIT_COUNTER)))


def build_stock(n_shuffle_partitions: int = 20) -> Benchmark:
    pipeline = (
        PipelineBuilder("stock", StrT(), n_shuffle_partitions)
        .flat_map(_parse_stock_line, TupleT(StrT(), TupleT(StrT(), FloatT())), name="parse")
        .group_by_key(name="bySymbol")
        .map(_chronological, TupleT(StrT(), CollectionT(FloatT())), name="chronological")
        .map(_profit, TupleT(StrT(), FloatT()), name="profit", counters=(PROFIT_COUNTER,))
        .build()
    )
    tap = TapPoint(pipeline.stage("profit").stage_id, keys_unique=True)
    monitor = MonitorBinding(NextComparison(5.0), Custom(PROFIT_COUNTER), tap.stage_id)
    # Element mutations outweigh concatenation 5:1, as in the original setup.
    config = MutationConfig(disable={"key"}, weight_overrides={"M10+M7+M5+M2": 5.0})
    return Benchmark("stock", pipeline, tap, monitor, "stock.chrono_fill", config)


EPOCH = _dt.date(1970, 1, 1)


def gen_stock(
    n_symbols: int = 20,
    n_days: int = 100,
    n_partitions: int = 20,
    start_price: float = 50.0,
    volatility: float = 0.02,
    drift: float = -0.01,
    rng_seed: int = 0,
) -> Dataset:
    """Daily quote lines ``symbol,date,open,high,low,close,adj,volume`` from random walks.

    The default slight downward drift keeps per-symbol profit-increase counts
    low, so no partition starts out dominant.
    """
    rng = np.random.default_rng(rng_seed)
    lines = []
    for s in range(n_symbols):
        sym = "S" + "".join("ABCDEFGHIJKLMNOPQRSTUVWXYZ"[i] for i in rng.integers(0, 26, 3)) + str(s)
        price = start_price * float(np.exp(rng.normal(0, 0.3)))
        for d in range(n_days):
            price *= float(np.exp(rng.normal(drift, volatility)))
            date = (EPOCH + _dt.timedelta(days=10_000 + d)).isoformat()
            close = round(price, 2)
            vol = int(rng.integers(1_000, 100_000))
            lines.append(f"{sym},{date},{close},{close},{close},{close},{close},{vol}")
    order = rng.permutation(len(lines))
    parts = [[] for _ in range(n_partitions)]
    for pos, idx in enumerate(order):
        parts[pos % n_partitions].append(lines[idx])
    return Dataset(StrT(), tuple(parts))


def gen_stock_sample(path, n_partitions: int | None = 20) -> Dataset:
    """Load quote lines ``Symbol,Date,Open,High,Low,Close,Volume,OpenInt`` from a directory of part files."""
    return read_text_dir(path, n_partitions)


def _stock_lines(ds: Dataset) -> Dataset:
    parts = []
    for part in ds.partitions:
        lines = []
        for sym, prices in part:
            for i, p in enumerate(prices):
                date = (EPOCH + _dt.timedelta(days=i)).isoformat()
                lines.append(f"{sym},{date},0,0,0,{p!r},0,0")
        parts.append(lines)
    return Dataset(StrT(), tuple(parts))


def register_inverses(registry: InverseRegistry) -> None:
    pairs = TupleT(StrT(), IntT())
    registry.register(PseudoInverse(
        "collatz.flatten", "collatz", 3, TupleT(IntT(), CollectionT(IntT())), StrT(), _collatz_flatten,
        "one line per group element holding the key",
    ))
    registry.register(PseudoInverse(
        "wordcount.lines50", "wordcount", 2, pairs, StrT(), _wordcount_lines,
        "words joined into lines of at most 50",
    ))
    registry.register(PseudoInverse(
        "deptgpas.course_per_record", "deptgpas", 3, TupleT(StrT(), FloatT()), StrT(), _deptgpas_lines,
        "one single-grade course per record",
    ))
    registry.register(PseudoInverse(
        "stock.chrono_fill", "stock", 3, TupleT(StrT(), CollectionT(FloatT())), StrT(), _stock_lines,
        "one dated quote per price",
    ))


BUILDERS = {
    "collatz": build_collatz,
    "wordcount": build_wordcount,
    "deptgpas": build_deptgpas,
    "stock": build_stock,
}

GENERATORS = {
    "collatz": gen_collatz_seed,
    "wordcount": gen_wordcount,
    "deptgpas": gen_deptgpas,
    "stock": gen_stock,
}
