"""Campaign configuration files (TOML).

A config names a benchmark and optionally overrides its tap, symptom,
mutation settings, budgets and input source::

    benchmark = "deptgpas"
    rng_seed = 3

    [monitor]
    template = "NextComparison"
    threshold = 100.0
    metric = "ShuffleReadRecords"
    stage = "deptGroups"

    [mutations]
    duplication_factor = 5.0
    weight_overrides = { M13 = 5.0 }

    [budget]
    max_iterations = 10000
    max_wall_seconds = 600

    [input]
    params = { records_per_partition = 25 }
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .benchmarks import BUILDERS, GENERATORS, Benchmark
from .dataflow import TapPoint
from .errors import ConfigError, MetricError, MonitorError, MutationConfigError
from .fuzzer import Budget, Campaign
from .metrics import parse_metric
from .monitors import MonitorBinding, make_template
from .mutations import MutationConfig
from .values import Dataset, read_text_dir

_TOP_KEYS = {"benchmark", "rng_seed", "inverse", "benchmark_params", "tap", "monitor", "mutations", "budget", "input"}


@dataclass
class CampaignConfig:
    benchmark: Benchmark
    mutation_config: MutationConfig
    budget: Budget
    rng_seed: int = 0
    input_params: dict = field(default_factory=dict)
    input_dir: str | None = None
    input_partitions: int | None = None
    source: str = "<memory>"

    def seed(self, input_dir: str | None = None) -> Dataset:
        directory = input_dir or self.input_dir
        if directory is not None:
            return read_text_dir(directory, self.input_partitions)
        return GENERATORS[self.benchmark.name](**self.input_params)

    def campaign(self, seed: Dataset | None = None, **overrides) -> Campaign:
        seed = seed if seed is not None else self.seed()
        c = self.benchmark.campaign(seed, self.budget, self.rng_seed, self.mutation_config)
        return replace(c, **overrides) if overrides else c


def _table(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{key}] must be a table")
    return value


def _stage_id(bench: Benchmark, ref) -> int:
    try:
        return bench.pipeline.stage(ref).stage_id
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


def from_dict(doc: dict[str, Any], source: str = "<memory>") -> CampaignConfig:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    name = doc.get("benchmark")
    if name not in BUILDERS:
        raise ConfigError(f"benchmark must be one of {sorted(BUILDERS)}, got {name!r}")
    try:
        bench = BUILDERS[name](**_table(doc, "benchmark_params"))
    except TypeError as exc:
        raise ConfigError(f"bad benchmark_params: {exc}") from None

    tap_doc = _table(doc, "tap")
    if tap_doc:
        tap = TapPoint(
            _stage_id(bench, tap_doc.get("stage", bench.tap.stage_id)),
            bool(tap_doc.get("keys_unique", bench.tap.keys_unique)),
        )
        bench = replace(bench, tap=tap)

    mon = _table(doc, "monitor")
    if mon:
        try:
            template = make_template(
                mon.get("template", bench.monitor.template.name),
                mon.get("threshold", bench.monitor.template.threshold),
            )
            metric = parse_metric(mon["metric"]) if "metric" in mon else bench.monitor.metric
        except (MonitorError, MetricError) as exc:
            raise ConfigError(str(exc)) from None
        stage = _stage_id(bench, mon.get("stage", bench.monitor.stage_id))
        bench = replace(bench, monitor=MonitorBinding(template, metric, stage))

    if "inverse" in doc:
        bench = replace(bench, inverse=str(doc["inverse"]))

    mut = _table(doc, "mutations")
    base = bench.mutation_config
    try:
        mcfg = MutationConfig(
            disable=frozenset(mut.get("disable", base.disable)),
            duplication_factor=float(mut.get("duplication_factor", base.duplication_factor)),
            weight_overrides=mut.get("weight_overrides", base.weight_overrides),
            float_range=tuple(mut.get("float_range", base.float_range)),
            int_range=tuple(mut.get("int_range", base.int_range)),
        )
    except (MutationConfigError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad [mutations]: {exc}") from None
    bench = replace(bench, mutation_config=mcfg)

    b = _table(doc, "budget")
    budget = Budget(int(b.get("max_iterations", 20_000)), float(b.get("max_wall_seconds", 600.0)))
    if budget.max_iterations < 0 or budget.max_wall_seconds <= 0:
        raise ConfigError("budgets must be non-negative iterations and positive seconds")

    inp = _table(doc, "input")
    return CampaignConfig(
        benchmark=bench,
        mutation_config=mcfg,
        budget=budget,
        rng_seed=int(doc.get("rng_seed", 0)),
        input_params=dict(inp.get("params", {})),
        input_dir=inp.get("dir"),
        input_partitions=inp.get("n_partitions"),
        source=source,
    )


def load(path: str | Path) -> CampaignConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return from_dict(doc, str(path))


def shipped(name: str) -> Path:
    """Path of a config file bundled with the package, e.g. ``shipped("collatz")``."""
    path = Path(__file__).parent / "configs" / f"{name}.toml"
    if not path.exists():
        raise ConfigError(f"no shipped config named {name!r}")
    return path
