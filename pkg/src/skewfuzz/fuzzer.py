"""Feedback-guided fuzzing loops: UDF-level, program-level, phased and baseline."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataflow import Pipeline, TapPoint, execute, execute_from, execute_prefix
from .errors import SkewFuzzError
from .inverse import InverseRegistry, apply_inverse, default_registry
from .metrics import MetricKind, MetricsReport
from .monitors import MonitorBinding, Verdict
from .mutations import WeightedMutation, apply_mutation, chain_id, sample
from .values import Dataset

NOISY_METRICS = {MetricKind.JobExecutionTime}


@dataclass(frozen=True)
class Budget:
    max_iterations: int = 20_000
    max_wall_seconds: float = 600.0


@dataclass(frozen=True)
class Campaign:
    pipeline: Pipeline
    tap: TapPoint
    monitor: MonitorBinding
    seed: Dataset
    udf_mutations: tuple
    program_mutations: tuple
    inverse: str | None = None
    budget: Budget = Budget()
    rng_seed: int = 0
    registry: InverseRegistry | None = None
    repeats_for_noisy: int = 3

    def inverse_registry(self) -> InverseRegistry:
        return self.registry or default_registry()


@dataclass
class FuzzResult:
    triggered: bool
    triggering_dataset: Dataset | None
    iterations: int
    elapsed_ns: int
    score_series: list = field(default_factory=list)
    mutation_log: list = field(default_factory=list)
    best_score: float = float("-inf")
    best_dataset: Dataset | None = None
    errors: int = 0
    final_score: float | None = None


@dataclass
class PhasedResult:
    udf: FuzzResult
    lift_elapsed_ns: int
    program: FuzzResult | None
    lifted: Dataset | None
    total_elapsed_ns: int

    @property
    def triggered(self) -> bool:
        return self.program is not None and self.program.triggered

    @property
    def total_iterations(self) -> int:
        return self.udf.iterations + (self.program.iterations if self.program else 0)


Runner = Callable[[Dataset, MetricsReport], object]


class _Evaluator:
    """Runs a candidate and judges it; noisy metrics use the median of several runs."""

    def __init__(self, run: Runner, monitor: MonitorBinding, repeats: int):
        self.run = run
        self.monitor = monitor
        self.repeats = repeats if monitor.metric in NOISY_METRICS else 1

    def once(self, ds: Dataset) -> Verdict:
        report = MetricsReport()
        self.run(ds, report)
        return self.monitor.check(report)

    def __call__(self, ds: Dataset) -> Verdict:
        first = self.once(ds)
        if self.repeats == 1 or not first.triggered:
            return first
        # Majority vote: the median of an odd number of runs clears the
        # threshold exactly when most runs do.
        scores = [first.score] + [self.once(ds).score for _ in range(self.repeats - 1)]
        score = statistics.median(scores)
        return Verdict(bool(score >= self.monitor.template.threshold), score)


def fuzz_loop(
    initial: Dataset,
    run: Runner,
    mutations,
    monitor: MonitorBinding,
    budget: Budget,
    rng: np.random.Generator,
    repeats_for_noisy: int = 3,
) -> FuzzResult:
    """Mutate queued inputs until the monitor triggers or the budget runs out.

    Iteration 0 evaluates ``initial`` unchanged. Every later iteration picks a
    queued input uniformly, applies one sampled mutation chain and evaluates
    the result. Inputs that beat the best score so far join the queue.
    Candidates that fail to run are dropped but still use up an iteration.
    """
    evaluate = _Evaluator(run, monitor, repeats_for_noisy)
    t0 = time.perf_counter_ns()
    deadline = t0 + int(budget.max_wall_seconds * 1e9)

    verdict = evaluate(initial)
    best, best_ds = verdict.score, initial
    res = FuzzResult(False, None, 0, 0, [(time.perf_counter_ns() - t0, best)], [], best, initial)
    if verdict.triggered:
        res.triggered, res.triggering_dataset, res.final_score = True, initial, verdict.score
        res.elapsed_ns = time.perf_counter_ns() - t0
        return res

    queue = [initial]
    it = 0
    while it < budget.max_iterations and time.perf_counter_ns() < deadline:
        it += 1
        parent = queue[int(rng.integers(0, len(queue)))]
        chain = sample(mutations, rng)
        res.mutation_log.append(chain_id(chain))
        try:
            cand = apply_mutation(chain, parent, rng)
            verdict = evaluate(cand)
        except SkewFuzzError:
            res.errors += 1
            continue
        if verdict.triggered or verdict.score > best:
            if verdict.score > best:
                best, best_ds = verdict.score, cand
                res.score_series.append((time.perf_counter_ns() - t0, best))
            if verdict.triggered:
                res.triggered, res.triggering_dataset, res.final_score = True, cand, verdict.score
                break
            queue.append(cand)

    res.iterations = it
    res.best_score, res.best_dataset = best, best_ds
    res.elapsed_ns = time.perf_counter_ns() - t0
    return res


def _udf_runner(campaign: Campaign) -> Runner:
    return lambda ds, report: execute_from(campaign.pipeline, campaign.tap, ds, report)


def _program_runner(campaign: Campaign) -> Runner:
    return lambda ds, report: execute(campaign.pipeline, ds, report)


def fuzz_udf(campaign: Campaign, rng: np.random.Generator | None = None) -> FuzzResult:
    rng = rng if rng is not None else np.random.default_rng(campaign.rng_seed)
    initial = execute_prefix(campaign.pipeline, campaign.seed, campaign.tap)
    return fuzz_loop(
        initial, _udf_runner(campaign), campaign.udf_mutations, campaign.monitor,
        campaign.budget, rng, campaign.repeats_for_noisy,
    )


def lift(campaign: Campaign, udf_input: Dataset) -> tuple[Dataset, int]:
    if campaign.inverse is None:
        raise SkewFuzzError("campaign has no inverse function configured")
    t0 = time.perf_counter_ns()
    lifted = apply_inverse(campaign.inverse_registry(), campaign.inverse, udf_input)
    return lifted, time.perf_counter_ns() - t0


def fuzz_program(campaign: Campaign, start: Dataset, rng: np.random.Generator | None = None) -> FuzzResult:
    rng = rng if rng is not None else np.random.default_rng(campaign.rng_seed)
    return fuzz_loop(
        start, _program_runner(campaign), campaign.program_mutations, campaign.monitor,
        campaign.budget, rng, campaign.repeats_for_noisy,
    )


def run_phased(campaign: Campaign) -> PhasedResult:
    """UDF fuzzing, then lifting, then program fuzzing seeded with the lifted input."""
    t0 = time.perf_counter_ns()
    rng = np.random.default_rng(campaign.rng_seed)
    udf = fuzz_udf(campaign, rng)
    if not udf.triggered:
        return PhasedResult(udf, 0, None, None, time.perf_counter_ns() - t0)
    lifted, lift_ns = lift(campaign, udf.triggering_dataset)
    program = fuzz_program(campaign, lifted, rng)
    return PhasedResult(udf, lift_ns, program, lifted, time.perf_counter_ns() - t0)


def run_baseline(campaign: Campaign) -> FuzzResult:
    """Program-level fuzzing from the original seed with string mutations only."""
    return fuzz_program(campaign, campaign.seed, np.random.default_rng(campaign.rng_seed))
