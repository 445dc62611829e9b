"""Command line entry point: ``skewfuzz {fuzz,baseline,run,sweep,gen}``.

Exit codes: 0 when a symptom was triggered (or the command succeeded),
2 when the budget ran out without triggering, 1 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from dataclasses import replace
from pathlib import Path

from . import config as cfgmod
from .benchmarks import GENERATORS
from .dataflow import execute
from .errors import SkewFuzzError
from .fuzzer import Budget, FuzzResult, PhasedResult, run_baseline, run_phased
from .metrics import MetricsReport
from .values import Dataset, write_text_dir

EXIT_TRIGGERED = 0
EXIT_CONFIG = 1
EXIT_EXHAUSTED = 2


def _campaign_config(args) -> cfgmod.CampaignConfig:
    cc = cfgmod.load(args.config)
    if args.rng_seed is not None:
        cc.rng_seed = args.rng_seed
    if args.max_iterations is not None or args.time_budget_secs is not None:
        cc.budget = Budget(
            args.max_iterations if args.max_iterations is not None else cc.budget.max_iterations,
            args.time_budget_secs if args.time_budget_secs is not None else cc.budget.max_wall_seconds,
        )
    if getattr(args, "input_dir", None):
        cc.input_dir = args.input_dir
    return cc


def _ms(ns: int) -> float:
    return round(ns / 1e6, 3)


def _series(parts: list[tuple[int, list]]) -> list[tuple[float, float]]:
    """Concatenate phase series with time offsets, keeping both columns non-decreasing."""
    rows, best = [], float("-inf")
    for offset, series in parts:
        for t, score in series:
            best = max(best, score)
            rows.append((_ms(offset + t), best))
    return rows


def _write_outputs(out: Path, result: dict, series, triggering: Dataset | None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if triggering is not None:
        path = out / "triggering_input"
        write_text_dir(triggering, path)
        result["triggering_input_path"] = str(path)
    with open(out / "result.json", "w") as fh:
        json.dump(result, fh, indent=2)
    with open(out / "series.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["elapsed_ms", "best_score"])
        w.writerows(series)


def _finite(x):
    return x if x is None or abs(x) != float("inf") else ("inf" if x > 0 else "-inf")


def _phased_summary(ph: PhasedResult, threshold: float) -> dict:
    best = ph.program.best_score if ph.program else ph.udf.best_score
    return {
        "mode": "phased",
        "triggered": ph.triggered,
        "udf_iterations": ph.udf.iterations,
        "program_iterations": ph.program.iterations if ph.program else 0,
        "udf_elapsed_ms": _ms(ph.udf.elapsed_ns),
        "inverse_elapsed_ms": _ms(ph.lift_elapsed_ns),
        "program_elapsed_ms": _ms(ph.program.elapsed_ns) if ph.program else 0.0,
        "best_score": _finite(best),
        "udf_best_score": _finite(ph.udf.best_score),
        "threshold": threshold,
        "triggering_input_path": None,
    }


def _baseline_summary(res: FuzzResult, threshold: float) -> dict:
    return {
        "mode": "baseline",
        "triggered": res.triggered,
        "udf_iterations": 0,
        "program_iterations": res.iterations,
        "udf_elapsed_ms": 0.0,
        "inverse_elapsed_ms": 0.0,
        "program_elapsed_ms": _ms(res.elapsed_ns),
        "best_score": _finite(res.best_score),
        "threshold": threshold,
        "triggering_input_path": None,
    }


def cmd_fuzz(args) -> int:
    cc = _campaign_config(args)
    campaign = cc.campaign(cc.seed())
    ph = run_phased(campaign)
    parts = [(0, ph.udf.score_series)]
    if ph.program:
        parts.append((ph.udf.elapsed_ns + ph.lift_elapsed_ns, ph.program.score_series))
    summary = _phased_summary(ph, campaign.monitor.template.threshold)
    triggering = ph.program.triggering_dataset if ph.program else None
    _write_outputs(Path(args.output), summary, _series(parts), triggering)
    print(json.dumps(summary, indent=2))
    return EXIT_TRIGGERED if ph.triggered else EXIT_EXHAUSTED


def cmd_baseline(args) -> int:
    cc = _campaign_config(args)
    campaign = cc.campaign(cc.seed())
    res = run_baseline(campaign)
    summary = _baseline_summary(res, campaign.monitor.template.threshold)
    _write_outputs(Path(args.output), summary, _series([(0, res.score_series)]), res.triggering_dataset)
    print(json.dumps(summary, indent=2))
    return EXIT_TRIGGERED if res.triggered else EXIT_EXHAUSTED


def cmd_run(args) -> int:
    cc = _campaign_config(args)
    bench = cc.benchmark
    report = MetricsReport()
    execute(bench.pipeline, cc.seed(), report)
    verdict = bench.monitor.check(report)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(report.to_json())
    print(json.dumps({"triggered": verdict.triggered, "score": _finite(verdict.score),
                      "threshold": bench.monitor.template.threshold}))
    return EXIT_TRIGGERED


def cmd_sweep(args) -> int:
    cc = _campaign_config(args)
    weights = [float(w) for w in args.weights.split(",")]
    ops = [o.strip() for o in args.ops.split(",") if o.strip()]
    seed = cc.seed()
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for w in weights:
        overrides = dict(cc.mutation_config.weight_overrides)
        overrides.update({op: w for op in ops})
        try:
            mcfg = replace(cc.mutation_config, weight_overrides=overrides)
        except SkewFuzzError as exc:
            raise cfgmod.ConfigError(str(exc)) from None
        for rep in range(args.repetitions):
            campaign = cc.benchmark.campaign(seed, cc.budget, cc.rng_seed + rep, mcfg)
            ph = run_phased(campaign)
            rows.append((w, rep, ph.total_iterations, _ms(ph.total_elapsed_ns), ph.triggered))
            print(f"weight={w:g} rep={rep} iterations={ph.total_iterations} triggered={ph.triggered}", flush=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["weight", "repetition", "iterations", "elapsed_ms", "triggered"])
        wr.writerows(rows)
    for w in weights:
        its = [r[2] for r in rows if r[0] == w]
        print(f"weight={w:g} median_iterations={statistics.median(its)}")
    return EXIT_TRIGGERED


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        key, _, raw = item.partition("=")
        if not _:
            raise cfgmod.ConfigError(f"--param expects key=value, got {item!r}")
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return params


def cmd_gen(args) -> int:
    if args.benchmark not in GENERATORS:
        raise cfgmod.ConfigError(f"unknown benchmark {args.benchmark!r}; choose from {sorted(GENERATORS)}")
    try:
        ds = GENERATORS[args.benchmark](**_parse_params(args.param))
    except TypeError as exc:
        raise cfgmod.ConfigError(f"bad generator parameter: {exc}") from None
    path = write_text_dir(ds, args.output)
    print(f"wrote {ds.n_partitions} partitions, {len(ds)} records to {path}")
    return EXIT_TRIGGERED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewfuzz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def campaign_args(p, output_default):
        p.add_argument("--config", required=True, help="campaign TOML file")
        p.add_argument("--rng-seed", type=int)
        p.add_argument("--max-iterations", type=int)
        p.add_argument("--time-budget-secs", type=float)
        p.add_argument("--input-dir", help="directory of part-NNNNN text files")
        p.add_argument("--output", default=output_default)

    campaign_args(sub.add_parser("fuzz", help="phased fuzzing: UDF, lift, then program"), "out/fuzz")
    campaign_args(sub.add_parser("baseline", help="program-level fuzzing with string mutations"), "out/baseline")
    campaign_args(sub.add_parser("run", help="run the program once and dump task metrics"), "out/run")
    sweep = sub.add_parser("sweep", help="repeat phased fuzzing over mutation weights")
    campaign_args(sweep, "out/sweep")
    sweep.add_argument("--weights", default="0.1,0.5,1.0,2.5,5.0,7.5,10.0")
    sweep.add_argument("--ops", default="M13,M14", help="mutation ids whose weight is varied")
    sweep.add_argument("--repetitions", type=int, default=5)
    gen = sub.add_parser("gen", help="write a generated benchmark input")
    gen.add_argument("benchmark")
    gen.add_argument("--output", required=True)
    gen.add_argument("--param", action="append", help="generator parameter key=value")
    return parser


COMMANDS = {"fuzz": cmd_fuzz, "baseline": cmd_baseline, "run": cmd_run, "sweep": cmd_sweep, "gen": cmd_gen}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (cfgmod.ConfigError, SkewFuzzError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
