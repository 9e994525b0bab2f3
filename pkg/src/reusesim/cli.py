"""Experiment runner CLI.

Subcommands:
  run         one configuration -> tasks.csv + summary.csv
  sweep       preset grid (3 modes x task counts 10..100 x trials) -> sweep CSV
  bench-lsh   measure similarity-index query latency / candidate counts
  calibrate   sample distance distributions to suggest store thresholds

Config files are flat ``key = value`` text with dotted section prefixes
(``cost.edge_bandwidth = 100``).  Every field except ``mode`` has a default;
``--set key=value`` overrides individual fields from the command line.  All
randomness flows from the configured seed, so repeated invocations write
byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .core import CostParams
from .lsh import LshIndex, LshParams
from .sim import (
    LshSettings,
    MetricsReport,
    Mode,
    SimConfig,
    StoreSettings,
    reuse_gain,
    run,
)
from .workload import BASE_NORM, WorkloadSpec, ramp_rate

SCENARIOS = ("completion", "computation", "waiting", "utilization", "load", "gain")

TASKS_HEADER = (
    "task_id,service,label,outcome,location,arrival_s,start_s,finish_s,"
    "waiting_s,computation_s,completion_s,correct"
)
SUMMARY_HEADER = (
    "mode,n_tasks,redundancy,trial,mean_completion_s,p90_completion_s,"
    "mean_computation_s,mean_waiting_s,utilization_pct,load_cloud,load_edge,"
    "load_reuse,reuse_gain_delay,reuse_gain_resource,correctness"
)


class ConfigError(ValueError):
    """A config file or override failed validation; message names the field."""


def _parse_float(s: str) -> float:
    return float(s)


def _parse_int(s: str) -> int:
    return int(s)


def _parse_optional_float(s: str) -> Optional[float]:
    s = s.strip()
    return None if s in ("", "none") else float(s)


def _parse_optional_int(s: str) -> Optional[int]:
    s = s.strip()
    return None if s in ("", "none") else int(s)


def _parse_optional_str(s: str) -> Optional[str]:
    s = s.strip()
    return None if s in ("", "none") else s


def _parse_range(s: str) -> tuple[float, float]:
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 2:
        raise ValueError("expected 'lo,hi'")
    return (float(parts[0]), float(parts[1]))


def _parse_mode(s: str) -> Mode:
    try:
        return Mode(s.strip())
    except ValueError:
        valid = ", ".join(m.value for m in Mode)
        raise ValueError(f"must be one of: {valid}") from None


# field -> (parser, default); _REQUIRED fields have no default.
_REQUIRED = object()
CONFIG_SCHEMA: dict[str, tuple[Callable, object]] = {
    "mode": (_parse_mode, _REQUIRED),
    "seed": (_parse_int, 42),
    "trials": (_parse_int, 10),
    "edge_slots": (_parse_int, 15),
    "max_queue_delay": (_parse_optional_float, None),
    "features_file": (_parse_optional_str, None),
    "cost.edge_bandwidth": (_parse_float, 100.0),
    "cost.cloud_bandwidth": (_parse_float, 4.0),
    "cost.edge_capacity_rate": (_parse_float, 100.0),
    "cost.cloud_capacity_rate": (_parse_float, 1000.0),
    "cost.lookup_cost": (_parse_float, 0.001),
    "cost.edge_hops": (_parse_int, 1),
    "cost.cloud_hops": (_parse_int, 6),
    "cost.per_hop_latency": (_parse_float, 0.005),
    "store.capacity": (_parse_optional_int, 500),
    "store.tau_full": (_parse_float, 1.0),
    "store.tau_partial": (_parse_float, 2.0),
    "store.partial_fraction": (_parse_float, 0.5),
    "store.decay_interval": (_parse_optional_float, None),
    "lsh.num_tables": (_parse_int, 8),
    "lsh.bits_per_table": (_parse_int, 8),
    "lsh.max_candidates": (_parse_int, 16),
    "workload.num_tasks": (_parse_int, 100),
    "workload.redundancy_rate": (_parse_float, 0.8),
    "workload.arrival_rate": (_parse_float, 6.0),
    "workload.service": (str, "detect"),
    "workload.dimension": (_parse_int, 32),
    "workload.noise_sigma": (_parse_float, 0.05),
    "workload.input_size_range": (_parse_range, (4.0, 8.0)),
    "workload.output_size_range": (_parse_range, (0.1, 0.5)),
    "workload.complexity_range": (_parse_range, (50.0, 150.0)),
}


def parse_config_file(path) -> dict[str, str]:
    raw: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"line {lineno}: unknown field {key!r}")
        raw[key] = value
    return raw


def build_config(raw: dict[str, str]) -> SimConfig:
    values: dict[str, object] = {}
    for key, (parser, default) in CONFIG_SCHEMA.items():
        if key in raw:
            try:
                values[key] = parser(raw[key])
            except ValueError as exc:
                raise ConfigError(f"field {key!r}: {exc}") from None
        elif default is _REQUIRED:
            raise ConfigError(f"missing required field: {key}")
        else:
            values[key] = default
    try:
        return SimConfig(
            mode=values["mode"],
            workload=WorkloadSpec(
                num_tasks=values["workload.num_tasks"],
                redundancy_rate=values["workload.redundancy_rate"],
                arrival_rate=values["workload.arrival_rate"],
                service=values["workload.service"],
                input_size_range=values["workload.input_size_range"],
                output_size_range=values["workload.output_size_range"],
                complexity_range=values["workload.complexity_range"],
                dimension=values["workload.dimension"],
                noise_sigma=values["workload.noise_sigma"],
                seed=values["seed"],
            ),
            cost=CostParams(
                edge_bandwidth=values["cost.edge_bandwidth"],
                cloud_bandwidth=values["cost.cloud_bandwidth"],
                edge_capacity_rate=values["cost.edge_capacity_rate"],
                cloud_capacity_rate=values["cost.cloud_capacity_rate"],
                lookup_cost=values["cost.lookup_cost"],
                edge_hops=values["cost.edge_hops"],
                cloud_hops=values["cost.cloud_hops"],
                per_hop_latency=values["cost.per_hop_latency"],
            ),
            edge_slots=values["edge_slots"],
            store=StoreSettings(
                capacity=values["store.capacity"],
                tau_full=values["store.tau_full"],
                tau_partial=values["store.tau_partial"],
                partial_fraction=values["store.partial_fraction"],
                decay_interval=values["store.decay_interval"],
            ),
            lsh=LshSettings(
                num_tables=values["lsh.num_tables"],
                bits_per_table=values["lsh.bits_per_table"],
                max_candidates=values["lsh.max_candidates"],
            ),
            trials=values["trials"],
            seed=values["seed"],
            max_queue_delay=values["max_queue_delay"],
            features_file=values["features_file"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def apply_overrides(raw: dict[str, str], overrides: list[str]) -> dict[str, str]:
    out = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"override names unknown field {key!r}")
        out[key] = value
    return out


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def write_tasks_csv(path, report: MetricsReport) -> None:
    lines = [TASKS_HEADER]
    for r in report.records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.task_id,
                    r.service,
                    r.label,
                    r.outcome,
                    r.location,
                    r.arrival_s,
                    r.start_s,
                    r.finish_s,
                    r.waiting_s,
                    r.computation_s,
                    r.completion_s,
                    r.correct,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def summary_row(
    report: MetricsReport,
    n_tasks: int,
    redundancy: float,
    trial,
    gains=None,
) -> str:
    gain_delay = _fmt(gains[0]) if gains is not None else ""
    gain_resource = _fmt(gains[1]) if gains is not None else ""
    return ",".join(
        (
            report.mode.value,
            str(n_tasks),
            _fmt(redundancy),
            str(trial),
            _fmt(report.mean_completion_s),
            _fmt(report.p90_completion_s),
            _fmt(report.mean_computation_s),
            _fmt(report.mean_waiting_s),
            _fmt(report.utilization_pct),
            _fmt(report.load_cloud),
            _fmt(report.load_edge),
            _fmt(report.load_reuse),
            gain_delay,
            gain_resource,
            _fmt(report.correctness_rate),
        )
    )


def cmd_run(config_path, overrides, outdir) -> int:
    raw = apply_overrides(parse_config_file(config_path), overrides)
    config = build_config(raw)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = [SUMMARY_HEADER]
    first: Optional[MetricsReport] = None
    for trial in range(config.trials):
        report = run(config, trial)
        if first is None:
            first = report
        rows.append(
            summary_row(
                report,
                len(report.records),
                config.workload.redundancy_rate,
                trial,
            )
        )
    write_tasks_csv(outdir / "tasks.csv", first)
    (outdir / "summary.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(rows[1])
    return 0


def _p90_row(mode: Mode, n: int, redundancy: float, rows: list[list[float]], gains) -> str:
    cols = np.percentile(np.array(rows), 90, axis=0)
    gain_cols = (
        (_fmt(float(np.percentile([g[0] for g in gains], 90))),
         _fmt(float(np.percentile([g[1] for g in gains], 90))))
        if gains
        else ("", "")
    )
    return ",".join(
        (
            mode.value,
            str(n),
            _fmt(redundancy),
            "p90",
            *(_fmt(float(c)) for c in cols[:8]),
            *gain_cols,
            _fmt(float(cols[8])),
        )
    )


def cmd_sweep(scenario: str, outdir, seed: int = 42, trials: int = 10) -> int:
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; valid scenarios: {', '.join(SCENARIOS)}"
        )
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ns = list(range(10, 101, 10))
    modes = (Mode.CLOUD_ONLY, Mode.EDGE_NO_REUSE, Mode.EDGE_WITH_REUSE)
    reports: dict[tuple[Mode, int, int], MetricsReport] = {}
    for mode in modes:
        for n in ns:
            for trial in range(trials):
                config = SimConfig(
                    mode=mode,
                    workload=WorkloadSpec(
                        num_tasks=n, redundancy_rate=ramp_rate(n), seed=seed
                    ),
                    seed=seed,
                )
                reports[(mode, n, trial)] = run(config, trial)
    lines = [SUMMARY_HEADER]
    for mode in modes:
        for n in ns:
            redundancy = ramp_rate(n)
            trial_metrics: list[list[float]] = []
            trial_gains = []
            for trial in range(trials):
                report = reports[(mode, n, trial)]
                gains = None
                if mode is Mode.EDGE_WITH_REUSE:
                    g = reuse_gain(report, reports[(Mode.EDGE_NO_REUSE, n, trial)])
                    gains = (g.delay_gain, g.resource_gain)
                    trial_gains.append(gains)
                lines.append(summary_row(report, n, redundancy, trial, gains))
                trial_metrics.append(
                    [
                        report.mean_completion_s,
                        report.p90_completion_s,
                        report.mean_computation_s,
                        report.mean_waiting_s,
                        report.utilization_pct,
                        report.load_cloud,
                        report.load_edge,
                        report.load_reuse,
                        report.correctness_rate,
                    ]
                )
            lines.append(_p90_row(mode, n, redundancy, trial_metrics, trial_gains))
    path = outdir / f"sweep_{scenario}.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path}")
    return 0


def cmd_bench_lsh(
    n_values: list[int],
    outdir,
    num_tables: int = 8,
    bits_per_table: int = 16,
    dimension: int = 32,
    seed: int = 42,
    queries: int = 200,
    cluster_size: int = 10,
) -> int:
    """Measure query latency and candidate counts on clustered data.

    Data has ``n // cluster_size`` clusters of noisy observations, matching
    the shape of a redundant workload; useful for calibrating the configured
    lookup cost against real hash-table behaviour.  The default key width is
    wider than the store's (16 bits vs 8) because bucket occupancy should
    track the cluster size even at the largest n; pass --bits to override.
    """
    if not n_values:
        raise ConfigError("need at least one value of n")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = ["n,queries,mean_query_ms,mean_candidates"]
    for n in sorted(n_values):
        params = LshParams(
            num_tables=num_tables,
            bits_per_table=bits_per_table,
            dimension=dimension,
            seed=seed,
        )
        index = LshIndex(params)
        n_clusters = max(1, n // cluster_size)
        g = rng.standard_normal((n_clusters, dimension))
        bases = BASE_NORM * g / np.linalg.norm(g, axis=1, keepdims=True)
        members = rng.integers(0, n_clusters, size=n)
        points = bases[members] + 0.05 * rng.standard_normal((n, dimension))
        for i in range(n):
            index.insert(i, points[i])
        probe_clusters = rng.integers(0, n_clusters, size=queries)
        probes = bases[probe_clusters] + 0.05 * rng.standard_normal(
            (queries, dimension)
        )
        total_candidates = 0
        t0 = time.perf_counter()
        for q in probes:
            index.query(q, max_candidates=16)
        elapsed = time.perf_counter() - t0
        for q in probes:
            total_candidates += len(index.candidate_ids(q))
        lines.append(
            f"{n},{queries},{_fmt(1000.0 * elapsed / queries)},"
            f"{_fmt(total_candidates / queries)}"
        )
    path = outdir / "bench_lsh.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def cmd_calibrate(
    dimension: int = 32, sigma: float = 0.05, samples: int = 2000, seed: int = 42
) -> int:
    """Sample same-object vs cross-object distances and suggest thresholds."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((samples, dimension))
    bases = BASE_NORM * g / np.linalg.norm(g, axis=1, keepdims=True)
    within = np.linalg.norm(
        sigma * rng.standard_normal((samples, dimension))
        - sigma * rng.standard_normal((samples, dimension)),
        axis=1,
    )
    cross = np.linalg.norm(bases - np.roll(bases, 1, axis=0), axis=1)
    within_hi = float(np.max(within))
    cross_lo = float(np.min(cross))
    tau_full = min(2.5 * within_hi, cross_lo / 4.0)
    print(f"dimension={dimension} sigma={sigma} samples={samples}")
    print(f"same-object distance: mean={within.mean():.4f} max={within_hi:.4f}")
    print(f"cross-object distance: min={cross_lo:.4f} mean={cross.mean():.4f}")
    print(f"suggested store.tau_full = {tau_full:.4f}")
    print(f"suggested store.tau_partial = {2.0 * tau_full:.4f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reusesim", description="edge computation-reuse experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("-c", "--config", required=True, help="config file path")
    p_run.add_argument(
        "-s", "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override a config field",
    )
    p_run.add_argument("-d", "--outdir", default=".", help="output directory")

    p_sweep = sub.add_parser("sweep", help="run a preset scenario grid")
    p_sweep.add_argument("scenario", help=f"one of: {', '.join(SCENARIOS)}")
    p_sweep.add_argument("-d", "--outdir", default=".", help="output directory")
    p_sweep.add_argument("--seed", type=int, default=42)
    p_sweep.add_argument("--trials", type=int, default=10)

    p_bench = sub.add_parser("bench-lsh", help="benchmark index queries")
    p_bench.add_argument(
        "-n", "--n-values", default="", help="comma-separated entry counts"
    )
    p_bench.add_argument("-d", "--outdir", default=".", help="output directory")
    p_bench.add_argument("--tables", type=int, default=8)
    p_bench.add_argument("--bits", type=int, default=16)
    p_bench.add_argument("--dim", type=int, default=32)
    p_bench.add_argument("--seed", type=int, default=42)
    p_bench.add_argument("--queries", type=int, default=200)

    p_cal = sub.add_parser("calibrate", help="suggest similarity thresholds")
    p_cal.add_argument("--dim", type=int, default=32)
    p_cal.add_argument("--sigma", type=float, default=0.05)
    p_cal.add_argument("--samples", type=int, default=2000)
    p_cal.add_argument("--seed", type=int, default=42)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.set, args.outdir)
        if args.command == "sweep":
            return cmd_sweep(args.scenario, args.outdir, args.seed, args.trials)
        if args.command == "bench-lsh":
            n_values = [int(v) for v in args.n_values.split(",") if v.strip()]
            return cmd_bench_lsh(
                n_values,
                args.outdir,
                num_tables=args.tables,
                bits_per_table=args.bits,
                dimension=args.dim,
                seed=args.seed,
                queries=args.queries,
            )
        if args.command == "calibrate":
            return cmd_calibrate(args.dim, args.sigma, args.samples, args.seed)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())
