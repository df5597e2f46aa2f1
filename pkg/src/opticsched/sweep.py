"""Deterministic (reconfiguration delay, message size) grid sweeps.

Grid points are independent; they may be evaluated in parallel worker
processes, but rows are always emitted sorted by (alpha_r_ns, msg_bytes) and
every numeric field is formatted from exact rationals, so the CSV bytes are
identical regardless of worker count.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import IO

from .config import ExperimentConfig, build_collective, build_topology
from .costmodel import exact_number, format_ns
from .errors import InternalInvariantError, OpticschedError
from .flow import FlowMetricsCache
from .scheduler import baseline_bvn, baseline_static, solve_dp, solve_threshold

CSV_HEADER = (
    "alpha_r_ns,msg_bytes,cost_opt_ns,cost_static_ns,cost_bvn_ns,cost_threshold_ns,"
    "speedup_vs_static,speedup_vs_bvn,speedup_vs_best,opt_reconfig_count"
)


class SweepPointError(OpticschedError, RuntimeError):
    """A grid point failed; the message names the offending (alpha_r, m)."""


@dataclass(frozen=True)
class SweepRow:
    """One grid point's solver costs and speedups, all exact rationals."""

    alpha_r_ns: int | float
    msg_bytes: int
    cost_opt_ns: Fraction
    cost_static_ns: Fraction
    cost_bvn_ns: Fraction
    cost_threshold_ns: Fraction | None
    opt_reconfig_count: int

    @property
    def speedup_vs_static(self) -> Fraction:
        return self.cost_static_ns / self.cost_opt_ns

    @property
    def speedup_vs_bvn(self) -> Fraction:
        return self.cost_bvn_ns / self.cost_opt_ns

    @property
    def speedup_vs_best(self) -> Fraction:
        return min(self.cost_static_ns, self.cost_bvn_ns) / self.cost_opt_ns

    def to_csv_line(self) -> str:
        threshold = "" if self.cost_threshold_ns is None else format_ns(self.cost_threshold_ns)
        return ",".join(
            [
                format_ns(exact_number(self.alpha_r_ns)),
                str(self.msg_bytes),
                format_ns(self.cost_opt_ns),
                format_ns(self.cost_static_ns),
                format_ns(self.cost_bvn_ns),
                threshold,
                format(float(self.speedup_vs_static), ".6g"),
                format(float(self.speedup_vs_bvn), ".6g"),
                format(float(self.speedup_vs_best), ".6g"),
                str(self.opt_reconfig_count),
            ]
        )


def evaluate_grid_point(
    config: ExperimentConfig,
    base_dir: Path,
    alpha_r_ns: int | float,
    msg_bytes: int,
    cache: FlowMetricsCache | None = None,
) -> SweepRow:
    """Solve one (reconfiguration delay, message size) instance."""
    params = config.params.replace(alpha_r_ns=alpha_r_ns)
    coll = build_collective(config, base_dir, msg_bytes=msg_bytes)
    topo = build_topology(config)
    cache = cache if cache is not None else FlowMetricsCache()

    opt = solve_dp(params, coll, topo, cache)
    static = baseline_static(params, coll, topo, cache)
    bvn = baseline_bvn(params, coll, topo, cache)
    threshold = None
    if "threshold" in config.solvers:
        threshold = solve_threshold(params, coll, topo, cache)

    if opt.cost.total_ns > min(static.cost.total_ns, bvn.cost.total_ns):
        raise InternalInvariantError(
            f"optimum exceeds a baseline at alpha_r={alpha_r_ns} m={msg_bytes}"
        )
    return SweepRow(
        alpha_r_ns=alpha_r_ns,
        msg_bytes=msg_bytes,
        cost_opt_ns=opt.cost.total_ns,
        cost_static_ns=static.cost.total_ns,
        cost_bvn_ns=bvn.cost.total_ns,
        cost_threshold_ns=None if threshold is None else threshold.cost.total_ns,
        opt_reconfig_count=opt.reconfig_count,
    )


_WORKER_CACHE: FlowMetricsCache | None = None


def _worker_evaluate(config_doc: dict, base_dir: str, alpha_r_ns, msg_bytes: int) -> SweepRow:
    global _WORKER_CACHE
    if _WORKER_CACHE is None:
        _WORKER_CACHE = FlowMetricsCache()
    config = ExperimentConfig.from_dict(config_doc)
    return evaluate_grid_point(config, Path(base_dir), alpha_r_ns, msg_bytes, _WORKER_CACHE)


def run_sweep(config: ExperimentConfig, base_dir: Path, workers: int = 1) -> list[SweepRow]:
    """Evaluate the whole grid; output order is canonical regardless of workers."""
    if config.sweep is None:
        raise OpticschedError("config has no sweep section")
    points = [(a, m) for a in config.sweep.alpha_r_ns for m in config.sweep.msg_bytes]

    rows: dict[tuple, SweepRow] = {}
    if workers <= 1:
        cache = FlowMetricsCache()
        for a, m in points:
            try:
                rows[(a, m)] = evaluate_grid_point(config, base_dir, a, m, cache)
            except OpticschedError as exc:
                raise SweepPointError(f"grid point alpha_r_ns={a} msg_bytes={m}: {exc}") from exc
    else:
        doc = config.to_json_dict()
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_worker_evaluate, doc, str(base_dir), a, m): (a, m) for a, m in points
            }
            for future in concurrent.futures.as_completed(futures):
                a, m = futures[future]
                try:
                    rows[(a, m)] = future.result()
                except OpticschedError as exc:
                    raise SweepPointError(f"grid point alpha_r_ns={a} msg_bytes={m}: {exc}") from exc

    ordered = [rows[(a, m)] for a in config.sweep.alpha_r_ns for m in config.sweep.msg_bytes]
    return ordered


def write_sweep_csv(rows: list[SweepRow], out: IO[str]) -> None:
    out.write(CSV_HEADER + "\n")
    for row in rows:
        out.write(row.to_csv_line() + "\n")
