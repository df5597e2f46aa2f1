"""Solvers for the reconfigure-or-not schedule optimization.

The objective over assignments x (base/matched per step) is

    sum_i [ alpha + delta*(hops_i if base else 1)
            + beta*m_i*(1/theta_i if base else 1) ]
    + alpha_r * #{ step boundaries that are not base-to-base },

with the fabric in its base configuration before step 1 and no charge for
restoring it afterwards. The chain structure makes the exact optimum a
two-state dynamic program; solve_brute_force enumerates all 2^s assignments
as an independent oracle. Ties are broken toward base and then toward the
lexicographically earliest schedule (base before matched, step 1 first), in
both solvers.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

from .collectives import Collective
from .costmodel import (
    Assignment,
    CostBreakdown,
    Schedule,
    SystemParams,
    all_base,
    all_matched,
    effective_theta,
    schedule_cost,
)
from .errors import TooLargeError
from .flow import FlowMetricsCache, step_metrics
from .topology import Topology

BRUTE_FORCE_MAX_STEPS = 24


@dataclass(frozen=True)
class SolveReport:
    """A schedule, its exact cost, and how it was obtained."""

    schedule: Schedule
    cost: CostBreakdown
    reconfig_count: int
    solver: str
    solve_time_s: float

    def to_json_dict(self, include_timing: bool = False) -> dict:
        doc = {
            "solver": self.solver,
            "schedule": [a.value for a in self.schedule],
            "reconfig_count": self.reconfig_count,
            "cost": self.cost.to_json_dict(),
        }
        if include_timing:
            doc["solve_time_s"] = self.solve_time_s
        return doc


def _step_cost_table(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    cache: FlowMetricsCache | None,
) -> list[dict[Assignment, Fraction]]:
    """Per-step cost of each configuration choice, excluding reconfiguration."""
    beta = params.beta_ns_per_byte
    table: list[dict[Assignment, Fraction]] = []
    for step in coll.steps:
        metrics = step_metrics(topo, step, params.epsilon, cache)
        theta = effective_theta(params, Fraction(metrics.theta))
        base = params.alpha + params.delta * metrics.hops + beta * step.volume / theta
        matched_hops = 1 if step.pairs else 0
        matched = params.alpha + params.delta * matched_hops + beta * step.volume
        table.append({Assignment.BASE: base, Assignment.MATCHED: matched})
    return table


def _matched_free(params: SystemParams, coll: Collective) -> list[bool]:
    """Whether staying matched into step i (0-based) skips the switch delay."""
    free = [False] * coll.num_steps
    if params.skip_identical_matched:
        for i in range(1, coll.num_steps):
            free[i] = coll.steps[i].pairs == coll.steps[i - 1].pairs
    return free


def _transition_cost(
    params: SystemParams,
    prev: Assignment,
    cur: Assignment,
    matched_free: bool,
) -> Fraction:
    if prev is Assignment.BASE and cur is Assignment.BASE:
        return Fraction(0)
    if prev is Assignment.MATCHED and cur is Assignment.MATCHED and matched_free:
        return Fraction(0)
    return params.alpha_r


def _report(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    schedule: Schedule,
    solver: str,
    started: float,
    cache: FlowMetricsCache | None,
) -> SolveReport:
    cost = schedule_cost(params, coll, topo, schedule, cache)
    return SolveReport(
        schedule=schedule,
        cost=cost,
        reconfig_count=cost.reconfig_count,
        solver=solver,
        solve_time_s=time.perf_counter() - started,
    )


def solve_dp(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    cache: FlowMetricsCache | None = None,
) -> SolveReport:
    """Exact minimum-cost schedule in O(s) time over the two-state chain.

    suffix[i][a] is the cheapest cost of steps i..s (transition into step i
    included) when the fabric is in configuration a just before step i.
    Reconstruction walks forward preferring base on ties, which yields the
    lexicographically earliest optimal schedule.
    """
    started = time.perf_counter()
    table = _step_cost_table(params, coll, topo, cache)
    free = _matched_free(params, coll)
    s = len(table)
    states = (Assignment.BASE, Assignment.MATCHED)

    suffix: list[dict[Assignment, Fraction]] = [dict() for _ in range(s + 1)]
    suffix[s] = {a: Fraction(0) for a in states}
    for i in range(s - 1, -1, -1):
        for prev in states:
            suffix[i][prev] = min(
                _transition_cost(params, prev, cur, free[i]) + table[i][cur] + suffix[i + 1][cur]
                for cur in states
            )

    assignments: list[Assignment] = []
    prev = Assignment.BASE
    for i in range(s):
        chosen = None
        for cur in states:  # base first: tie-break toward base
            value = _transition_cost(params, prev, cur, free[i]) + table[i][cur] + suffix[i + 1][cur]
            if value == suffix[i][prev]:
                chosen = cur
                break
        assert chosen is not None
        assignments.append(chosen)
        prev = chosen

    return _report(params, coll, topo, tuple(assignments), "dp", started, cache)


def solve_brute_force(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    cache: FlowMetricsCache | None = None,
) -> SolveReport:
    """Global optimum by enumerating all 2^s assignments; the DP's oracle.

    Step and transition costs are rescaled to a common integer denominator so
    the inner loop runs on machine integers while staying exact.
    """
    started = time.perf_counter()
    s = coll.num_steps
    if s > BRUTE_FORCE_MAX_STEPS:
        raise TooLargeError(f"brute force capped at {BRUTE_FORCE_MAX_STEPS} steps, got {s}")
    table = _step_cost_table(params, coll, topo, cache)
    free = _matched_free(params, coll)

    scale = params.alpha_r.denominator
    for row in table:
        for value in row.values():
            scale = math.lcm(scale, value.denominator)

    # cost[i][0] = base, cost[i][1] = matched; rc[i][prev][cur] transition cost.
    cost = [(int(row[Assignment.BASE] * scale), int(row[Assignment.MATCHED] * scale)) for row in table]
    alpha_r = int(params.alpha_r * scale)
    rc = [
        ((0, alpha_r), (alpha_r, 0 if free[i] else alpha_r))
        for i in range(s)
    ]

    best_total: int | None = None
    best_bits: tuple[int, ...] | None = None
    for bits in itertools.product((0, 1), repeat=s):  # 0 = base first: lexicographic
        total = 0
        prev = 0
        for i in range(s):
            bit = bits[i]
            total += cost[i][bit] + rc[i][prev][bit]
            prev = bit
        if best_total is None or total < best_total:
            best_total = total
            best_bits = bits
    assert best_bits is not None
    schedule = tuple(Assignment.MATCHED if bit else Assignment.BASE for bit in best_bits)
    return _report(params, coll, topo, schedule, "brute-force", started, cache)


def baseline_static(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    cache: FlowMetricsCache | None = None,
) -> SolveReport:
    """Never reconfigure: run every step on the base topology."""
    started = time.perf_counter()
    return _report(params, coll, topo, all_base(coll.num_steps), "static", started, cache)


def baseline_bvn(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    cache: FlowMetricsCache | None = None,
) -> SolveReport:
    """Reconfigure every step to the matching of that step's pattern."""
    started = time.perf_counter()
    return _report(params, coll, topo, all_matched(coll.num_steps), "bvn", started, cache)


def solve_threshold(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    cache: FlowMetricsCache | None = None,
) -> SolveReport:
    """Greedy heuristic: match a step iff its standalone saving beats alpha_r.

    Decisions are per-step and ignore adjacency, but the returned cost is the
    honest schedule_cost evaluation including every reconfiguration actually
    incurred.
    """
    started = time.perf_counter()
    beta = params.beta_ns_per_byte
    assignments = []
    for step in coll.steps:
        metrics = step_metrics(topo, step, params.epsilon, cache)
        theta = effective_theta(params, Fraction(metrics.theta))
        saving = params.delta * (metrics.hops - 1) + beta * step.volume * (1 / theta - 1)
        assignments.append(Assignment.MATCHED if saving > params.alpha_r else Assignment.BASE)
    return _report(params, coll, topo, tuple(assignments), "threshold", started, cache)
