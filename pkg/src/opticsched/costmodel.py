"""Per-step and whole-collective completion time under a switch schedule.

Every step costs a fixed startup latency, a propagation term proportional to
the routed hop count, and a transmission term proportional to volume over the
achieved throughput. A step run on a matched configuration gets hop count 1
and throughput 1 by definition; the fabric pays the reconfiguration delay at
every step boundary that is not base-to-base (the pre-collective state is
base).

All accumulation happens in exact rationals. Nanosecond values are rounded
half-even to 3 decimal places only when serialized, so solver-equality tests
never depend on float association order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .collectives import Collective
from .errors import InfeasibleDemandError, InvalidParameterError
from .flow import FlowMetricsCache, step_metrics
from .topology import Topology


def exact_number(value: int | float | str | Fraction) -> Fraction:
    """Convert a config-style number to an exact Fraction.

    Floats go through their decimal string so that a JSON literal like 0.1
    means one tenth, not the nearest binary double.
    """
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


class Assignment(str, enum.Enum):
    """Per-step choice: keep the base fabric or switch to the step's matching."""

    BASE = "base"
    MATCHED = "matched"


Schedule = tuple[Assignment, ...]


def all_base(num_steps: int) -> Schedule:
    return (Assignment.BASE,) * num_steps


def all_matched(num_steps: int) -> Schedule:
    return (Assignment.MATCHED,) * num_steps


@dataclass(frozen=True)
class SystemParams:
    """Fabric-wide constants; beta (ns/byte) is derived from the bandwidth."""

    n: int
    bandwidth_gbps: int | float = 800
    alpha_ns: int | float = 100
    delta_ns: int | float = 100
    alpha_r_ns: int | float = 10_000
    epsilon: float = 0.05
    cap_theta_at_one: bool = False
    skip_identical_matched: bool = False

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidParameterError(f"need at least 2 nodes, got {self.n}")
        if exact_number(self.bandwidth_gbps) <= 0:
            raise InvalidParameterError("bandwidth must be positive")
        for name in ("alpha_ns", "delta_ns", "alpha_r_ns"):
            if exact_number(getattr(self, name)) < 0:
                raise InvalidParameterError(f"{name} must be non-negative")
        if not (0 < self.epsilon <= 0.5):
            raise InvalidParameterError(f"epsilon must be in (0, 0.5], got {self.epsilon}")

    @cached_property
    def beta_ns_per_byte(self) -> Fraction:
        # 8 bits/byte over Gbit/s gives ns/byte.
        return Fraction(8) / exact_number(self.bandwidth_gbps)

    @cached_property
    def alpha(self) -> Fraction:
        return exact_number(self.alpha_ns)

    @cached_property
    def delta(self) -> Fraction:
        return exact_number(self.delta_ns)

    @cached_property
    def alpha_r(self) -> Fraction:
        return exact_number(self.alpha_r_ns)

    def replace(self, **changes) -> "SystemParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class StepCost:
    """One step's charged metrics under the chosen configuration."""

    index: int
    assignment: Assignment
    theta: Fraction
    hops: int
    step_ns: Fraction
    reconfigured: bool
    reconfig_ns: Fraction


@dataclass(frozen=True)
class CostBreakdown:
    """Collective completion time split into its four additive components."""

    total_ns: Fraction
    latency_ns: Fraction
    propagation_ns: Fraction
    bandwidth_ns: Fraction
    reconfig_ns: Fraction
    per_step: tuple[StepCost, ...]

    @property
    def reconfig_count(self) -> int:
        # Events, not charge: a reconfiguration with alpha_r = 0 still counts.
        return sum(1 for s in self.per_step if s.reconfigured)

    def to_json_dict(self) -> dict:
        return {
            "total_ns": round_ns(self.total_ns),
            "latency_ns": round_ns(self.latency_ns),
            "propagation_ns": round_ns(self.propagation_ns),
            "bandwidth_ns": round_ns(self.bandwidth_ns),
            "reconfig_ns": round_ns(self.reconfig_ns),
            "per_step": [
                {
                    "step": s.index,
                    "config": s.assignment.value,
                    "theta": float(s.theta),
                    "hops": s.hops,
                    "step_ns": round_ns(s.step_ns),
                    "reconfigured": s.reconfigured,
                    "reconfig_ns": round_ns(s.reconfig_ns),
                }
                for s in self.per_step
            ],
        }


def round_ns(value: Fraction) -> float:
    """Reporting-boundary rounding: half-even to 3 decimal places."""
    return float(round(value, 3))


def format_ns(value: Fraction) -> str:
    """Exact fixed-point decimal string with 3 fractional digits."""
    scaled = round(value, 3) * 1000
    assert scaled.denominator == 1
    units = int(scaled)
    sign = "-" if units < 0 else ""
    units = abs(units)
    return f"{sign}{units // 1000}.{units % 1000:03d}"


def demand_completion_time(
    params: SystemParams,
    volume: int,
    theta: Fraction | float,
    hops: int,
) -> Fraction:
    """Single-step time: alpha + delta*hops + beta*volume/theta, in ns."""
    if volume < 0:
        raise InvalidParameterError(f"volume must be non-negative, got {volume}")
    if hops < 0:
        raise InvalidParameterError(f"hops must be non-negative, got {hops}")
    theta = Fraction(theta)
    if theta <= 0:
        raise InfeasibleDemandError(f"non-positive throughput {theta}")
    bandwidth = params.beta_ns_per_byte * volume / theta
    return params.alpha + params.delta * hops + bandwidth


def effective_theta(params: SystemParams, theta: Fraction) -> Fraction:
    return min(theta, Fraction(1)) if params.cap_theta_at_one else theta


def schedule_cost(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    schedule: Schedule,
    cache: FlowMetricsCache | None = None,
) -> CostBreakdown:
    """Evaluate a full switch schedule over the base topology.

    Base steps pay the topology's hop count and congestion; matched steps pay
    exactly one hop at full throughput. The reconfiguration delay is charged
    at every step whose (previous, current) configuration pair is not
    base-base, starting from an implicit base state before step 1. With
    skip_identical_matched set, staying on an unchanged matched pattern is
    free.
    """
    if len(schedule) != coll.num_steps:
        raise InvalidParameterError(
            f"schedule length {len(schedule)} != step count {coll.num_steps}"
        )
    if topo.n != coll.n:
        raise InvalidParameterError(f"topology n={topo.n} != collective n={coll.n}")

    latency = params.alpha * coll.num_steps
    propagation = Fraction(0)
    bandwidth = Fraction(0)
    reconfig = Fraction(0)
    per_step: list[StepCost] = []

    prev_assignment = Assignment.BASE
    prev_pairs = None
    for i, (step, assignment) in enumerate(zip(coll.steps, schedule), start=1):
        if assignment is Assignment.BASE:
            metrics = step_metrics(topo, step, params.epsilon, cache)
            theta = effective_theta(params, Fraction(metrics.theta))
            hops = metrics.hops
        else:
            theta = Fraction(1)
            hops = 1 if step.pairs else 0

        base_to_base = prev_assignment is Assignment.BASE and assignment is Assignment.BASE
        unchanged_matching = (
            params.skip_identical_matched
            and prev_assignment is Assignment.MATCHED
            and assignment is Assignment.MATCHED
            and prev_pairs == step.pairs
        )
        reconfigured = not (base_to_base or unchanged_matching)
        step_reconfig = params.alpha_r if reconfigured else Fraction(0)

        prop = params.delta * hops
        bw = params.beta_ns_per_byte * step.volume / theta if step.volume > 0 else Fraction(0)
        propagation += prop
        bandwidth += bw
        reconfig += step_reconfig
        per_step.append(
            StepCost(
                index=i,
                assignment=assignment,
                theta=theta,
                hops=hops,
                step_ns=params.alpha + prop + bw,
                reconfigured=reconfigured,
                reconfig_ns=step_reconfig,
            )
        )
        prev_assignment = assignment
        prev_pairs = step.pairs

    total = latency + propagation + bandwidth + reconfig
    return CostBreakdown(
        total_ns=total,
        latency_ns=latency,
        propagation_ns=propagation,
        bandwidth_ns=bandwidth,
        reconfig_ns=reconfig,
        per_step=tuple(per_step),
    )


def static_collective_time(
    params: SystemParams,
    coll: Collective,
    topo: Topology,
    cache: FlowMetricsCache | None = None,
) -> CostBreakdown:
    """Completion time when the fabric never leaves the base topology."""
    return schedule_cost(params, coll, topo, all_base(coll.num_steps), cache)
