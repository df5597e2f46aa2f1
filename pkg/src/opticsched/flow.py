"""Maximum concurrent flow for one step's matching demand on a topology.

Two solvers sit behind step_metrics():

  unique_path_flow   exact, for functional graphs (out-degree <= 1 everywhere:
                     rings, matched configurations, single-stride unions).
                     Every pair's route is forced, so the answer is a rational
                     computed from edge loads.

  approx_concurrent_flow
                     multiplicative-weights approximation for everything else.
                     One commodity per communicating pair, unit demand. The
                     loop is self-certifying: after each phase it scales the
                     accumulated flow to feasibility (an exact rational lower
                     bound on theta) and evaluates the length-function duality
                     bound D(l)/alpha(l) (an upper bound), stopping once the
                     certified ratio reaches 1 - epsilon. The returned value
                     is therefore guaranteed to lie in [(1-eps)*theta, theta]
                     independent of any constant in the worst-case analysis.

Throughput is never clamped at 1 here; on multipath topologies a matching can
route faster than a single direct link and callers decide whether to cap.
"""

from __future__ import annotations

import heapq
import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from .collectives import Step, validate_matching
from .errors import (
    InfeasibleDemandError,
    InternalInvariantError,
    InvalidParameterError,
    WrongMethodError,
)
from .topology import Topology, shortest_path_hops

UNIQUE_PATH_EXACT = "unique-path-exact"
FPTAS = "fptas"


@dataclass(frozen=True)
class FlowResult:
    """Throughput fraction and hop count for one step on one topology."""

    theta: Fraction
    hops: int
    method: str
    epsilon: float = 0.0


def _checked_pairs(topo: Topology, step: Step) -> list[tuple[int, int]]:
    problem = validate_matching(step, topo.n)
    if problem is not None:
        raise InvalidParameterError(f"invalid step: {problem}")
    return sorted(step.pairs)


def unique_path_flow(topo: Topology, step: Step) -> FlowResult:
    """Exact concurrent flow on a graph where every route is forced.

    Requires out-degree <= 1 at every node. Each pair's demand follows the
    unique walk from its source; theta is the reciprocal of the worst edge
    load and the hop count is the longest routed path.
    """
    pairs = _checked_pairs(topo, step)
    if not topo.is_functional:
        raise WrongMethodError("topology has a node with out-degree > 1; use the approximate solver")
    if not pairs:
        return FlowResult(theta=Fraction(1), hops=0, method=UNIQUE_PATH_EXACT)

    load: dict[tuple[int, int], int] = {}
    longest = 0
    for src, dst in pairs:
        node = src
        hops = 0
        while node != dst:
            nxt_row = topo.successors[node]
            if not nxt_row or hops >= topo.n:
                raise InfeasibleDemandError(f"no path from {src} to {dst}")
            nxt = nxt_row[0]
            load[(node, nxt)] = load.get((node, nxt), 0) + 1
            node = nxt
            hops += 1
        longest = max(longest, hops)

    worst = max(Fraction(count) / topo.capacity_map[edge] for edge, count in load.items())
    return FlowResult(theta=1 / worst, hops=longest, method=UNIQUE_PATH_EXACT)


def _dijkstra(
    topo: Topology,
    lengths: dict[tuple[int, int], float],
    src: int,
    dst: int | None,
) -> tuple[dict[int, float], dict[int, int]]:
    """Deterministic Dijkstra under positive edge lengths.

    Ties pop in node-id order via (dist, node) heap keys; relaxation is
    strict-improvement only, so parents are reproducible. Stops early when
    dst is settled (if given).
    """
    dist: dict[int, float] = {src: 0.0}
    parent: dict[int, int] = {}
    done: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, src)]
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == dst:
            break
        for nxt in topo.successors[node]:
            nd = d + lengths[(node, nxt)]
            if nxt not in dist or nd < dist[nxt]:
                dist[nxt] = nd
                parent[nxt] = node
                heapq.heappush(heap, (nd, nxt))
    return dist, parent


def _path_edges(parent: dict[int, int], src: int, dst: int) -> list[tuple[int, int]]:
    path = []
    node = dst
    while node != src:
        prev = parent[node]
        path.append((prev, node))
        node = prev
    path.reverse()
    return path


def approx_concurrent_flow(topo: Topology, step: Step, epsilon: float) -> FlowResult:
    """(1-epsilon)-certified maximum concurrent flow via multiplicative weights.

    Routes every pair's unit demand once per phase along shortest paths under
    exponentially growing edge lengths, keeping exact rational flow totals.
    Terminates as soon as the feasibility-scaled flow provably reaches
    (1-epsilon) of the duality upper bound.
    """
    if not (0 < epsilon <= 0.5):
        raise InvalidParameterError(f"epsilon must be in (0, 0.5], got {epsilon}")
    pairs = _checked_pairs(topo, step)
    if not pairs:
        return FlowResult(theta=Fraction(1), hops=0, method=FPTAS, epsilon=epsilon)

    hops = []
    for src, dst in pairs:
        h = shortest_path_hops(topo, src, dst)
        if h is None:
            raise InfeasibleDemandError(f"no path from {src} to {dst}")
        hops.append(h)
    ell = max(hops)

    caps = topo.capacity_map
    caps_float = {e: float(c) for e, c in caps.items()}
    eps_inner = epsilon / 4.0
    # Initial length 1/c(e); absolute scale is irrelevant to the certificate.
    lengths = {e: 1.0 / c for e, c in caps_float.items()}
    edge_flow: dict[tuple[int, int], Fraction] = {e: Fraction(0) for e in caps}
    routed: dict[tuple[int, int], Fraction] = {pair: Fraction(0) for pair in pairs}

    m_edges = len(caps)
    max_phases = 200 + math.ceil(8.0 * math.log(m_edges + len(pairs) + 2) / (eps_inner * eps_inner))
    best_bound = math.inf
    target = Fraction(1) - Fraction(str(epsilon))

    for _ in range(max_phases):
        for src, dst in pairs:
            remaining = Fraction(1)
            while remaining > 0:
                _, parent = _dijkstra(topo, lengths, src, dst)
                if dst not in parent and dst != src:
                    raise InternalInvariantError(f"lost reachability {src}->{dst}")
                path = _path_edges(parent, src, dst)
                bottleneck = min(caps[e] for e in path)
                u = min(remaining, bottleneck)
                for e in path:
                    edge_flow[e] += u
                    lengths[e] *= 1.0 + eps_inner * float(u) / caps_float[e]
                routed[(src, dst)] += u
                remaining -= u

        # Primal certificate: scale the accumulated flow to feasibility.
        rho = max(edge_flow[e] / caps[e] for e in caps)
        lam_cert = min(routed.values()) / rho

        # Dual certificate: theta <= D(l)/alpha(l) for any positive lengths.
        d_total = sum(caps_float[e] * lengths[e] for e in sorted(caps))
        alpha = 0.0
        for src, dst in pairs:
            dist, _ = _dijkstra(topo, lengths, src, dst)
            alpha += dist[dst]
        bound = (d_total / alpha) * (1.0 + 1e-9)
        best_bound = min(best_bound, bound)

        if lam_cert >= target * Fraction(best_bound):
            return FlowResult(theta=lam_cert, hops=ell, method=FPTAS, epsilon=epsilon)

    raise InternalInvariantError(
        f"concurrent-flow approximation did not certify within {max_phases} phases"
    )


class FlowMetricsCache:
    """Thread-safe memo for step metrics, keyed by topology, pattern, epsilon.

    Purely an accelerator: hits return the identical FlowResult object that a
    cold computation would have produced.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._store: dict[tuple, FlowResult] = {}

    def get(self, key: tuple) -> FlowResult | None:
        with self._lock:
            return self._store.get(key)

    def put(self, key: tuple, value: FlowResult) -> None:
        with self._lock:
            self._store[key] = value

    def __len__(self) -> int:
        with self._lock:
            return len(self._store)


def step_metrics(
    topo: Topology,
    step: Step,
    epsilon: float = 0.05,
    cache: FlowMetricsCache | None = None,
) -> FlowResult:
    """Throughput and hop metrics for one step, via the cheapest valid solver.

    Functional topologies (rings, matched configurations) get the exact
    unique-path answer; anything with branching falls back to the certified
    approximation. Volume never enters: metrics depend on the pattern only.
    """
    key = (topo.cache_key(), tuple(sorted(step.pairs)), float(epsilon))
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    if topo.is_functional:
        result = unique_path_flow(topo, step)
    else:
        result = approx_concurrent_flow(topo, step, epsilon)
    if cache is not None:
        cache.put(key, result)
    return result
