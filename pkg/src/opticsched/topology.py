"""Directed capacitated graphs for base and matched circuit configurations.

Capacities are dimensionless multiples of one transceiver's bandwidth, so a
plain ring has capacity 1 everywhere and real bandwidth only enters the cost
model. Topologies are immutable and hashable once built; all queries are pure.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .collectives import Step, validate_matching
from .errors import InvalidParameterError

RING = "ring"
COPRIME_RING_UNION = "coprime-ring-union"
MATCHED = "matched"
CUSTOM = "custom"


@dataclass(frozen=True)
class Topology:
    """A directed graph on nodes 0..n-1 with positive rational edge capacities."""

    n: int
    edges: tuple[tuple[int, int, Fraction], ...]
    kind: str = CUSTOM

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidParameterError(f"need at least 1 node, got {self.n}")
        canonical = tuple(sorted((s, d, Fraction(c)) for s, d, c in self.edges))
        object.__setattr__(self, "edges", canonical)
        seen: set[tuple[int, int]] = set()
        for src, dst, cap in canonical:
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise InvalidParameterError(f"edge ({src},{dst}) out of range for n={self.n}")
            if src == dst:
                raise InvalidParameterError(f"self-loop at node {src}")
            if (src, dst) in seen:
                raise InvalidParameterError(f"duplicate edge ({src},{dst})")
            if cap <= 0:
                raise InvalidParameterError(f"edge ({src},{dst}) has non-positive capacity {cap}")
            seen.add((src, dst))
        if self.kind == MATCHED:
            out_deg = [0] * self.n
            in_deg = [0] * self.n
            for src, dst, _ in canonical:
                out_deg[src] += 1
                in_deg[dst] += 1
            if any(d > 1 for d in out_deg) or any(d > 1 for d in in_deg):
                raise InvalidParameterError("matched topology must have in/out degree <= 1")

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for src, dst, _ in self.edges:
            adj[src].append(dst)
        return tuple(tuple(sorted(row)) for row in adj)

    @cached_property
    def capacity_map(self) -> dict[tuple[int, int], Fraction]:
        return {(src, dst): cap for src, dst, cap in self.edges}

    @cached_property
    def is_functional(self) -> bool:
        """True when every node has out-degree <= 1, so all paths are forced."""
        return all(len(row) <= 1 for row in self.successors)

    def edge_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((src, dst) for src, dst, _ in self.edges)

    def cache_key(self) -> tuple:
        return (self.n, self.edges)


def ring(n: int) -> Topology:
    """Unidirectional ring: each node sends to its clockwise neighbor."""
    if n < 2:
        raise InvalidParameterError(f"a ring needs at least 2 nodes, got {n}")
    edges = tuple((j, (j + 1) % n, Fraction(1)) for j in range(n))
    return Topology(n=n, edges=edges, kind=RING)


def coprime_ring_union(n: int, strides: list[int]) -> Topology:
    """Union of shift-by-s rings for each stride s coprime with n."""
    if n < 2:
        raise InvalidParameterError(f"need at least 2 nodes, got {n}")
    if not strides:
        raise InvalidParameterError("need at least one stride")
    if len(strides) != len(set(strides)):
        raise InvalidParameterError(f"duplicate stride in {strides}")
    for s in strides:
        if not (1 <= s < n):
            raise InvalidParameterError(f"stride {s} out of range for n={n}")
        if math.gcd(s, n) != 1:
            raise InvalidParameterError(f"stride {s} is not coprime with n={n} (gcd={math.gcd(s, n)})")
    edges = tuple((j, (j + s) % n, Fraction(1)) for s in sorted(strides) for j in range(n))
    return Topology(n=n, edges=edges, kind=COPRIME_RING_UNION)


def matched_topology(step: Step, n: int) -> Topology:
    """Circuit configuration with one direct unit-capacity link per step pair."""
    problem = validate_matching(step, n)
    if problem is not None:
        raise InvalidParameterError(f"not a valid matching: {problem}")
    edges = tuple((src, dst, Fraction(1)) for src, dst in step.sorted_pairs())
    return Topology(n=n, edges=edges, kind=MATCHED)


def custom_topology(n: int, edges: list[tuple[int, int, Fraction | int | float | str]]) -> Topology:
    """Build a custom topology from (src, dst, capacity) triples.

    Decimal capacities are converted exactly (via their decimal string), so
    downstream cost arithmetic stays rational.
    """
    converted = []
    for src, dst, cap in edges:
        if isinstance(cap, float):
            cap = Fraction(str(cap))
        converted.append((src, dst, Fraction(cap)))
    return Topology(n=n, edges=tuple(converted), kind=CUSTOM)


def shortest_path_hops(topo: Topology, src: int, dst: int) -> int | None:
    """Minimum hop count from src to dst; None when unreachable; 0 when equal."""
    if not (0 <= src < topo.n) or not (0 <= dst < topo.n):
        raise InvalidParameterError(f"node out of range: src={src} dst={dst} n={topo.n}")
    if src == dst:
        return 0
    dist = {src: 0}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        for nxt in topo.successors[node]:
            if nxt not in dist:
                dist[nxt] = dist[node] + 1
                if nxt == dst:
                    return dist[nxt]
                queue.append(nxt)
    return None
