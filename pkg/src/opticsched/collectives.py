"""Collective algorithms as explicit matching sequences.

A collective is modeled as an ordered list of steps. Each step is a matching
(every GPU sends to at most one peer and receives from at most one peer)
together with the number of bytes every communicating pair exchanges in that
step. The generators below emit the standard patterns:

  recursive_halving_doubling  reduce-scatter by recursive halving followed by
                              an allgather by recursive doubling (XOR peers)
  swing_allreduce             swing peer sequence, same volume schedule as
                              halving/doubling
  ring_allreduce              2(n-1) shift-by-1 steps of m/n bytes
  all_to_all                  n-1 linear-shift steps of m/n bytes

Volumes are integer bytes throughout; m must divide evenly so that every
step volume is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CollectiveFormatError, InternalInvariantError, InvalidParameterError, UnsupportedSizeError


@dataclass(frozen=True)
class Step:
    """One communication round: a matching plus bytes per communicating pair."""

    pairs: frozenset[tuple[int, int]]
    volume: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", frozenset(self.pairs))

    def sorted_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.pairs))


@dataclass(frozen=True)
class Collective:
    """An ordered, order-sensitive sequence of steps on n nodes."""

    n: int
    steps: tuple[Step, ...]
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise InvalidParameterError("a collective needs at least one step")
        for i, step in enumerate(self.steps):
            problem = validate_matching(step, self.n)
            if problem is not None:
                raise InvalidParameterError(f"step {i}: {problem}")

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    def volumes(self) -> tuple[int, ...]:
        return tuple(step.volume for step in self.steps)


def validate_matching(step: Step, n: int) -> str | None:
    """Check that a step is a valid partial permutation on 0..n-1.

    Returns None when the step is well formed, otherwise a description of the
    first violated rule including the offending node.
    """
    if step.volume <= 0:
        return f"volume must be positive, got {step.volume}"
    senders: set[int] = set()
    receivers: set[int] = set()
    for src, dst in sorted(step.pairs):
        if not (0 <= src < n):
            return f"node {src} out of range for n={n}"
        if not (0 <= dst < n):
            return f"node {dst} out of range for n={n}"
        if src == dst:
            return f"node {src} has a self-loop"
        if src in senders:
            return f"node {src} sends twice"
        if dst in receivers:
            return f"node {dst} receives twice"
        senders.add(src)
        receivers.add(dst)
    return None


def _require_valid(steps: list[Step], n: int, label: str) -> Collective:
    # Generators must never emit a bad matching; fail loudly if one does.
    for i, step in enumerate(steps):
        problem = validate_matching(step, n)
        if problem is not None:
            raise InternalInvariantError(f"{label} generated an invalid step {i}: {problem}")
    return Collective(n=n, steps=tuple(steps), label=label)


def _check_allreduce_args(n: int, m: int, power_of_two: bool) -> None:
    if n < 2:
        raise InvalidParameterError(f"need at least 2 nodes, got {n}")
    if power_of_two and n & (n - 1) != 0:
        raise UnsupportedSizeError(f"node count must be a power of two, got {n}")
    if m <= 0 or m % n != 0:
        raise InvalidParameterError(f"message size {m} must be a positive multiple of n={n}")


def recursive_halving_doubling(n: int, m: int) -> Collective:
    """Reduce-scatter by recursive halving, then allgather by recursive doubling.

    2*log2(n) steps. Reduce-scatter step i (1-based) pairs j with j XOR 2^(i-1)
    and moves m/2^i bytes; the allgather phase mirrors the distances and
    volumes in reverse. Total bytes sent per node: 2m(1 - 1/n).
    """
    _check_allreduce_args(n, m, power_of_two=True)
    rounds = n.bit_length() - 1
    steps: list[Step] = []
    for i in range(1, rounds + 1):
        pairs = frozenset((j, j ^ (1 << (i - 1))) for j in range(n))
        steps.append(Step(pairs=pairs, volume=m >> i))
    for i in range(1, rounds + 1):
        distance_bit = rounds - i
        pairs = frozenset((j, j ^ (1 << distance_bit)) for j in range(n))
        steps.append(Step(pairs=pairs, volume=m >> (distance_bit + 1)))
    return _require_valid(steps, n, "recursive_halving_doubling")


def _swing_distance(h: int) -> int:
    # 1, -1, 3, -5, 11, ... : alternating-sign distances that visit every peer.
    return (1 - (-2) ** (h + 1)) // 3


def swing_allreduce(n: int, m: int) -> Collective:
    """Swing allreduce: same volume schedule as halving/doubling, swing peers.

    At reduce-scatter round h (0-based), node r exchanges with
    (r + (-1)^r * d(h)) mod n where d(h) = (1 - (-2)^(h+1)) / 3. The allgather
    phase replays the rounds in reverse order.
    """
    _check_allreduce_args(n, m, power_of_two=True)
    rounds = n.bit_length() - 1
    rs_steps: list[Step] = []
    for h in range(rounds):
        d = _swing_distance(h)
        pairs = frozenset((r, (r + d if r % 2 == 0 else r - d) % n) for r in range(n))
        rs_steps.append(Step(pairs=pairs, volume=m >> (h + 1)))
    ag_steps = [Step(pairs=step.pairs, volume=step.volume) for step in reversed(rs_steps)]
    return _require_valid(rs_steps + ag_steps, n, "swing_allreduce")


def ring_allreduce(n: int, m: int) -> Collective:
    """Ring allreduce: 2(n-1) shift-by-1 steps, m/n bytes each."""
    _check_allreduce_args(n, m, power_of_two=False)
    shift = frozenset((j, (j + 1) % n) for j in range(n))
    steps = [Step(pairs=shift, volume=m // n) for _ in range(2 * (n - 1))]
    return _require_valid(steps, n, "ring_allreduce")


def all_to_all(n: int, m: int) -> Collective:
    """Linear-shift all-to-all: step i shifts by i, block size m/n.

    m is the total per-node send buffer; the self-block stays local, so n-1
    steps move everything.
    """
    _check_allreduce_args(n, m, power_of_two=False)
    steps = [
        Step(pairs=frozenset((j, (j + i) % n) for j in range(n)), volume=m // n)
        for i in range(1, n)
    ]
    return _require_valid(steps, n, "all_to_all")


def aggregate_demand(c: Collective) -> np.ndarray:
    """Sum of the step permutation matrices weighted by their volumes.

    Entry (j, k) is the total bytes j sends to k across the whole collective.
    """
    demand = np.zeros((c.n, c.n), dtype=np.int64)
    for step in c.steps:
        for src, dst in step.pairs:
            demand[src, dst] += step.volume
    return demand


_COLLECTIVE_KEYS = {"n", "label", "steps"}
_STEP_KEYS = {"pairs", "volume"}


def parse_collective_document(document: str | bytes | dict) -> tuple[int, str, list[Step]]:
    """Structural parse of a collective document, without matching validation.

    Checks JSON shape only (types, unknown fields, duplicate pairs); the
    returned steps may still violate the matching rules. load_collective adds
    the semantic checks.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise CollectiveFormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    else:
        data = document
    if not isinstance(data, dict):
        raise CollectiveFormatError("top-level document must be an object")
    unknown = set(data) - _COLLECTIVE_KEYS
    if unknown:
        raise CollectiveFormatError(f"unknown field(s): {sorted(unknown)}")
    for key in ("n", "steps"):
        if key not in data:
            raise CollectiveFormatError(f"missing required field '{key}'")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise CollectiveFormatError(f"'n' must be an integer >= 2, got {n!r}")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise CollectiveFormatError("'label' must be a string")
    raw_steps = data["steps"]
    if not isinstance(raw_steps, list) or not raw_steps:
        raise CollectiveFormatError("'steps' must be a non-empty list")

    steps: list[Step] = []
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, dict):
            raise CollectiveFormatError(f"step {i}: must be an object")
        unknown = set(raw) - _STEP_KEYS
        if unknown:
            raise CollectiveFormatError(f"step {i}: unknown field(s): {sorted(unknown)}")
        if "pairs" not in raw or "volume" not in raw:
            raise CollectiveFormatError(f"step {i}: needs 'pairs' and 'volume'")
        volume = raw["volume"]
        if not isinstance(volume, int) or isinstance(volume, bool):
            raise CollectiveFormatError(f"step {i}: 'volume' must be an integer byte count")
        raw_pairs = raw["pairs"]
        if not isinstance(raw_pairs, list):
            raise CollectiveFormatError(f"step {i}: 'pairs' must be a list of [src, dst]")
        pairs: list[tuple[int, int]] = []
        for entry in raw_pairs:
            ok = (
                isinstance(entry, list)
                and len(entry) == 2
                and all(isinstance(v, int) and not isinstance(v, bool) for v in entry)
            )
            if not ok:
                raise CollectiveFormatError(f"step {i}: malformed pair {entry!r}")
            pairs.append((entry[0], entry[1]))
        if len(pairs) != len(set(pairs)):
            raise CollectiveFormatError(f"step {i}: duplicate pair")
        steps.append(Step(pairs=frozenset(pairs), volume=volume))
    return n, label, steps


def load_collective(document: str | bytes | dict) -> Collective:
    """Parse and fully validate a collective from its JSON document form.

    Schema: {"n": int, "label": str?, "steps": [{"pairs": [[src, dst], ...],
    "volume": int}]}. Unknown fields are rejected.
    """
    n, label, steps = parse_collective_document(document)
    for i, step in enumerate(steps):
        problem = validate_matching(step, n)
        if problem is not None:
            raise CollectiveFormatError(f"step {i}: {problem}")
    return Collective(n=n, steps=tuple(steps), label=label)


def collective_to_document(c: Collective) -> dict:
    """Inverse of load_collective (modulo pair ordering)."""
    return {
        "n": c.n,
        "label": c.label,
        "steps": [
            {"pairs": [[src, dst] for src, dst in step.sorted_pairs()], "volume": step.volume}
            for step in c.steps
        ],
    }
