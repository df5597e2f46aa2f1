"""Experiment configuration: a single JSON document driving the CLI.

Example:

    {
      "params": {"n": 64, "bandwidth_gbps": 800, "alpha_ns": 100,
                 "delta_ns": 100, "alpha_r_ns": 10000, "epsilon": 0.05,
                 "cap_theta_at_one": false, "skip_identical_matched": false},
      "collective": {"generator": "rhd", "msg_bytes": 67108864},
      "base_topology": {"kind": "ring"},
      "sweep": {"alpha_r_ns": [100, 1000, 10000, 100000],
                "msg_bytes": [1024, 1048576, 1073741824]},
      "solvers": ["dp", "static", "bvn", "threshold"],
      "seed": 0
    }

Unknown keys are rejected everywhere so typos fail fast, and a parsed config
serializes back to the identical canonical document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .collectives import (
    Collective,
    all_to_all,
    load_collective,
    recursive_halving_doubling,
    ring_allreduce,
    swing_allreduce,
)
from .costmodel import SystemParams
from .errors import ConfigError, OpticschedError
from .topology import Topology, coprime_ring_union, custom_topology, ring

GENERATORS = ("rhd", "swing", "ring", "alltoall")
SOLVERS = ("dp", "static", "bvn", "threshold")

# Default grid: log-spaced reconfiguration delays 0.1us..316us and message
# sizes 1KB..1GB (all divisible by any n up to 1024).
DEFAULT_SWEEP_ALPHA_R_NS = (100, 316, 1000, 3162, 10_000, 31_623, 100_000, 316_228)
DEFAULT_SWEEP_MSG_BYTES = (
    2**10,
    2**13,
    2**16,
    2**19,
    2**22,
    2**25,
    2**28,
    2**30,
)

_GENERATOR_FUNCS = {
    "rhd": recursive_halving_doubling,
    "swing": swing_allreduce,
    "ring": ring_allreduce,
    "alltoall": all_to_all,
}


def _require_keys(section: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"{where}: missing required field(s) {sorted(missing)}")


def _positive_number(value, where: str) -> int | float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
        raise ConfigError(f"{where}: expected a positive number, got {value!r}")
    return value


def _non_negative_number(value, where: str) -> int | float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
        raise ConfigError(f"{where}: expected a non-negative number, got {value!r}")
    return value


@dataclass(frozen=True)
class CollectiveSpec:
    """Either a built-in generator with a message size, or a document path."""

    generator: str | None = None
    msg_bytes: int | None = None
    n: int | None = None
    file: str | None = None

    @staticmethod
    def from_dict(section: dict) -> "CollectiveSpec":
        _require_keys(section, {"generator", "msg_bytes", "n", "file"}, set(), "collective")
        if ("file" in section) == ("generator" in section):
            raise ConfigError("collective: give exactly one of 'generator' or 'file'")
        if "file" in section:
            if not isinstance(section["file"], str):
                raise ConfigError("collective.file must be a path string")
            if "msg_bytes" in section or "n" in section:
                raise ConfigError("collective: 'msg_bytes'/'n' only apply to generators")
            return CollectiveSpec(file=section["file"])
        generator = section["generator"]
        if generator not in GENERATORS:
            raise ConfigError(f"collective.generator must be one of {GENERATORS}, got {generator!r}")
        if "msg_bytes" not in section:
            raise ConfigError("collective: generator form requires 'msg_bytes'")
        msg = section["msg_bytes"]
        if isinstance(msg, bool) or not isinstance(msg, int) or msg <= 0:
            raise ConfigError(f"collective.msg_bytes must be a positive integer, got {msg!r}")
        n = section.get("n")
        if n is not None and (isinstance(n, bool) or not isinstance(n, int) or n < 2):
            raise ConfigError(f"collective.n must be an integer >= 2, got {n!r}")
        return CollectiveSpec(generator=generator, msg_bytes=msg, n=n)

    def to_json_dict(self) -> dict:
        if self.file is not None:
            return {"file": self.file}
        doc = {"generator": self.generator, "msg_bytes": self.msg_bytes}
        if self.n is not None:
            doc["n"] = self.n
        return doc


@dataclass(frozen=True)
class TopologySpec:
    """Base fabric: ring, union of coprime rings, or explicit edge list."""

    kind: str = "ring"
    strides: tuple[int, ...] = ()
    edges: tuple[tuple[int, int, int | float], ...] = ()

    @staticmethod
    def from_dict(section: dict) -> "TopologySpec":
        _require_keys(section, {"kind", "strides", "edges"}, {"kind"}, "base_topology")
        kind = section["kind"]
        if kind == "ring":
            if "strides" in section or "edges" in section:
                raise ConfigError("base_topology: ring takes no extra fields")
            return TopologySpec(kind="ring")
        if kind == "coprime-ring-union":
            strides = section.get("strides")
            if not isinstance(strides, list) or not strides or not all(
                isinstance(s, int) and not isinstance(s, bool) for s in strides
            ):
                raise ConfigError("base_topology.strides must be a non-empty list of integers")
            return TopologySpec(kind=kind, strides=tuple(strides))
        if kind == "custom":
            edges = section.get("edges")
            if not isinstance(edges, list) or not edges:
                raise ConfigError("base_topology.edges must be a non-empty list of [src, dst, capacity]")
            converted = []
            for e in edges:
                ok = (
                    isinstance(e, list)
                    and len(e) == 3
                    and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in e)
                    and isinstance(e[0], int)
                    and isinstance(e[1], int)
                )
                if not ok:
                    raise ConfigError(f"base_topology: malformed edge {e!r}")
                converted.append((e[0], e[1], e[2]))
            return TopologySpec(kind=kind, edges=tuple(converted))
        raise ConfigError(f"base_topology.kind must be ring|coprime-ring-union|custom, got {kind!r}")

    def to_json_dict(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.kind == "coprime-ring-union":
            doc["strides"] = list(self.strides)
        elif self.kind == "custom":
            doc["edges"] = [[s, d, c] for s, d, c in self.edges]
        return doc


@dataclass(frozen=True)
class SweepSpec:
    """Grid axes; values are deduplicated and sorted once at parse time."""

    alpha_r_ns: tuple[int | float, ...]
    msg_bytes: tuple[int, ...]

    @staticmethod
    def from_dict(section: dict) -> "SweepSpec":
        _require_keys(section, {"alpha_r_ns", "msg_bytes"}, {"alpha_r_ns", "msg_bytes"}, "sweep")
        raw_a = section["alpha_r_ns"]
        raw_m = section["msg_bytes"]
        if not isinstance(raw_a, list) or not raw_a:
            raise ConfigError("sweep.alpha_r_ns must be a non-empty list")
        if not isinstance(raw_m, list) or not raw_m:
            raise ConfigError("sweep.msg_bytes must be a non-empty list")
        alphas = tuple(sorted({_non_negative_number(v, "sweep.alpha_r_ns") for v in raw_a}))
        sizes = []
        for v in raw_m:
            if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
                raise ConfigError(f"sweep.msg_bytes entries must be positive integers, got {v!r}")
            sizes.append(v)
        return SweepSpec(alpha_r_ns=alphas, msg_bytes=tuple(sorted(set(sizes))))

    def to_json_dict(self) -> dict:
        return {"alpha_r_ns": list(self.alpha_r_ns), "msg_bytes": list(self.msg_bytes)}

    @property
    def num_points(self) -> int:
        return len(self.alpha_r_ns) * len(self.msg_bytes)


@dataclass(frozen=True)
class ExperimentConfig:
    params: SystemParams
    collective: CollectiveSpec
    base_topology: TopologySpec = TopologySpec()
    sweep: SweepSpec | None = None
    solvers: tuple[str, ...] = SOLVERS
    seed: int = 0

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        _require_keys(
            doc,
            {"params", "collective", "base_topology", "sweep", "solvers", "seed"},
            {"params", "collective"},
            "config",
        )
        params_doc = doc["params"]
        if not isinstance(params_doc, dict):
            raise ConfigError("params must be an object")
        _require_keys(
            params_doc,
            {
                "n",
                "bandwidth_gbps",
                "alpha_ns",
                "delta_ns",
                "alpha_r_ns",
                "epsilon",
                "cap_theta_at_one",
                "skip_identical_matched",
            },
            {"n"},
            "params",
        )
        n = params_doc["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            raise ConfigError(f"params.n must be an integer >= 2, got {n!r}")
        kwargs: dict = {"n": n}
        for key in ("bandwidth_gbps", "alpha_ns", "delta_ns", "alpha_r_ns", "epsilon"):
            if key in params_doc:
                check = _positive_number if key in ("bandwidth_gbps", "epsilon") else _non_negative_number
                kwargs[key] = check(params_doc[key], f"params.{key}")
        for key in ("cap_theta_at_one", "skip_identical_matched"):
            if key in params_doc:
                if not isinstance(params_doc[key], bool):
                    raise ConfigError(f"params.{key} must be a boolean")
                kwargs[key] = params_doc[key]
        try:
            params = SystemParams(**kwargs)
        except OpticschedError as exc:
            raise ConfigError(f"params: {exc}") from exc

        collective = CollectiveSpec.from_dict(doc["collective"]) if isinstance(doc["collective"], dict) else None
        if collective is None:
            raise ConfigError("collective must be an object")
        if collective.n is not None and collective.n != params.n:
            raise ConfigError(f"collective.n={collective.n} disagrees with params.n={params.n}")

        topology = TopologySpec()
        if "base_topology" in doc:
            if not isinstance(doc["base_topology"], dict):
                raise ConfigError("base_topology must be an object")
            topology = TopologySpec.from_dict(doc["base_topology"])

        sweep = None
        if "sweep" in doc and doc["sweep"] is not None:
            if not isinstance(doc["sweep"], dict):
                raise ConfigError("sweep must be an object")
            sweep = SweepSpec.from_dict(doc["sweep"])
            if collective.file is not None:
                raise ConfigError("sweep: message-size axis requires a generator collective")

        solvers = SOLVERS
        if "solvers" in doc:
            raw = doc["solvers"]
            if not isinstance(raw, list) or not raw or not all(isinstance(s, str) for s in raw):
                raise ConfigError("solvers must be a non-empty list of names")
            for s in raw:
                if s not in SOLVERS:
                    raise ConfigError(f"unknown solver {s!r}; valid: {list(SOLVERS)}")
            if len(set(raw)) != len(raw):
                raise ConfigError("solvers list has duplicates")
            solvers = tuple(s for s in SOLVERS if s in raw)

        seed = doc.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"seed must be an integer, got {seed!r}")

        return ExperimentConfig(
            params=params,
            collective=collective,
            base_topology=topology,
            sweep=sweep,
            solvers=solvers,
            seed=seed,
        )

    def to_json_dict(self) -> dict:
        params_doc = {
            "n": self.params.n,
            "bandwidth_gbps": self.params.bandwidth_gbps,
            "alpha_ns": self.params.alpha_ns,
            "delta_ns": self.params.delta_ns,
            "alpha_r_ns": self.params.alpha_r_ns,
            "epsilon": self.params.epsilon,
            "cap_theta_at_one": self.params.cap_theta_at_one,
            "skip_identical_matched": self.params.skip_identical_matched,
        }
        doc: dict = {
            "params": params_doc,
            "collective": self.collective.to_json_dict(),
            "base_topology": self.base_topology.to_json_dict(),
        }
        if self.sweep is not None:
            doc["sweep"] = self.sweep.to_json_dict()
        doc["solvers"] = list(self.solvers)
        doc["seed"] = self.seed
        return doc


def load_config(text: str, base_dir: Path | None = None) -> tuple[ExperimentConfig, Path]:
    """Parse a config JSON document; returns the config and its base directory."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return ExperimentConfig.from_dict(doc), (base_dir or Path.cwd())


def build_topology(config: ExperimentConfig) -> Topology:
    spec = config.base_topology
    n = config.params.n
    try:
        if spec.kind == "ring":
            return ring(n)
        if spec.kind == "coprime-ring-union":
            return coprime_ring_union(n, list(spec.strides))
        return custom_topology(n, list(spec.edges))
    except OpticschedError as exc:
        raise ConfigError(f"base_topology: {exc}") from exc


def build_collective(
    config: ExperimentConfig,
    base_dir: Path,
    msg_bytes: int | None = None,
) -> Collective:
    """Materialize the collective, optionally overriding the message size."""
    spec = config.collective
    if spec.file is not None:
        if msg_bytes is not None:
            raise ConfigError("cannot override msg_bytes for a file collective")
        path = Path(spec.file)
        if not path.is_absolute():
            path = base_dir / path
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read collective file {path}: {exc}") from exc
        coll = load_collective(text)
        if coll.n != config.params.n:
            raise ConfigError(f"collective file has n={coll.n}, params.n={config.params.n}")
        return coll
    m = msg_bytes if msg_bytes is not None else spec.msg_bytes
    assert spec.generator is not None and m is not None
    try:
        return _GENERATOR_FUNCS[spec.generator](config.params.n, m)
    except OpticschedError as exc:
        raise ConfigError(f"collective: {exc}") from exc
