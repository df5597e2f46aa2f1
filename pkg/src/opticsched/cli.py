"""Command-line front end: solve one instance, sweep a grid, or validate.

Exit codes: 0 success, 1 runtime failure (including validation findings),
2 config error. Output is byte-identical across repeated runs of the same
config; solver wall-clock times are deliberately left out of the documents.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .collectives import (
    Collective,
    aggregate_demand,
    parse_collective_document,
    validate_matching,
)
from .config import ExperimentConfig, build_collective, build_topology, load_config
from .errors import CollectiveFormatError, ConfigError, OpticschedError
from .flow import FlowMetricsCache
from .scheduler import baseline_bvn, baseline_static, solve_dp, solve_threshold
from .sweep import run_sweep, write_sweep_csv

_EXPECTED_SENT_FRACTION = {
    # Numerator/denominator of (bytes sent per node) / m.
    "recursive_halving_doubling": lambda n: (2 * (n - 1), n),
    "swing_allreduce": lambda n: (2 * (n - 1), n),
    "ring_allreduce": lambda n: (2 * (n - 1), n),
    "all_to_all": lambda n: (n - 1, n),
}


def _read_document(path_arg: str) -> tuple[str, Path]:
    if path_arg == "-":
        return sys.stdin.read(), Path.cwd()
    path = Path(path_arg)
    try:
        return path.read_text(encoding="utf-8"), path.resolve().parent
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    changes = {}
    if getattr(args, "epsilon", None) is not None:
        changes["epsilon"] = args.epsilon
    if getattr(args, "cap_theta", False):
        changes["cap_theta_at_one"] = True
    if getattr(args, "skip_identical_matched", False):
        changes["skip_identical_matched"] = True
    if not changes:
        return config
    from dataclasses import replace

    return replace(config, params=config.params.replace(**changes))


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def cmd_solve(config: ExperimentConfig, base_dir: Path, out_path: str | None) -> int:
    params = config.params
    msg_override = None
    if config.sweep is not None:
        if config.sweep.num_points != 1:
            raise ConfigError(
                f"solve needs exactly one grid point, sweep has {config.sweep.num_points}"
            )
        params = params.replace(alpha_r_ns=config.sweep.alpha_r_ns[0])
        msg_override = config.sweep.msg_bytes[0]
    coll = build_collective(config, base_dir, msg_bytes=msg_override)
    topo = build_topology(config)
    cache = FlowMetricsCache()

    opt = solve_dp(params, coll, topo, cache)
    doc: dict = {
        "instance": {
            "collective": coll.label,
            "num_steps": coll.num_steps,
            "n": params.n,
            "alpha_r_ns": params.alpha_r_ns,
        },
        "opt": opt.to_json_dict(),
        "baselines": {},
    }
    baseline_totals = {}
    runners = {"static": baseline_static, "bvn": baseline_bvn, "threshold": solve_threshold}
    for name, runner in runners.items():
        if name in config.solvers:
            report = runner(params, coll, topo, cache)
            doc["baselines"][name] = report.to_json_dict()
            baseline_totals[name] = report.cost.total_ns
    doc["speedup"] = {
        f"vs_{name}": float(total / opt.cost.total_ns) for name, total in baseline_totals.items()
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out_path)
    return 0


def cmd_sweep(config: ExperimentConfig, base_dir: Path, out_path: str | None, workers: int) -> int:
    if config.sweep is None:
        from dataclasses import replace

        from .config import DEFAULT_SWEEP_ALPHA_R_NS, DEFAULT_SWEEP_MSG_BYTES, SweepSpec

        if config.collective.file is not None:
            raise ConfigError("sweep: message-size axis requires a generator collective")
        config = replace(
            config,
            sweep=SweepSpec(
                alpha_r_ns=DEFAULT_SWEEP_ALPHA_R_NS, msg_bytes=DEFAULT_SWEEP_MSG_BYTES
            ),
        )
    rows = run_sweep(config, base_dir, workers=workers)
    import io

    buffer = io.StringIO()
    write_sweep_csv(rows, buffer)
    _emit(buffer.getvalue(), out_path)
    return 0


def _independent_demand_sum(coll: Collective) -> list[list[int]]:
    # Deliberately naive accumulation, kept separate from aggregate_demand.
    total = [[0] * coll.n for _ in range(coll.n)]
    for step in coll.steps:
        for src, dst in step.pairs:
            total[src][dst] += step.volume
    return total


def cmd_validate(document: str, base_dir: Path) -> int:
    """Check matchings, demand aggregation, and per-node byte totals."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc

    msg_bytes = None
    if isinstance(doc, dict) and "steps" in doc:
        # Bare collective document: parse leniently so bad matchings are
        # reported as verdicts rather than parse failures.
        n, label, steps = parse_collective_document(doc)
        label = label or "collective-file"
    else:
        config = ExperimentConfig.from_dict(doc)
        coll = build_collective(config, base_dir)
        n, steps = coll.n, list(coll.steps)
        label = coll.label or (config.collective.generator or config.collective.file or "?")
        msg_bytes = config.collective.msg_bytes

    failures = 0

    bad_steps = []
    for i, step in enumerate(steps):
        problem = validate_matching(step, n)
        if problem is not None:
            bad_steps.append((i, problem))
    if bad_steps:
        failures += 1
        for i, problem in bad_steps:
            print(f"matchings: FAIL step {i}: {problem}")
        print(f"validation: {failures} check(s) FAILED")
        return 1
    print(f"matchings: ok ({len(steps)} steps, n={n}, {label})")

    coll = Collective(n=n, steps=tuple(steps), label=label)
    demand = aggregate_demand(coll)
    reference = _independent_demand_sum(coll)
    mismatch = [
        (j, k)
        for j in range(coll.n)
        for k in range(coll.n)
        if int(demand[j, k]) != reference[j][k]
    ]
    diagonal = [j for j in range(coll.n) if int(demand[j, j]) != 0]
    if mismatch or diagonal:
        failures += 1
        print(f"demand-aggregation: FAIL mismatched cells {mismatch[:5]} diagonal {diagonal[:5]}")
    else:
        print("demand-aggregation: ok (weighted sum of step matrices, zero diagonal)")

    sent = [int(demand[j, :].sum()) for j in range(coll.n)]
    expectation = _EXPECTED_SENT_FRACTION.get(coll.label)
    if expectation is not None and msg_bytes is not None:
        num, den = expectation(coll.n)
        expected = msg_bytes * num // den
        wrong = [j for j, s in enumerate(sent) if s != expected]
        if wrong:
            failures += 1
            print(f"per-node-bytes: FAIL nodes {wrong[:5]} sent != {expected}")
        else:
            print(f"per-node-bytes: ok (every node sends {expected} bytes)")
    else:
        uniform = len(set(sent)) == 1
        print(f"per-node-bytes: info (min={min(sent)}, max={max(sent)}, uniform={uniform})")

    if failures:
        print(f"validation: {failures} check(s) FAILED")
        return 1
    print("validation: all checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opticsched",
        description="Schedule collective communication on a reconfigurable photonic fabric.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="config JSON path, or - for stdin")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--epsilon", type=float, default=None, help="override flow epsilon")
        p.add_argument("--cap-theta", action="store_true", help="clamp throughput at 1")
        p.add_argument(
            "--skip-identical-matched",
            action="store_true",
            help="no switch delay between consecutive identical matched steps",
        )

    add_common(sub.add_parser("solve", help="solve a single instance, print JSON report"))
    sweep_p = sub.add_parser("sweep", help="run the (alpha_r, message size) grid, write CSV")
    add_common(sweep_p)
    sweep_p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    add_common(sub.add_parser("validate", help="validate a config or collective document"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, base_dir = _read_document(args.config)
        if args.command == "validate":
            return cmd_validate(text, base_dir)
        config, _ = load_config(text, base_dir)
        config = _apply_overrides(config, args)
        if args.command == "solve":
            return cmd_solve(config, base_dir, args.out)
        return cmd_sweep(config, base_dir, args.out, workers=max(1, args.workers))
    except (ConfigError, CollectiveFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OpticschedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
