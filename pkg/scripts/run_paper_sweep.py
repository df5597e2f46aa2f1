#!/usr/bin/env python3
"""Run the headline experiment grid: four collective/latency combinations.

Writes one sweep CSV per panel into results/ (rhd and swing AllReduce plus
All-to-All at alpha=100ns, and rhd again at alpha=10us), over the default
log-spaced (reconfiguration delay, message size) grid on a 64-GPU ring at
800 Gbps. Render heatmaps from the CSVs with the frontend/ package.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from opticsched.config import (
    DEFAULT_SWEEP_ALPHA_R_NS,
    DEFAULT_SWEEP_MSG_BYTES,
    ExperimentConfig,
)
from opticsched.sweep import run_sweep, write_sweep_csv

PANELS = [
    ("rhd_alpha100ns", "rhd", 100),
    ("rhd_alpha10us", "rhd", 10_000),
    ("swing_alpha100ns", "swing", 100),
    ("alltoall_alpha100ns", "alltoall", 100),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--n", type=int, default=64)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for label, generator, alpha_ns in PANELS:
        config = ExperimentConfig.from_dict(
            {
                "params": {
                    "n": args.n,
                    "bandwidth_gbps": 800,
                    "alpha_ns": alpha_ns,
                    "delta_ns": 100,
                    "alpha_r_ns": 0,
                },
                "collective": {"generator": generator, "msg_bytes": DEFAULT_SWEEP_MSG_BYTES[0]},
                "base_topology": {"kind": "ring"},
                "sweep": {
                    "alpha_r_ns": list(DEFAULT_SWEEP_ALPHA_R_NS),
                    "msg_bytes": list(DEFAULT_SWEEP_MSG_BYTES),
                },
            }
        )
        rows = run_sweep(config, Path.cwd(), workers=args.workers)
        out_path = args.out_dir / f"sweep_{label}.csv"
        with out_path.open("w", encoding="utf-8") as handle:
            write_sweep_csv(rows, handle)
        transitional = sum(1 for r in rows if r.speedup_vs_best > 1)
        print(f"{out_path}: {len(rows)} rows, {transitional} cells beat both baselines")


if __name__ == "__main__":
    main()
