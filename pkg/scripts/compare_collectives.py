#!/usr/bin/env python3
"""Print a quick table: optimal schedule cost per collective and switch delay.

Useful for eyeballing when reconfiguration pays off before running the full
sweep. Times are microseconds.
"""

from __future__ import annotations

import argparse

from opticsched import (
    FlowMetricsCache,
    SystemParams,
    all_to_all,
    baseline_bvn,
    baseline_static,
    recursive_halving_doubling,
    ring,
    ring_allreduce,
    solve_dp,
    swing_allreduce,
)

BUILDERS = {
    "rhd": recursive_halving_doubling,
    "swing": swing_allreduce,
    "ring": ring_allreduce,
    "alltoall": all_to_all,
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--msg-bytes", type=int, default=2**20)
    parser.add_argument(
        "--alpha-r-ns", type=int, nargs="+", default=[100, 1000, 10_000, 100_000]
    )
    args = parser.parse_args()

    topo = ring(args.n)
    cache = FlowMetricsCache()
    header = f"{'collective':>10} {'alpha_r':>10} {'opt_us':>12} {'static_us':>12} {'bvn_us':>12} {'reconfigs':>9}"
    print(header)
    for name, builder in BUILDERS.items():
        coll = builder(args.n, args.msg_bytes)
        for alpha_r in args.alpha_r_ns:
            params = SystemParams(n=args.n, alpha_r_ns=alpha_r)
            opt = solve_dp(params, coll, topo, cache)
            static = baseline_static(params, coll, topo, cache)
            bvn = baseline_bvn(params, coll, topo, cache)
            print(
                f"{name:>10} {alpha_r:>10} "
                f"{float(opt.cost.total_ns) / 1000:>12.2f} "
                f"{float(static.cost.total_ns) / 1000:>12.2f} "
                f"{float(bvn.cost.total_ns) / 1000:>12.2f} "
                f"{opt.reconfig_count:>9}"
            )


if __name__ == "__main__":
    main()
