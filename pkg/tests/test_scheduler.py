import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opticsched import (
    Assignment,
    Collective,
    FlowMetricsCache,
    Step,
    SystemParams,
    TooLargeError,
    all_base,
    all_matched,
    all_to_all,
    baseline_bvn,
    baseline_static,
    coprime_ring_union,
    recursive_halving_doubling,
    ring,
    ring_allreduce,
    schedule_cost,
    solve_brute_force,
    solve_dp,
    solve_threshold,
    swing_allreduce,
)

from oracles import brute_force_cost_reference, random_matching_step, shift_step

BASE_PARAMS = SystemParams(n=8, bandwidth_gbps=800, alpha_ns=100, delta_ns=100, alpha_r_ns=10_000)


def random_instance(rng: random.Random):
    n = rng.choice([4, 8])
    kind = rng.choice(["rhd", "swing", "ring", "alltoall", "custom"])
    m = rng.choice([n, 4 * n, 64 * n, 4096 * n, 2**20])
    m -= m % n
    if kind == "rhd":
        coll = recursive_halving_doubling(n, m)
    elif kind == "swing":
        coll = swing_allreduce(n, m)
    elif kind == "ring":
        coll = ring_allreduce(n, m)
    elif kind == "alltoall":
        coll = all_to_all(n, m)
    else:
        steps = tuple(
            random_matching_step(rng, n, rng.randrange(1, 10_000))
            for _ in range(rng.randrange(1, 13))
        )
        coll = Collective(n=n, steps=steps, label="custom")
    alpha_r = rng.choice([0, 1, 137, 10_000, 1_000_000])
    params = SystemParams(
        n=n,
        bandwidth_gbps=rng.choice([800, 100, 7]),
        alpha_ns=rng.choice([0, 100]),
        delta_ns=rng.choice([0, 100]),
        alpha_r_ns=alpha_r,
    )
    return params, coll, ring(n)


class TestDpExactness:
    def test_matches_brute_force_on_random_instances(self):
        rng = random.Random(1234)
        cache = FlowMetricsCache()
        for _ in range(120):
            params, coll, topo = random_instance(rng)
            dp = solve_dp(params, coll, topo, cache)
            bf = solve_brute_force(params, coll, topo, cache)
            assert dp.cost.total_ns == bf.cost.total_ns
            assert dp.schedule == bf.schedule  # identical tie-breaking

    def test_matches_textbook_reference(self):
        rng = random.Random(99)
        cache = FlowMetricsCache()
        for _ in range(40):
            params, coll, topo = random_instance(rng)
            dp = solve_dp(params, coll, topo, cache)
            from opticsched.scheduler import _step_cost_table

            table = _step_cost_table(params, coll, topo, cache)
            reference = brute_force_cost_reference(
                [(row[Assignment.BASE], row[Assignment.MATCHED]) for row in table],
                params.alpha_r,
            )
            assert dp.cost.total_ns == reference

    def test_skip_identical_matched_stays_exact(self):
        rng = random.Random(5)
        cache = FlowMetricsCache()
        for _ in range(40):
            params, coll, topo = random_instance(rng)
            params = params.replace(skip_identical_matched=True)
            dp = solve_dp(params, coll, topo, cache)
            bf = solve_brute_force(params, coll, topo, cache)
            assert dp.cost.total_ns == bf.cost.total_ns
            assert dp.schedule == bf.schedule

    def test_cost_reproduces_under_reevaluation(self):
        rng = random.Random(7)
        for _ in range(10):
            params, coll, topo = random_instance(rng)
            report = solve_dp(params, coll, topo)
            again = schedule_cost(params, coll, topo, report.schedule)
            assert again.total_ns == report.cost.total_ns


class TestKnownOptima:
    def test_ring_collective_on_ring_stays_base(self):
        # Every step has theta = 1 and one hop; matching only adds delay.
        report = solve_dp(BASE_PARAMS.replace(n=4), ring_allreduce(4, 400), ring(4))
        assert report.schedule == all_base(6)
        assert report.cost.total_ns == 1206

    def test_free_reconfiguration_goes_all_matched(self):
        params = BASE_PARAMS.replace(alpha_r_ns=0)
        coll = recursive_halving_doubling(8, 8 * 2**14)
        report = solve_dp(params, coll, ring(8))
        assert report.schedule == all_matched(coll.num_steps)
        s = coll.num_steps
        expected = s * params.alpha + s * params.delta + params.beta_ns_per_byte * sum(
            coll.volumes()
        )
        assert report.cost.total_ns == expected

    def test_single_step_base_when_delay_huge(self):
        coll = Collective(n=8, steps=(shift_step(8, 1, volume=64),), label="one")
        report = solve_dp(BASE_PARAMS.replace(alpha_r_ns=10**9), coll, ring(8))
        assert report.schedule == (Assignment.BASE,)

    def test_single_step_matched_when_delay_free(self):
        coll = Collective(n=64, steps=(shift_step(64, 32, volume=2**20),), label="one")
        params = BASE_PARAMS.replace(n=64, alpha_r_ns=0)
        report = solve_dp(params, coll, ring(64))
        assert report.schedule == (Assignment.MATCHED,)

    def test_tie_breaks_toward_base(self):
        # alpha_r = 0 and a contention-free step: both choices cost the same.
        coll = Collective(n=8, steps=(shift_step(8, 1, volume=64),) * 3, label="ties")
        params = BASE_PARAMS.replace(alpha_r_ns=0)
        dp = solve_dp(params, coll, ring(8))
        bf = solve_brute_force(params, coll, topo=ring(8))
        assert dp.schedule == all_base(3)
        assert bf.schedule == all_base(3)

    def test_rhd64_dp_equals_brute_force(self):
        params = SystemParams(n=64, alpha_r_ns=10_000)
        coll = recursive_halving_doubling(64, 64 * 2**20)
        cache = FlowMetricsCache()
        dp = solve_dp(params, coll, ring(64), cache)
        bf = solve_brute_force(params, coll, ring(64), cache)
        assert dp.cost.total_ns == bf.cost.total_ns
        assert dp.schedule == bf.schedule


class TestBaselines:
    def test_bvn_pays_every_reconfiguration(self):
        coll = all_to_all(8, 64)
        report = baseline_bvn(BASE_PARAMS, coll, ring(8))
        assert report.cost.reconfig_ns == coll.num_steps * BASE_PARAMS.alpha_r
        assert report.reconfig_count == coll.num_steps

    def test_static_never_reconfigures(self):
        report = baseline_static(BASE_PARAMS, all_to_all(8, 64), ring(8))
        assert report.cost.reconfig_ns == 0
        assert report.reconfig_count == 0

    def test_dominance(self):
        rng = random.Random(42)
        cache = FlowMetricsCache()
        for _ in range(60):
            params, coll, topo = random_instance(rng)
            opt = solve_dp(params, coll, topo, cache).cost.total_ns
            static = baseline_static(params, coll, topo, cache).cost.total_ns
            bvn = baseline_bvn(params, coll, topo, cache).cost.total_ns
            assert opt <= static and opt <= bvn


class TestThreshold:
    def test_contention_free_step_stays_base(self):
        coll = Collective(n=8, steps=(shift_step(8, 1, volume=2**20),), label="one")
        report = solve_threshold(BASE_PARAMS, coll, ring(8))
        assert report.schedule == (Assignment.BASE,)

    def test_congested_step_switches_when_free(self):
        coll = Collective(n=8, steps=(shift_step(8, 5, volume=2**20),), label="one")
        report = solve_threshold(BASE_PARAMS.replace(alpha_r_ns=0), coll, ring(8))
        assert report.schedule == (Assignment.MATCHED,)

    def test_never_beats_dp(self):
        rng = random.Random(77)
        cache = FlowMetricsCache()
        for _ in range(60):
            params, coll, topo = random_instance(rng)
            heuristic = solve_threshold(params, coll, topo, cache).cost.total_ns
            opt = solve_dp(params, coll, topo, cache).cost.total_ns
            assert heuristic >= opt


class TestMonotonicity:
    def test_opt_cost_non_decreasing_in_alpha_r(self):
        coll = recursive_halving_doubling(16, 16 * 2**10)
        topo = ring(16)
        cache = FlowMetricsCache()
        previous = None
        for alpha_r in [0, 10, 100, 1000, 10_000, 100_000, 10**6]:
            total = solve_dp(
                BASE_PARAMS.replace(n=16, alpha_r_ns=alpha_r), coll, topo, cache
            ).cost.total_ns
            if previous is not None:
                assert total >= previous
            previous = total

    def test_bvn_gap_non_decreasing_in_alpha_r(self):
        coll = recursive_halving_doubling(16, 16 * 2**10)
        topo = ring(16)
        cache = FlowMetricsCache()
        previous_gap = None
        for alpha_r in [0, 10, 100, 1000, 10_000, 100_000, 10**6]:
            params = BASE_PARAMS.replace(n=16, alpha_r_ns=alpha_r)
            gap = (
                baseline_bvn(params, coll, topo, cache).cost.total_ns
                - solve_dp(params, coll, topo, cache).cost.total_ns
            )
            if previous_gap is not None:
                assert gap >= previous_gap
            previous_gap = gap

    def test_zero_delay_matches_bvn(self):
        params = BASE_PARAMS.replace(alpha_r_ns=0)
        coll = swing_allreduce(8, 8 * 2**10)
        opt = solve_dp(params, coll, ring(8))
        bvn = baseline_bvn(params, coll, ring(8))
        assert opt.cost.total_ns == bvn.cost.total_ns

    def test_huge_delay_matches_static(self):
        from opticsched import step_metrics

        coll = recursive_halving_doubling(16, 16 * 2**10)
        topo = ring(16)
        beta = BASE_PARAMS.beta_ns_per_byte
        bound = Fraction(0)
        worst = Fraction(0)
        for step in coll.steps:
            metrics = step_metrics(topo, step)
            worst = max(worst, 1 / Fraction(metrics.theta))
            bound += BASE_PARAMS.delta * metrics.hops
        bound += beta * sum(coll.volumes()) * worst
        params = BASE_PARAMS.replace(n=16, alpha_r_ns=int(bound) + 1)
        report = solve_dp(params, coll, topo)
        assert report.schedule == all_base(coll.num_steps)
        assert report.cost.total_ns == baseline_static(params, coll, topo).cost.total_ns


class TestGuards:
    def test_brute_force_step_cap(self):
        coll = ring_allreduce(16, 16 * 4)  # 30 steps
        with pytest.raises(TooLargeError):
            solve_brute_force(BASE_PARAMS.replace(n=16), coll, ring(16))

    def test_solver_tags(self):
        coll = all_to_all(4, 16)
        topo = ring(4)
        params = BASE_PARAMS.replace(n=4)
        assert solve_dp(params, coll, topo).solver == "dp"
        assert solve_brute_force(params, coll, topo).solver == "brute-force"
        assert baseline_static(params, coll, topo).solver == "static"
        assert baseline_bvn(params, coll, topo).solver == "bvn"
        assert solve_threshold(params, coll, topo).solver == "threshold"
