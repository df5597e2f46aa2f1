from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opticsched import (
    FlowMetricsCache,
    InfeasibleDemandError,
    InvalidParameterError,
    Step,
    WrongMethodError,
    approx_concurrent_flow,
    coprime_ring_union,
    matched_topology,
    ring,
    step_metrics,
    unique_path_flow,
)

from oracles import lp_concurrent_flow, shift_step, xor_step

COPRIME_8_13 = coprime_ring_union(8, [1, 3])


class TestUniquePath:
    def test_shift1_is_contention_free(self):
        res = unique_path_flow(ring(8), shift_step(8, 1))
        assert res.theta == 1 and res.hops == 1

    def test_ring64_shift8(self):
        res = unique_path_flow(ring(64), shift_step(64, 8))
        assert res.theta == Fraction(1, 8) and res.hops == 8

    def test_ring4_xor_step(self):
        res = unique_path_flow(ring(4), xor_step(4, 1))
        assert res.theta == Fraction(1, 2) and res.hops == 3

    def test_wrong_method_on_multipath(self):
        with pytest.raises(WrongMethodError):
            unique_path_flow(COPRIME_8_13, shift_step(8, 1))

    def test_unreachable_pair(self):
        topo = matched_topology(Step(pairs=frozenset({(0, 1)}), volume=1), 4)
        with pytest.raises(InfeasibleDemandError):
            unique_path_flow(topo, Step(pairs=frozenset({(1, 0)}), volume=1))

    @given(st.sampled_from([4, 8, 64]), st.data())
    def test_ring_shift_closed_form(self, n, data):
        k = data.draw(st.integers(min_value=1, max_value=n - 1))
        res = unique_path_flow(ring(n), shift_step(n, k))
        assert res.theta == Fraction(1, k)
        assert res.hops == k

    def test_matched_topology_carries_own_step(self):
        step = Step(pairs=frozenset({(0, 3), (3, 0), (1, 2), (2, 1)}), volume=5)
        res = unique_path_flow(matched_topology(step, 4), step)
        assert res.theta == 1 and res.hops == 1


class TestApproxConcurrentFlow:
    def test_bracket_on_ring_shift2(self):
        res = approx_concurrent_flow(ring(8), shift_step(8, 2), 0.05)
        assert Fraction(19, 40) <= res.theta <= Fraction(1, 2)  # [0.475, 0.5]
        assert res.hops == 2

    def test_matched_topology_full_throughput(self):
        step = Step(pairs=frozenset({(0, 1), (1, 0), (2, 3), (3, 2)}), volume=5)
        res = approx_concurrent_flow(matched_topology(step, 4), step, 0.05)
        assert Fraction(19, 20) <= res.theta <= 1
        assert res.hops == 1

    def test_epsilon_out_of_range(self):
        for eps in (0.0, -0.1, 0.6):
            with pytest.raises(InvalidParameterError):
                approx_concurrent_flow(ring(4), shift_step(4, 1), eps)

    def test_unreachable_pair(self):
        topo = matched_topology(Step(pairs=frozenset({(0, 1)}), volume=1), 4)
        with pytest.raises(InfeasibleDemandError):
            approx_concurrent_flow(topo, Step(pairs=frozenset({(1, 0)}), volume=1), 0.1)

    @pytest.mark.parametrize("k", range(1, 8))
    def test_coprime_union_vs_lp_oracle(self, k):
        eps = 0.05
        step = shift_step(8, k)
        exact = lp_concurrent_flow(COPRIME_8_13, step)
        res = approx_concurrent_flow(COPRIME_8_13, step, eps)
        assert float(res.theta) >= (1 - eps) * exact - 1e-9
        assert float(res.theta) <= exact + 1e-9

    def test_multipath_can_exceed_one(self):
        # Direct stride-3 edges plus three-hop stride-1 detours: theta* = 4/3.
        res = approx_concurrent_flow(COPRIME_8_13, shift_step(8, 3), 0.05)
        assert res.theta > 1

    @settings(max_examples=25, deadline=None)
    @given(
        st.sampled_from([4, 6, 8]),
        st.sampled_from([0.01, 0.05, 0.1]),
        st.data(),
    )
    def test_bracket_against_unique_path(self, n, eps, data):
        k = data.draw(st.integers(min_value=1, max_value=n - 1))
        step = shift_step(n, k)
        exact = unique_path_flow(ring(n), step).theta
        res = approx_concurrent_flow(ring(n), step, eps)
        assert (1 - Fraction(str(eps))) * exact <= res.theta <= exact

    def test_deterministic(self):
        a = approx_concurrent_flow(COPRIME_8_13, shift_step(8, 5), 0.05)
        b = approx_concurrent_flow(COPRIME_8_13, shift_step(8, 5), 0.05)
        assert a.theta == b.theta and a.hops == b.hops


class TestEdgeMonotonicity:
    @pytest.mark.parametrize("extra", [(0, 2), (0, 4), (3, 1), (5, 2)])
    def test_adding_edge_never_decreases_theta(self, extra):
        from opticsched import custom_topology

        base_edges = [(j, (j + 1) % 8, 1) for j in range(8)]
        base = custom_topology(8, base_edges)
        augmented = custom_topology(8, base_edges + [(extra[0], extra[1], 1)])
        for k in (1, 2, 5):
            step = shift_step(8, k)
            assert lp_concurrent_flow(augmented, step) >= lp_concurrent_flow(base, step) - 1e-9


class TestStepMetrics:
    def test_dispatches_to_unique_path_on_ring(self):
        res = step_metrics(ring(64), shift_step(64, 8))
        assert res.method == "unique-path-exact"
        assert res.theta == Fraction(1, 8)

    def test_dispatches_to_fptas_on_union(self):
        res = step_metrics(COPRIME_8_13, shift_step(8, 2), epsilon=0.05)
        assert res.method == "fptas"

    def test_matched_topology_shortcut_exact(self):
        step = shift_step(8, 3)
        res = step_metrics(matched_topology(step, 8), step)
        assert res.theta == 1 and res.hops == 1 and res.method == "unique-path-exact"

    def test_volume_does_not_matter(self):
        light = step_metrics(ring(8), shift_step(8, 3, volume=1))
        heavy = step_metrics(ring(8), shift_step(8, 3, volume=2**30))
        assert light.theta == heavy.theta and light.hops == heavy.hops

    def test_cache_returns_identical_results(self):
        cache = FlowMetricsCache()
        step = shift_step(8, 2)
        cold = step_metrics(COPRIME_8_13, step, 0.05, cache)
        warm = step_metrics(COPRIME_8_13, step, 0.05, cache)
        uncached = step_metrics(COPRIME_8_13, step, 0.05)
        assert warm is cold
        assert uncached.theta == cold.theta
        assert len(cache) == 1

    def test_cache_distinguishes_epsilon(self):
        cache = FlowMetricsCache()
        step = shift_step(8, 2)
        step_metrics(COPRIME_8_13, step, 0.05, cache)
        step_metrics(COPRIME_8_13, step, 0.1, cache)
        assert len(cache) == 2

    def test_empty_step(self):
        res = step_metrics(ring(4), Step(pairs=frozenset(), volume=3))
        assert res.theta == 1 and res.hops == 0
