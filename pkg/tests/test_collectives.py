import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opticsched import (
    CollectiveFormatError,
    InvalidParameterError,
    Step,
    UnsupportedSizeError,
    aggregate_demand,
    all_to_all,
    load_collective,
    recursive_halving_doubling,
    ring_allreduce,
    swing_allreduce,
    validate_matching,
)
from opticsched.collectives import collective_to_document

from oracles import independent_demand_sum

GENERATORS = [recursive_halving_doubling, swing_allreduce, ring_allreduce, all_to_all]

pow2_sizes = st.sampled_from([2, 4, 8, 16, 32])
multipliers = st.integers(min_value=1, max_value=2**20)


def xor_distance(step, n):
    distances = {src ^ dst for src, dst in step.pairs}
    assert len(distances) == 1
    return distances.pop()


class TestRecursiveHalvingDoubling:
    def test_volumes_and_distances_n4(self):
        coll = recursive_halving_doubling(4, 1024)
        assert coll.volumes() == (512, 256, 256, 512)
        assert [xor_distance(s, 4) for s in coll.steps] == [1, 2, 2, 1]

    def test_n2(self):
        coll = recursive_halving_doubling(2, 8)
        assert coll.num_steps == 2
        assert all(s.pairs == frozenset({(0, 1), (1, 0)}) for s in coll.steps)
        assert coll.volumes() == (4, 4)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(UnsupportedSizeError):
            recursive_halving_doubling(6, 600)

    def test_indivisible_message_rejected(self):
        with pytest.raises(InvalidParameterError):
            recursive_halving_doubling(4, 1023)

    @given(pow2_sizes, multipliers)
    def test_step_count_and_symmetry(self, n, mult):
        coll = recursive_halving_doubling(n, mult * n)
        log2n = n.bit_length() - 1
        assert coll.num_steps == 2 * log2n
        for step in coll.steps:
            assert {(d, s) for s, d in step.pairs} == step.pairs


class TestSwing:
    def test_distance_sequence(self):
        # Node 0's reduce-scatter peers encode the distance sequence 1, -1, 3, -5, 11.
        coll = swing_allreduce(64, 64 * 6)
        rounds = 6
        peers0 = []
        for h in range(rounds):
            step = coll.steps[h]
            peer = next(dst for src, dst in step.pairs if src == 0)
            peers0.append(peer)
        assert peers0 == [1 % 64, -1 % 64, 3 % 64, -5 % 64, 11 % 64, -21 % 64]

    def test_first_step_n4(self):
        coll = swing_allreduce(4, 1024)
        assert coll.steps[0].pairs == frozenset({(0, 1), (1, 0), (2, 3), (3, 2)})

    def test_volumes_match_halving_doubling(self):
        assert swing_allreduce(4, 1024).volumes() == (512, 256, 256, 512)

    @given(pow2_sizes, multipliers)
    def test_volume_multiset_matches_rhd(self, n, mult):
        m = mult * n
        assert sorted(swing_allreduce(n, m).volumes()) == sorted(
            recursive_halving_doubling(n, m).volumes()
        )

    @given(pow2_sizes, multipliers)
    def test_allgather_mirrors_reduce_scatter(self, n, mult):
        coll = swing_allreduce(n, mult * n)
        half = coll.num_steps // 2
        for h in range(half):
            assert coll.steps[h].pairs == coll.steps[coll.num_steps - 1 - h].pairs


class TestRingAllreduce:
    def test_n4(self):
        coll = ring_allreduce(4, 400)
        assert coll.num_steps == 6
        shift1 = frozenset((j, (j + 1) % 4) for j in range(4))
        assert all(s.pairs == shift1 and s.volume == 100 for s in coll.steps)

    def test_n2(self):
        coll = ring_allreduce(2, 2)
        assert coll.num_steps == 2
        assert coll.volumes() == (1, 1)

    @given(st.integers(min_value=2, max_value=24), multipliers)
    def test_total_bytes_per_node(self, n, mult):
        m = mult * n
        coll = ring_allreduce(n, m)
        sent = independent_demand_sum(coll)
        for j in range(n):
            assert sum(sent[j]) == 2 * m * (n - 1) // n


class TestAllToAll:
    def test_n4(self):
        coll = all_to_all(4, 400)
        assert coll.num_steps == 3
        for i, step in enumerate(coll.steps, start=1):
            assert step.pairs == frozenset((j, (j + i) % 4) for j in range(4))
            assert step.volume == 100

    def test_n2(self):
        coll = all_to_all(2, 16)
        assert coll.num_steps == 1
        assert coll.steps[0].volume == 8

    def test_aggregate_fills_off_diagonal(self):
        demand = aggregate_demand(all_to_all(4, 400))
        expected = np.full((4, 4), 100, dtype=np.int64)
        np.fill_diagonal(expected, 0)
        assert (demand == expected).all()


class TestValidateMatching:
    def test_ok(self):
        assert validate_matching(Step(pairs=frozenset({(0, 1), (1, 0)}), volume=4), 2) is None

    def test_double_send(self):
        verdict = validate_matching(Step(pairs=frozenset({(0, 1), (0, 2)}), volume=4), 4)
        assert verdict is not None and "node 0 sends twice" in verdict

    def test_double_receive(self):
        verdict = validate_matching(Step(pairs=frozenset({(0, 2), (1, 2)}), volume=4), 4)
        assert verdict is not None and "receives twice" in verdict

    def test_self_loop(self):
        verdict = validate_matching(Step(pairs=frozenset({(0, 0)}), volume=4), 2)
        assert verdict is not None and "self-loop" in verdict

    def test_zero_volume(self):
        verdict = validate_matching(Step(pairs=frozenset({(0, 1)}), volume=0), 2)
        assert verdict is not None and "volume" in verdict

    def test_out_of_range(self):
        verdict = validate_matching(Step(pairs=frozenset({(0, 5)}), volume=4), 4)
        assert verdict is not None and "out of range" in verdict


class TestAggregateDemand:
    def test_ring_allreduce_totals(self):
        demand = aggregate_demand(ring_allreduce(4, 400))
        for j in range(4):
            assert demand[j, (j + 1) % 4] == 600
        assert demand.sum() == 4 * 600

    def test_two_step_collective(self):
        demand = aggregate_demand(recursive_halving_doubling(2, 8))
        assert demand[0, 1] == 8 and demand[1, 0] == 8

    def test_single_step_is_weighted_permutation(self):
        coll = all_to_all(2, 16)
        demand = aggregate_demand(coll)
        assert demand[0, 1] == 8 and demand[1, 0] == 8 and demand.trace() == 0

    @settings(max_examples=30)
    @given(
        st.sampled_from(GENERATORS),
        pow2_sizes,
        st.integers(min_value=1, max_value=2**16),
    )
    def test_matches_independent_summation(self, generator, n, mult):
        coll = generator(n, mult * n)
        demand = aggregate_demand(coll)
        reference = independent_demand_sum(coll)
        assert demand.tolist() == reference
        assert all(demand[j, j] == 0 for j in range(n))


class TestGeneratorInvariants:
    @settings(max_examples=30)
    @given(st.sampled_from(GENERATORS), pow2_sizes, st.integers(min_value=1, max_value=2**16))
    def test_all_steps_are_valid_matchings(self, generator, n, mult):
        coll = generator(n, mult * n)
        for step in coll.steps:
            assert validate_matching(step, n) is None

    @settings(max_examples=30)
    @given(
        st.sampled_from([recursive_halving_doubling, swing_allreduce, ring_allreduce]),
        pow2_sizes,
        st.integers(min_value=1, max_value=2**16),
    )
    def test_allreduce_bandwidth_optimality(self, generator, n, mult):
        m = mult * n
        sent = independent_demand_sum(generator(n, m))
        for j in range(n):
            assert sum(sent[j]) == 2 * m * (n - 1) // n

    @given(st.sampled_from(GENERATORS), pow2_sizes, st.integers(min_value=1, max_value=2**10))
    def test_deterministic(self, generator, n, mult):
        m = mult * n
        a, b = generator(n, m), generator(n, m)
        assert a.steps == b.steps and a.label == b.label


class TestLoadCollective:
    def test_round_trip(self):
        doc = {"n": 2, "steps": [{"pairs": [[0, 1], [1, 0]], "volume": 4}]}
        coll = load_collective(json.dumps(doc))
        assert coll.n == 2 and coll.num_steps == 1
        assert coll.steps[0].volume == 4
        redoc = collective_to_document(coll)
        assert load_collective(redoc).steps == coll.steps

    def test_zero_volume_names_step(self):
        doc = {"n": 2, "steps": [{"pairs": [[0, 1]], "volume": 0}]}
        with pytest.raises(CollectiveFormatError, match="step 0"):
            load_collective(json.dumps(doc))

    def test_out_of_range_pair(self):
        doc = {"n": 2, "steps": [{"pairs": [[0, 2]], "volume": 4}]}
        with pytest.raises(CollectiveFormatError, match="out of range"):
            load_collective(json.dumps(doc))

    def test_unknown_field_rejected(self):
        doc = {"n": 2, "steps": [{"pairs": [[0, 1]], "volume": 4}], "extra": 1}
        with pytest.raises(CollectiveFormatError, match="unknown"):
            load_collective(json.dumps(doc))

    def test_unknown_step_field_rejected(self):
        doc = {"n": 2, "steps": [{"pairs": [[0, 1]], "volume": 4, "note": "x"}]}
        with pytest.raises(CollectiveFormatError, match="step 0"):
            load_collective(json.dumps(doc))

    def test_malformed_json_has_location(self):
        with pytest.raises(CollectiveFormatError, match="line 1"):
            load_collective("{not json")

    def test_missing_steps(self):
        with pytest.raises(CollectiveFormatError, match="steps"):
            load_collective('{"n": 2}')

    def test_duplicate_pair_rejected(self):
        doc = {"n": 4, "steps": [{"pairs": [[0, 1], [0, 1]], "volume": 4}]}
        with pytest.raises(CollectiveFormatError, match="duplicate"):
            load_collective(json.dumps(doc))

    def test_second_step_violation_named(self):
        doc = {
            "n": 4,
            "steps": [
                {"pairs": [[0, 1]], "volume": 4},
                {"pairs": [[0, 1], [0, 2]], "volume": 4},
            ],
        }
        with pytest.raises(CollectiveFormatError, match="step 1"):
            load_collective(json.dumps(doc))
