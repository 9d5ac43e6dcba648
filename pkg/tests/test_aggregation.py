import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from migimpact import (
    Partition,
    ValidationError,
    aggregate_system,
    fit_cmi_slope,
    make_system,
    mean_mei,
    random_contiguous_partition,
    scale_ladder,
    scale_profile,
    system_indices,
)
from migimpact.aggregation import ScalePoint, ScaleProfile, default_ladder, identity_partition, sample_seed
from migimpact.data import AdjacencyGraph, ZoneSet, Zone
from migimpact.synthetic import grid_edges, grid_graph, structured_flow_system, uniform_flow_system

from oracles import groups_connected


def path_graph(ids="ABCD"):
    zs = ZoneSet.from_zones(Zone(i, 10, 1) for i in ids)
    return AdjacencyGraph.from_pairs(zs, list(zip(ids, ids[1:])))


class TestPartition:
    def test_target_equals_n_is_identity(self):
        p = random_contiguous_partition(path_graph(), 4, seed=3)
        assert sorted(np.bincount(p.assignment)) == [1, 1, 1, 1]

    def test_target_out_of_range(self):
        for t in (1, 0, 5):
            with pytest.raises(ValidationError, match="target_count"):
                random_contiguous_partition(path_graph(), t, seed=0)

    def test_path_two_groups_contiguous(self):
        seen = set()
        for seed in range(200):
            a = random_contiguous_partition(path_graph(), 2, seed).assignment
            groups = frozenset(frozenset("ABCD"[i] for i in range(4) if a[i] == g) for g in range(2))
            seen.add(groups)
        allowed = {
            frozenset({frozenset("A"), frozenset("BCD")}),
            frozenset({frozenset("AB"), frozenset("CD")}),
            frozenset({frozenset("ABC"), frozenset("D")}),
        }
        assert seen == allowed

    def test_grid_partitions_pass_bfs_oracle(self):
        s = structured_flow_system(4, 4, seed=0)
        g = grid_graph(s, 4, 4)
        edges = grid_edges(4, 4)
        for seed in range(1000):
            p = random_contiguous_partition(g, 4, seed)
            assert groups_connected(p.assignment, edges, 16)
            assert np.bincount(p.assignment, minlength=4).min() >= 1

    def test_deterministic(self):
        g = grid_graph(structured_flow_system(5, 5, seed=0), 5, 5)
        a = random_contiguous_partition(g, 6, 12345)
        b = random_contiguous_partition(g, 6, 12345)
        assert a == b
        assert a != random_contiguous_partition(g, 6, 12346)

    def test_rejects_empty_group(self):
        with pytest.raises(ValidationError):
            Partition([0, 0, 2], 3)


def three_zone():
    m = np.zeros((3, 3))
    m[0, 1], m[0, 2], m[2, 1], m[1, 0] = 5, 3, 2, 1
    return make_system("ABC", [100, 200, 300], [1, 2, 3], m)


def test_aggregate_hand_merge():
    s = three_zone()
    agg = aggregate_system(s, Partition([0, 0, 1], 2))
    np.testing.assert_array_equal(agg.flows.matrix, [[0, 3], [2, 0]])
    assert s.migrants == 11 and agg.migrants == 5
    np.testing.assert_array_equal(agg.zones.populations, [300, 300])
    np.testing.assert_array_equal(agg.zones.areas, [3, 3])


def test_aggregate_identity_unchanged():
    s = three_zone()
    agg = aggregate_system(s, identity_partition(3))
    np.testing.assert_array_equal(agg.flows.matrix, s.flows.matrix)
    assert system_indices(agg) == system_indices(s)


def test_coarsest_legal_aggregation_drops_migrants():
    s = three_zone()
    for a in ([0, 0, 1], [0, 1, 1], [0, 1, 0]):
        assert aggregate_system(s, Partition(a, 2)).migrants <= s.migrants


def test_marginals_cannot_be_aggregated():
    s = make_system("AB", [1, 1], [1, 1], ([1.0, 0.0], [0.0, 1.0]))
    with pytest.raises(ValidationError, match="matrix"):
        aggregate_system(s, identity_partition(2))


@given(st.integers(0, 2**32 - 1), st.integers(2, 24))
@settings(max_examples=60, deadline=None)
def test_conservation_and_monotonicity(seed, k):
    s = uniform_flow_system(5, 5, seed, integer=True)
    g = grid_graph(s, 5, 5)
    p = random_contiguous_partition(g, k, seed)
    agg = aggregate_system(s, p)
    assert agg.population == s.population
    assert agg.zones.areas.sum() == s.zones.areas.sum()
    np.testing.assert_array_equal(agg.net, np.bincount(p.assignment, weights=s.net, minlength=k))
    assert agg.migrants < s.migrants


def test_nested_refinements_cmi_non_decreasing():
    s = uniform_flow_system(4, 4, 7, integer=True)
    # each partition refines the next one
    chain = [
        list(range(16)),
        [0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7],
        [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3],
        [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1],
    ]
    cmis = [system_indices(aggregate_system(s, Partition(a, max(a) + 1))).cmi for a in chain]
    assert all(x >= y for x, y in zip(cmis, cmis[1:]))


class TestLadder:
    def test_geometric(self):
        assert scale_ladder(400, 20, 5) == [20, 42, 89, 189, 400]
        # independent reference: round-half-up of the geometric sequence
        ref = [math.floor(20 * 20 ** (k / 4) + 0.5) for k in range(5)]
        assert scale_ladder(400, 20, 5) == ref

    def test_endpoints_only(self):
        assert scale_ladder(30, 20, 2) == [20, 30]

    def test_dedup(self):
        assert scale_ladder(5, 4, 6) == [4, 5]

    @pytest.mark.parametrize("base, lo, steps", [(20, 20, 3), (10, 1, 3), (40, 20, 1)])
    def test_invalid(self, base, lo, steps):
        with pytest.raises(ValidationError):
            scale_ladder(base, lo, steps)

    def test_default(self):
        lad = default_ladder(400)
        assert lad[0] == 20 and lad[-1] == 400 and len(lad) == 8
        assert default_ladder(1000)[0] == 50
        assert default_ladder(36)[0] == 20
        assert default_ladder(10) == scale_ladder(10, 9, 8)


def test_sample_seeds_are_distinct():
    states = {tuple(sample_seed(7, i, j).generate_state(2)) for i in range(5) for j in range(30)}
    assert len(states) == 150


class TestProfile:
    def setup_method(self):
        self.s = structured_flow_system(6, 6, seed=2)
        self.g = grid_graph(self.s, 6, 6)

    def test_identity_scale(self):
        prof = scale_profile(self.s, self.g, [36], 1, 0)
        assert prof.points[0].mean_cmi == system_indices(self.s).cmi

    def test_per_sample_identity(self):
        prof = scale_profile(self.s, self.g, [4, 9, 20], 10, 5)
        for p in prof.points:
            prods = [c * m / 100 for c, m in zip(p.cmi_samples, p.mei_samples)]
            for a, b in zip(p.anmr_samples, prods):
                assert abs(a - b) <= 1e-12 * max(a, 1e-30)
            assert p.mean_anmr == pytest.approx(np.mean(prods), rel=1e-12)

    def test_two_zone_grid(self):
        s = uniform_flow_system(1, 2, 0)
        prof = scale_profile(s, grid_graph(s, 1, 2), [2], 3, 0)
        p = prof.points[0]
        assert p.mean_anmr == pytest.approx(p.mean_cmi * p.mean_mei / 100, rel=1e-12)

    def test_deterministic_and_parallel(self):
        a = scale_profile(self.s, self.g, [5, 10, 20], 8, 99)
        b = scale_profile(self.s, self.g, [5, 10, 20], 8, 99, workers=4)
        assert a == b
        assert a.to_csv() == b.to_csv()
        assert a != scale_profile(self.s, self.g, [5, 10, 20], 8, 100)

    def test_bad_inputs(self):
        with pytest.raises(ValidationError):
            scale_profile(self.s, self.g, [5, 5], 3, 0)
        with pytest.raises(ValidationError):
            scale_profile(self.s, self.g, [5, 40], 3, 0)
        with pytest.raises(ValidationError):
            scale_profile(self.s, self.g, [5], 0, 0)

    def test_csv_header(self):
        text = scale_profile(self.s, self.g, [5, 36], 2, 0).to_csv()
        assert text.splitlines()[0] == "n_units,samples,mean_cmi,sd_cmi,mean_mei,sd_mei,mean_anmr"


def profile_of(pairs, meis=None):
    meis = meis or [0.0] * len(pairs)
    return ScaleProfile(tuple(ScalePoint(n, 1, c, m, 0.0, 0.0, 0.0) for (n, c), m in zip(pairs, meis)), 100, 0)


class TestCmiFit:
    def test_two_points(self):
        f = fit_cmi_slope(profile_of([(4, 2.0), (16, 4.0)]))
        assert f.slope == pytest.approx(2 / math.log10(4), rel=1e-12)
        assert f.slope == pytest.approx(3.3219280948873626, rel=1e-12)
        assert f.intercept == pytest.approx(0.0, abs=1e-12)
        assert f.r_squared == pytest.approx(1.0)

    def test_constant(self):
        f = fit_cmi_slope(profile_of([(4, 3.0), (16, 3.0), (64, 3.0)]))
        assert f.slope == 0.0
        assert 0.0 <= f.r_squared <= 1.0

    def test_duplicated_points(self):
        pts = [(4, 2.0), (9, 3.5), (30, 3.9)]
        a = fit_cmi_slope(profile_of(pts))
        b = fit_cmi_slope(profile_of(pts + pts))
        assert b.slope == pytest.approx(a.slope, rel=1e-12)
        assert b.intercept == pytest.approx(a.intercept, rel=1e-12)

    def test_too_few(self):
        with pytest.raises(ValidationError):
            fit_cmi_slope(profile_of([(4, 2.0)]))


class TestMeanMei:
    def test_mean(self):
        prof = profile_of([(10, 0), (20, 0), (50, 0), (100, 0)], [99.0, 40.0, 42.0, 44.0])
        assert mean_mei(prof, 20) == 42.0

    def test_single(self):
        assert mean_mei(profile_of([(10, 0), (25, 0)], [1.0, 37.5])) == 37.5

    def test_none_qualify(self):
        with pytest.raises(ValidationError):
            mean_mei(profile_of([(10, 0), (15, 0)], [1.0, 2.0]), 20)


def test_mei_stable_per_scale():
    # same system and master seed as the acceptance profile; at n=20 the ratio
    # is about 0.08 in the median over master seeds
    s = structured_flow_system(20, 20, seed=0)
    prof = scale_profile(s, grid_graph(s, 20, 20), scale_ladder(400, 20, 8), 30, 0)
    for p in prof.points:
        assert p.sd_mei / p.mean_mei < 0.10
