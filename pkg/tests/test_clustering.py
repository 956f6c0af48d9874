import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navbeacon.clustering import (
    Cluster,
    ClusterParams,
    PointerSample,
    sequential_cluster,
    sort_by_time,
    top_n_clusters,
)
from navbeacon.geometry import Vec3


def reference_cluster(points, d_th):
    """Straight transcription of the single-pass algorithm, kept dumb on
    purpose: this is the oracle the optimized implementation must match."""
    clusters = []
    cur = None
    for s in points:
        if cur is None:
            cur = [s.p.x, s.p.y, s.p.z, 1, s.t, s.t]  # cx, cy, cz, size, t_first, t_last
            continue
        dx = s.p.x - cur[0]
        dy = s.p.y - cur[1]
        if math.sqrt(dx * dx + dy * dy) <= d_th:
            n = cur[3] + 1
            cur[0] = (cur[0] * cur[3] + s.p.x) / n
            cur[1] = (cur[1] * cur[3] + s.p.y) / n
            cur[2] = (cur[2] * cur[3] + s.p.z) / n
            cur[3] = n
            cur[5] = s.t
        else:
            clusters.append(tuple(cur))
            cur = [s.p.x, s.p.y, s.p.z, 1, s.t, s.t]
    if cur is not None:
        clusters.append(tuple(cur))
    return clusters


def as_tuples(clusters):
    return [(c.centroid.x, c.centroid.y, c.centroid.z, c.size, c.t_first, c.t_last)
            for c in clusters]


def random_stream(rng, n, spread=1.0):
    """Random-walk pointer stream with occasional jumps, timestamped 0.1 apart."""
    x, y = rng.uniform(-2, 2), rng.uniform(-2, 2)
    samples = []
    for i in range(n):
        if rng.random() < 0.05:
            x += rng.uniform(-3, 3)
            y += rng.uniform(-3, 3)
        else:
            x += rng.uniform(-spread, spread) * 0.1
            y += rng.uniform(-spread, spread) * 0.1
        samples.append(PointerSample(i * 0.1, Vec3(x, y, rng.uniform(-0.01, 0.01))))
    return samples


class TestSequentialCluster:
    def test_empty_input(self):
        assert sequential_cluster([], ClusterParams()) == []

    def test_singleton(self):
        out = sequential_cluster(
            [PointerSample(1.0, Vec3(0.3, 0.4, 0.0))], ClusterParams()
        )
        assert out == [Cluster(Vec3(0.3, 0.4, 0.0), 1, 1.0, 1.0)]

    def test_hand_trace(self):
        # second point is 0.1 <= 0.15 from centroid (0,0); third is 0.45 > 0.15
        # from the updated centroid (0.05, 0)
        samples = [
            PointerSample(0.0, Vec3(0.0, 0.0, 0.0)),
            PointerSample(0.1, Vec3(0.1, 0.0, 0.0)),
            PointerSample(0.2, Vec3(0.5, 0.0, 0.0)),
        ]
        out = sequential_cluster(samples, ClusterParams(d_th=0.15))
        assert len(out) == 2
        assert out[0].centroid == Vec3(0.05, 0.0, 0.0)
        assert out[0].size == 2
        assert out[0].t_first == 0.0
        assert out[1].centroid == Vec3(0.5, 0.0, 0.0)
        assert out[1].size == 1
        assert out[1].t_first == 0.2

    def test_boundary_distance_joins(self):
        samples = [
            PointerSample(0.0, Vec3(0.0, 0.0, 0.0)),
            PointerSample(0.1, Vec3(0.15, 0.0, 0.0)),
        ]
        out = sequential_cluster(samples, ClusterParams(d_th=0.15))
        assert len(out) == 1 and out[0].size == 2

    def test_unordered_timestamps_rejected(self):
        samples = [
            PointerSample(1.0, Vec3(0, 0, 0)),
            PointerSample(0.5, Vec3(0, 0, 0)),
        ]
        with pytest.raises(ValueError):
            sequential_cluster(samples, ClusterParams())

    def test_equal_timestamps_allowed(self):
        samples = [PointerSample(1.0, Vec3(0, 0, 0)), PointerSample(1.0, Vec3(0.01, 0, 0))]
        out = sequential_cluster(samples, ClusterParams())
        assert out[0].size == 2

    def test_z_jitter_does_not_split(self):
        samples = [PointerSample(i * 0.1, Vec3(0.0, 0.0, z)) for i, z in enumerate([0, 5.0, -5.0])]
        out = sequential_cluster(samples, ClusterParams(d_th=0.05))
        assert len(out) == 1 and out[0].size == 3

    def test_matches_reference_on_random_streams(self):
        rng = random.Random(42)
        for _ in range(50):
            samples = random_stream(rng, rng.randrange(0, 400))
            d_th = rng.uniform(0.05, 0.5)
            got = as_tuples(sequential_cluster(samples, ClusterParams(d_th=d_th)))
            assert got == reference_cluster(samples, d_th)

    def test_sum_of_sizes_equals_input(self):
        rng = random.Random(7)
        samples = random_stream(rng, 500)
        out = sequential_cluster(samples, ClusterParams(d_th=0.2))
        assert sum(c.size for c in out) == 500

    def test_members_within_threshold_at_insertion(self):
        # replay every insertion and check the membership rule held
        rng = random.Random(3)
        samples = random_stream(rng, 300)
        d_th = 0.2
        out = sequential_cluster(samples, ClusterParams(d_th=d_th))
        idx = 0
        for cluster in out:
            cx, cy = None, None
            size = 0
            for _ in range(cluster.size):
                s = samples[idx]
                idx += 1
                if size == 0:
                    cx, cy, size = s.p.x, s.p.y, 1
                    continue
                dist = math.sqrt((s.p.x - cx) ** 2 + (s.p.y - cy) ** 2)
                assert dist <= d_th
                cx = (cx * size + s.p.x) / (size + 1)
                cy = (cy * size + s.p.y) / (size + 1)
                size += 1
        assert idx == len(samples)

    @given(st.lists(st.tuples(
        st.floats(min_value=-5, max_value=5, allow_nan=False),
        st.floats(min_value=-5, max_value=5, allow_nan=False),
    ), max_size=60), st.floats(min_value=0.05, max_value=0.5))
    @settings(max_examples=60)
    def test_reference_equivalence_property(self, coords, d_th):
        samples = [PointerSample(i * 0.1, Vec3(x, y, 0.0)) for i, (x, y) in enumerate(coords)]
        got = as_tuples(sequential_cluster(samples, ClusterParams(d_th=d_th)))
        assert got == reference_cluster(samples, d_th)


class TestTopN:
    def make(self, sizes_times):
        return [Cluster(Vec3(float(i), 0, 0), size, t, t) for i, (size, t) in enumerate(sizes_times)]

    def test_largest_two(self):
        clusters = self.make([(5, 0.0), (3, 1.0), (4, 2.0)])
        out = top_n_clusters(clusters, 2)
        assert [c.size for c in out] == [5, 4]

    def test_zero_n(self):
        assert top_n_clusters(self.make([(2, 0.0), (2, 1.0)]), 0) == []

    def test_tie_breaks_to_earlier_first_contact(self):
        clusters = self.make([(2, 1.0), (2, 0.5)])
        out = top_n_clusters(clusters, 1)
        assert out[0].t_first == 0.5

    def test_shortfall_returns_all(self):
        clusters = self.make([(1, 0.0)])
        assert len(top_n_clusters(clusters, 5)) == 1

    def test_negative_n_rejected(self):
        with pytest.raises(ValueError):
            top_n_clusters([], -1)

    def test_matches_brute_force(self):
        rng = random.Random(11)
        for _ in range(100):
            clusters = self.make([(rng.randrange(1, 6), rng.random() * 10) for _ in range(8)])
            n = rng.randrange(0, 10)
            expected = sorted(clusters, key=lambda c: (-c.size, c.t_first))[:n]
            assert top_n_clusters(clusters, n) == expected


class TestSortByTime:
    def test_empty(self):
        assert sort_by_time([]) == []

    def test_orders_ascending(self):
        clusters = [Cluster(Vec3(0, 0, 0), 1, t, t) for t in (2.0, 0.5, 1.0)]
        assert [c.t_first for c in sort_by_time(clusters)] == [0.5, 1.0, 2.0]

    def test_sorted_input_unchanged(self):
        clusters = [Cluster(Vec3(0, 0, 0), 1, t, t) for t in (0.1, 0.2, 0.3)]
        assert sort_by_time(clusters) == clusters
