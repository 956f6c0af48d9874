"""Single-pass sequential clustering of timestamped pointer samples.

A sample joins the active cluster when its floor-plane distance to the
running centroid is within the threshold; otherwise the active cluster is
recorded and the sample seeds a new one. One pass, O(n), no backtracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Vec3

DEFAULT_D_TH = 0.15  # meters


@dataclass(frozen=True, slots=True)
class PointerSample:
    t: float  # seconds, monotonic session time
    p: Vec3  # floor point, z normally ~0

    def __post_init__(self) -> None:
        if not math.isfinite(self.t):
            raise ValueError(f"non-finite sample timestamp: {self.t}")


@dataclass(frozen=True, slots=True)
class Cluster:
    centroid: Vec3
    size: int
    t_first: float
    t_last: float

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"cluster size must be >= 1, got {self.size}")
        if self.t_first > self.t_last:
            raise ValueError(f"t_first {self.t_first} after t_last {self.t_last}")


@dataclass(frozen=True, slots=True)
class ClusterParams:
    d_th: float = DEFAULT_D_TH

    def __post_init__(self) -> None:
        if not (math.isfinite(self.d_th) and self.d_th > 0):
            raise ValueError(f"d_th must be positive, got {self.d_th}")


def sequential_cluster(points, params: ClusterParams) -> list[Cluster]:
    """Cluster time-ordered samples; raises ValueError on unordered timestamps.

    Centroids are exact running means, (centroid*size + p) / (size + 1),
    and membership uses planar x/y distance so floor-height jitter in z
    cannot split a dwell.
    """
    it = iter(points)
    first = next(it, None)
    if first is None:
        return []

    out: list[Cluster] = []
    d_th = params.d_th
    sqrt = math.sqrt

    prev_t = first.t
    p = first.p
    cx, cy, cz = p.x, p.y, p.z
    size = 1
    t_first = t_last = first.t

    for s in it:
        t = s.t
        if t < prev_t:
            raise ValueError(f"pointer samples out of order: {t} after {prev_t}")
        prev_t = t
        p = s.p
        px = p.x
        py = p.y
        dx = px - cx
        dy = py - cy
        if sqrt(dx * dx + dy * dy) <= d_th:
            n1 = size + 1
            cx = (cx * size + px) / n1
            cy = (cy * size + py) / n1
            cz = (cz * size + p.z) / n1
            size = n1
            t_last = t
        else:
            out.append(Cluster(Vec3(cx, cy, cz), size, t_first, t_last))
            cx, cy, cz = px, py, p.z
            size = 1
            t_first = t_last = t

    out.append(Cluster(Vec3(cx, cy, cz), size, t_first, t_last))
    return out


def top_n_clusters(clusters, n: int) -> list[Cluster]:
    """The n largest clusters; equal sizes break toward the earlier t_first.

    Returns fewer than n when fewer exist: the caller decides whether that
    shortfall is an error.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    ranked = sorted(clusters, key=lambda c: (-c.size, c.t_first))
    return ranked[:n]


def sort_by_time(clusters) -> list[Cluster]:
    """Clusters in ascending t_first order; stable."""
    return sorted(clusters, key=lambda c: c.t_first)
