"""Planar-pose geometry shared by every module.

Positions are metric 3-vectors, rotations are unit quaternions. All
rotations produced by this package are yaw-only (about +z); full
quaternions are kept in the data model and on the wire so stored and
transmitted poses stay self-describing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

UNIT_NORM_TOL = 1e-6
YAW_ONLY_TOL = 1e-6

_TWO_PI = 2.0 * math.pi


class FrameError(ValueError):
    """A pose or rotation was used in a frame it does not belong to."""


class FrameId(Enum):
    WORLD = "world"  # operator/anchor frame
    MAP = "map"  # robot frame


def wrap_angle(a: float) -> float:
    """Wrap an angle in radians to (-pi, pi]."""
    r = (a + math.pi) % _TWO_PI - math.pi
    if r == -math.pi:
        r = math.pi
    return r


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite vector component: ({self.x}, {self.y}, {self.z})")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.z]

    @classmethod
    def from_list(cls, values) -> "Vec3":
        if len(values) != 3:
            raise ValueError(f"expected 3 components, got {len(values)}")
        return cls(float(values[0]), float(values[1]), float(values[2]))


def planar_distance(a: Vec3, b: Vec3) -> float:
    """Euclidean distance in the floor plane; z is ignored."""
    dx = a.x - b.x
    dy = a.y - b.y
    return math.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True, slots=True)
class Quat:
    x: float
    y: float
    z: float
    w: float

    def __post_init__(self) -> None:
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w)
        if not math.isfinite(n) or abs(n - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"quaternion norm {n} not within {UNIT_NORM_TOL} of 1")

    def conjugate(self) -> "Quat":
        return Quat(-self.x, -self.y, -self.z, self.w)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.z, self.w]

    @classmethod
    def from_list(cls, values) -> "Quat":
        if len(values) != 4:
            raise ValueError(f"expected 4 components, got {len(values)}")
        return cls(float(values[0]), float(values[1]), float(values[2]), float(values[3]))

    @classmethod
    def identity(cls) -> "Quat":
        return cls(0.0, 0.0, 0.0, 1.0)


def quat_multiply(a: Quat, b: Quat) -> Quat:
    x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y
    y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x
    z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w
    w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z
    # renormalize so long composition chains cannot drift past the invariant
    n = math.sqrt(x * x + y * y + z * z + w * w)
    return Quat(x / n, y / n, z / n, w / n)


def rotate_vec(q: Quat, v: Vec3) -> Vec3:
    # v' = v + 2*qv x (qv x v + w*v), with qv the vector part
    tx = 2.0 * (q.y * v.z - q.z * v.y)
    ty = 2.0 * (q.z * v.x - q.x * v.z)
    tz = 2.0 * (q.x * v.y - q.y * v.x)
    return Vec3(
        v.x + q.w * tx + (q.y * tz - q.z * ty),
        v.y + q.w * ty + (q.z * tx - q.x * tz),
        v.z + q.w * tz + (q.x * ty - q.y * tx),
    )


def yaw_to_quat(yaw: float) -> Quat:
    """Quaternion for a rotation of `yaw` radians about +z."""
    if not math.isfinite(yaw):
        raise ValueError(f"non-finite yaw: {yaw}")
    half = 0.5 * yaw
    return Quat(0.0, 0.0, math.sin(half), math.cos(half))


def quat_to_yaw(q: Quat) -> float:
    """Recover the yaw of a yaw-only quaternion, in (-pi, pi].

    Raises FrameError for rotations with off-axis components: those never
    come out of this pipeline, so seeing one means a frame mix-up upstream.
    """
    if abs(q.x) > YAW_ONLY_TOL or abs(q.y) > YAW_ONLY_TOL:
        raise FrameError(
            f"rotation is not yaw-only (x={q.x}, y={q.y}); pose likely in the wrong frame"
        )
    return wrap_angle(2.0 * math.atan2(q.z, q.w))


@dataclass(frozen=True, slots=True)
class Pose:
    position: Vec3
    rotation: Quat

    def to_dict(self) -> dict:
        return {"position": self.position.to_list(), "rotation": self.rotation.to_list()}

    @classmethod
    def from_dict(cls, d: dict) -> "Pose":
        return cls(Vec3.from_list(d["position"]), Quat.from_list(d["rotation"]))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(Vec3(0.0, 0.0, 0.0), Quat.identity())


@dataclass(frozen=True, slots=True)
class AnchorTransform:
    """Rigid transform taking map-frame coordinates to world-frame ones.

    Stands in for the physical reference object both frames are registered
    against; configured rather than detected.
    """

    translation: Vec3
    rotation: Quat

    @classmethod
    def identity(cls) -> "AnchorTransform":
        return cls(Vec3(0.0, 0.0, 0.0), Quat.identity())

    @classmethod
    def from_yaw(cls, translation: Vec3, yaw: float) -> "AnchorTransform":
        return cls(translation, yaw_to_quat(yaw))


def transform_pose(p: Pose, src: FrameId, dst: FrameId, anchor: AnchorTransform) -> Pose:
    """Re-express `p` given in frame `src` in frame `dst`."""
    if src == dst:
        return p
    if src == FrameId.MAP and dst == FrameId.WORLD:
        pos = anchor.translation + rotate_vec(anchor.rotation, p.position)
        rot = quat_multiply(anchor.rotation, p.rotation)
        return Pose(pos, rot)
    if src == FrameId.WORLD and dst == FrameId.MAP:
        inv = anchor.rotation.conjugate()
        pos = rotate_vec(inv, p.position - anchor.translation)
        rot = quat_multiply(inv, p.rotation)
        return Pose(pos, rot)
    raise FrameError(f"unsupported frame pair {src} -> {dst}")
