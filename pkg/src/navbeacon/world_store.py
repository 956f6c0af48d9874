"""Persistent label and beacon databases, plus pointer hit-testing.

Labels name fixed landmark coordinates; beacons are goal markers. Both
live in the world (anchor-relative) frame only and persist as JSON Lines,
one entity per line under a schema-version header.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass

from .geometry import Pose, Quat, Vec3, planar_distance, quat_to_yaw

SCHEMA_VERSION = 1
LABELS_FILE = "labels.jsonl"
BEACONS_FILE = "beacons.jsonl"
DEFAULT_R_HIT = 0.15  # meters


class StoreError(Exception):
    pass


class NotFoundError(StoreError):
    pass


class DuplicateNameError(StoreError):
    pass


class SchemaError(StoreError):
    """Malformed persistence file; message carries file and line number."""


class MigrationError(StoreError):
    """Persisted schema_version differs from what this code writes."""


def canonical_name(name: str) -> str:
    """Lowercased, whitespace-collapsed label name used for all matching."""
    return " ".join(name.lower().split())


@dataclass(frozen=True, slots=True)
class MRLabel:
    id: str
    name: str
    location: Vec3


@dataclass(frozen=True, slots=True)
class MRBeacon:
    id: str
    location: Vec3
    rotation: Quat

    @property
    def pose(self) -> Pose:
        return Pose(self.location, self.rotation)


@dataclass(frozen=True)
class StoreSnapshot:
    labels: tuple[MRLabel, ...]
    beacons: tuple[MRBeacon, ...]
    schema_version: int
    revision: int


class WorldStore:
    """Single-writer store of labels and beacons.

    Mutations are serialized by an internal lock and bump a revision
    counter; readers get immutable snapshots. `id_factory` exists so
    replay can mint reproducible ids.
    """

    def __init__(self, id_factory=None):
        self._ids = id_factory if id_factory is not None else (lambda: str(uuid.uuid4()))
        self._labels: dict[str, MRLabel] = {}
        self._beacons: dict[str, MRBeacon] = {}
        self._name_index: dict[str, str] = {}  # canonical name -> label id
        self._revision = 0
        self._lock = threading.RLock()

    @property
    def revision(self) -> int:
        return self._revision

    # -- labels ---------------------------------------------------------

    def upsert_label(self, name: str, location: Vec3, overwrite: bool = False) -> MRLabel:
        canon = canonical_name(name)
        if not canon:
            raise ValueError("label name must be non-empty")
        with self._lock:
            existing_id = self._name_index.get(canon)
            if existing_id is not None:
                existing = self._labels[existing_id]
                if existing.location == location:
                    return existing
                if not overwrite:
                    raise DuplicateNameError(
                        f"label {name!r} already exists at a different location"
                    )
                updated = MRLabel(existing.id, existing.name, location)
                self._labels[existing.id] = updated
                self._revision += 1
                return updated
            label = MRLabel(self._ids(), name, location)
            self._labels[label.id] = label
            self._name_index[canon] = label.id
            self._revision += 1
            return label

    def rename_label(self, label_id: str, new_name: str) -> MRLabel:
        canon = canonical_name(new_name)
        if not canon:
            raise ValueError("label name must be non-empty")
        with self._lock:
            label = self._labels.get(label_id)
            if label is None:
                raise NotFoundError(f"no label with id {label_id}")
            taken = self._name_index.get(canon)
            if taken is not None and taken != label_id:
                raise DuplicateNameError(f"label name {new_name!r} already in use")
            del self._name_index[canonical_name(label.name)]
            renamed = MRLabel(label.id, new_name, label.location)
            self._labels[label.id] = renamed
            self._name_index[canon] = label.id
            self._revision += 1
            return renamed

    def lookup_label(self, name: str) -> MRLabel:
        label_id = self._name_index.get(canonical_name(name))
        if label_id is None:
            raise NotFoundError(f"no label named {name!r}")
        return self._labels[label_id]

    def label_names(self) -> list[str]:
        return [label.name for label in self._labels.values()]

    # -- beacons --------------------------------------------------------

    def add_beacon(self, pose: Pose) -> MRBeacon:
        quat_to_yaw(pose.rotation)  # beacons are yaw-only by contract
        with self._lock:
            beacon = MRBeacon(self._ids(), pose.position, pose.rotation)
            self._beacons[beacon.id] = beacon
            self._revision += 1
            return beacon

    def get_beacon(self, beacon_id: str) -> MRBeacon:
        beacon = self._beacons.get(beacon_id)
        if beacon is None:
            raise NotFoundError(f"no beacon with id {beacon_id}")
        return beacon

    def update_beacon(self, beacon_id: str, pose: Pose) -> MRBeacon:
        quat_to_yaw(pose.rotation)
        with self._lock:
            if beacon_id not in self._beacons:
                raise NotFoundError(f"no beacon with id {beacon_id}")
            updated = MRBeacon(beacon_id, pose.position, pose.rotation)
            self._beacons[beacon_id] = updated
            self._revision += 1
            return updated

    def remove_beacon(self, beacon_id: str) -> MRBeacon:
        with self._lock:
            beacon = self._beacons.pop(beacon_id, None)
            if beacon is None:
                raise NotFoundError(f"no beacon with id {beacon_id}")
            self._revision += 1
            return beacon

    def hit_test(self, point: Vec3, r_hit: float = DEFAULT_R_HIT) -> MRBeacon | None:
        """Nearest beacon within r_hit of `point` in the floor plane."""
        if r_hit <= 0:
            raise ValueError(f"r_hit must be positive, got {r_hit}")
        best: MRBeacon | None = None
        best_d = float("inf")
        for beacon in self._beacons.values():
            d = planar_distance(point, beacon.location)
            if d <= r_hit and d < best_d:
                best = beacon
                best_d = d
        return best

    # -- snapshots and persistence ---------------------------------------

    def snapshot(self) -> StoreSnapshot:
        with self._lock:
            return StoreSnapshot(
                labels=tuple(self._labels.values()),
                beacons=tuple(self._beacons.values()),
                schema_version=SCHEMA_VERSION,
                revision=self._revision,
            )

    def save(self, dir_path: str) -> None:
        """Write labels.jsonl and beacons.jsonl atomically under dir_path."""
        snap = self.snapshot()
        os.makedirs(dir_path, exist_ok=True)
        label_lines = [{"schema_version": SCHEMA_VERSION, "count": len(snap.labels)}]
        label_lines += [
            {"id": l.id, "name": l.name, "location": l.location.to_list()} for l in snap.labels
        ]
        beacon_lines = [{"schema_version": SCHEMA_VERSION, "count": len(snap.beacons)}]
        beacon_lines += [
            {"id": b.id, "location": b.location.to_list(), "rotation": b.rotation.to_list()}
            for b in snap.beacons
        ]
        _write_jsonl_atomic(os.path.join(dir_path, LABELS_FILE), label_lines)
        _write_jsonl_atomic(os.path.join(dir_path, BEACONS_FILE), beacon_lines)

    def load(self, dir_path: str) -> StoreSnapshot:
        """Replace store contents from dir_path; on any error the store is untouched."""
        labels_path = os.path.join(dir_path, LABELS_FILE)
        beacons_path = os.path.join(dir_path, BEACONS_FILE)
        label_records = _read_jsonl(labels_path)
        beacon_records = _read_jsonl(beacons_path)

        labels: dict[str, MRLabel] = {}
        name_index: dict[str, str] = {}
        for lineno, rec in label_records:
            try:
                label = MRLabel(_req_str(rec, "id"), _req_str(rec, "name"),
                                Vec3.from_list(rec["location"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{labels_path}:{lineno}: bad label record: {exc}") from exc
            if label.id in labels:
                raise SchemaError(f"{labels_path}:{lineno}: duplicate label id {label.id}")
            canon = canonical_name(label.name)
            if canon in name_index:
                raise SchemaError(f"{labels_path}:{lineno}: duplicate label name {label.name!r}")
            labels[label.id] = label
            name_index[canon] = label.id

        beacons: dict[str, MRBeacon] = {}
        for lineno, rec in beacon_records:
            try:
                beacon = MRBeacon(_req_str(rec, "id"), Vec3.from_list(rec["location"]),
                                  Quat.from_list(rec["rotation"]))
                quat_to_yaw(beacon.rotation)
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{beacons_path}:{lineno}: bad beacon record: {exc}") from exc
            if beacon.id in beacons or beacon.id in labels:
                raise SchemaError(f"{beacons_path}:{lineno}: duplicate id {beacon.id}")
            beacons[beacon.id] = beacon

        with self._lock:
            self._labels = labels
            self._beacons = beacons
            self._name_index = name_index
            self._revision += 1
            return self.snapshot()


def _req_str(rec: dict, key: str) -> str:
    value = rec[key]
    if not isinstance(value, str) or not value:
        raise ValueError(f"field {key!r} must be a non-empty string")
    return value


def _write_jsonl_atomic(path: str, records) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
            f.write("\n")
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def _read_jsonl(path: str) -> list[tuple[int, dict]]:
    """Parse a header-checked JSONL file into (lineno, record) pairs."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw_lines = f.read().splitlines()
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read: {exc}") from exc
    if not raw_lines:
        raise SchemaError(f"{path}:1: missing header line")

    def parse(lineno: int, line: str) -> dict:
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(rec, dict):
            raise SchemaError(f"{path}:{lineno}: expected a JSON object")
        return rec

    header = parse(1, raw_lines[0])
    version = header.get("schema_version")
    if not isinstance(version, int):
        raise SchemaError(f"{path}:1: header missing integer schema_version")
    if version != SCHEMA_VERSION:
        raise MigrationError(
            f"{path}: schema_version {version} not supported (expected {SCHEMA_VERSION})"
        )
    count = header.get("count")
    if not isinstance(count, int) or count < 0:
        raise SchemaError(f"{path}:1: header missing non-negative integer count")

    records = [(i + 2, parse(i + 2, line)) for i, line in enumerate(raw_lines[1:])]
    if len(records) != count:
        raise SchemaError(
            f"{path}: header count {count} does not match {len(records)} records (truncated?)"
        )
    return records
