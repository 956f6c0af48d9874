"""Mode dispatch and pose fusion.

One capture window (an utterance plus the pointer samples recorded while
it was open) resolves to exactly one outcome. Inference modes (Add,
Edit-placing) pair voice labels with pointer clusters to synthesize beacon
poses; non-inference modes (Edit-selecting, Go, Delete) use only a command
keyword and a hit test at the final pointer position, and never touch the
language-model backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .clustering import (
    ClusterParams,
    PointerSample,
    sequential_cluster,
    sort_by_time,
    top_n_clusters,
)
from .geometry import Pose, yaw_to_quat
from .intent import (
    BackendConfig,
    IntentError,
    Keyword,
    Utterance,
    detect_keyword,
    interpret,
    transcribe,
)
from .world_store import DEFAULT_R_HIT, MRBeacon, NotFoundError, WorldStore

SAMPLE_PERIOD = 0.1  # seconds between pointer samples while a window is open
SAMPLE_JITTER = 0.02

REASON_NO_POINTER = "no-pointer-data"
REASON_NO_LABELS = "no-labels"
REASON_CLUSTER_SHORTFALL = "cluster-shortfall"
REASON_NO_BEACON_HIT = "no-beacon-hit"
REASON_LABEL_NOT_FOUND = "label-not-found"
REASON_NO_KEYWORD = "no-keyword"


class Mode(Enum):
    OFF = "off"
    ADD = "add"
    EDIT_SELECTING = "edit_selecting"
    EDIT_PLACING = "edit_placing"
    GO = "go"
    DELETE = "delete"


INFERENCE_MODES = frozenset({Mode.ADD, Mode.EDIT_PLACING})

# keyword each non-inference mode expects
_MODE_KEYWORDS = {
    Mode.EDIT_SELECTING: Keyword.TAKE,
    Mode.GO: Keyword.GO,
    Mode.DELETE: Keyword.DELETE,
}


class ClusterShortfallError(Exception):
    """Fewer clusters than labels: the pose calculation cannot pair them."""


@dataclass(frozen=True)
class CaptureWindow:
    utterance: Utterance
    pointer: tuple[PointerSample, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pointer", tuple(self.pointer))
        t0, t1 = self.utterance.t_start, self.utterance.t_end
        prev = None
        for s in self.pointer:
            if not (t0 - 1e-9 <= s.t <= t1 + 1e-9):
                raise ValueError(f"pointer sample at t={s.t} outside utterance [{t0}, {t1}]")
            if prev is not None:
                # gaps at clean multiples of the period are fine: the console
                # withholds out-of-bounds samples but its clock keeps ticking
                dt = s.t - prev
                k = max(1, round(dt / SAMPLE_PERIOD))
                if abs(dt - k * SAMPLE_PERIOD) > SAMPLE_JITTER + 1e-9:
                    raise ValueError(f"pointer sample gap {dt:.4f}s is not a multiple "
                                     f"of {SAMPLE_PERIOD}s within ±{SAMPLE_JITTER}s")
            prev = s.t


class OutcomeKind(Enum):
    BEACONS_CREATED = "beacons_created"
    BEACON_MOVED = "beacon_moved"
    BEACON_TAKEN = "beacon_taken"
    NAV_DISPATCHED = "nav_dispatched"
    BEACON_DELETED = "beacon_deleted"
    REJECTED = "rejected"


@dataclass(frozen=True)
class FusionOutcome:
    kind: OutcomeKind
    beacons: tuple[MRBeacon, ...] = ()
    beacon_id: str | None = None
    goal: Pose | None = None
    reason: str | None = None

    @classmethod
    def created(cls, beacons) -> "FusionOutcome":
        return cls(OutcomeKind.BEACONS_CREATED, beacons=tuple(beacons))

    @classmethod
    def moved(cls, beacon: MRBeacon) -> "FusionOutcome":
        return cls(OutcomeKind.BEACON_MOVED, beacons=(beacon,), beacon_id=beacon.id)

    @classmethod
    def taken(cls, beacon_id: str) -> "FusionOutcome":
        return cls(OutcomeKind.BEACON_TAKEN, beacon_id=beacon_id)

    @classmethod
    def dispatched(cls, goal: Pose, beacon_id: str) -> "FusionOutcome":
        return cls(OutcomeKind.NAV_DISPATCHED, goal=goal, beacon_id=beacon_id)

    @classmethod
    def deleted(cls, beacon_id: str) -> "FusionOutcome":
        return cls(OutcomeKind.BEACON_DELETED, beacon_id=beacon_id)

    @classmethod
    def rejected(cls, reason: str) -> "FusionOutcome":
        return cls(OutcomeKind.REJECTED, reason=reason)


def calculate_poses(label_names, clusters, store: WorldStore) -> list[Pose]:
    """Pair the N largest clusters, in chronological order, with N labels.

    The i-th beacon sits on the i-th (by first-contact time) of the top-N
    clusters and faces the i-th named label: yaw is the atan2 of the
    displacement from the centroid to the label's coordinates.
    """
    names = list(label_names)
    n = len(names)
    top = top_n_clusters(clusters, n)
    if len(top) < n:
        raise ClusterShortfallError(f"{n} labels but only {len(top)} clusters")
    ordered = sort_by_time(top)

    poses = []
    for name, cluster in zip(names, ordered):
        label = store.lookup_label(name)  # NotFoundError propagates to the caller
        yaw = math.atan2(
            label.location.y - cluster.centroid.y,
            label.location.x - cluster.centroid.x,
        )
        poses.append(Pose(cluster.centroid, yaw_to_quat(yaw)))
    return poses


@dataclass
class FusionParams:
    d_th: float = ClusterParams().d_th
    r_hit: float = DEFAULT_R_HIT


class FusionEngine:
    """One engine per operator session; drive it from a single context.

    `on_goal(goal_pose, beacon_id)` is invoked for Go dispatches so the
    service can forward the goal to the robot bridge. `on_timing(stage,
    seconds)` receives voice/intent/clustering stage latencies when a
    measuring clock is supplied.
    """

    def __init__(
        self,
        store: WorldStore,
        backend: BackendConfig,
        params: FusionParams | None = None,
        on_goal: Callable[[Pose, str], None] | None = None,
        on_timing: Callable[[str, float], None] | None = None,
        timer: Callable[[], float] | None = None,
    ):
        self.store = store
        self.backend = backend
        self.params = params or FusionParams()
        self._on_goal = on_goal
        self._on_timing = on_timing
        self._timer = timer
        self._mode = Mode.OFF
        self._taken_id: str | None = None

    @property
    def mode(self) -> Mode:
        return self._mode

    @property
    def taken_beacon_id(self) -> str | None:
        return self._taken_id

    def set_mode(self, mode: Mode) -> Mode:
        if mode == Mode.EDIT_PLACING:
            raise ValueError("edit_placing is only reachable by taking a beacon")
        self._mode = mode
        self._taken_id = None
        return self._mode

    def analyze(self, window: CaptureWindow) -> FusionOutcome:
        if self._mode == Mode.OFF:
            raise ValueError("cannot analyze a capture while mode is off")
        if self._mode in INFERENCE_MODES:
            return self._analyze_inference(window)
        if self._mode == Mode.EDIT_SELECTING:
            return self.take_beacon(window)
        return self._analyze_pointer_command(window)

    # -- inference branch -------------------------------------------------

    def _analyze_inference(self, window: CaptureWindow) -> FusionOutcome:
        known = self.store.label_names()

        t0 = self._tick()
        result = interpret(window.utterance, known, self.backend)
        self._record("intent", t0)

        t0 = self._tick()
        clusters = sequential_cluster(window.pointer, ClusterParams(self.params.d_th))
        self._record("clustering", t0)

        if not window.pointer:
            return FusionOutcome.rejected(REASON_NO_POINTER)
        if not result.labels:
            return FusionOutcome.rejected(REASON_NO_LABELS)
        try:
            poses = calculate_poses(result.labels, clusters, self.store)
        except ClusterShortfallError:
            return FusionOutcome.rejected(REASON_CLUSTER_SHORTFALL)
        except NotFoundError:
            return FusionOutcome.rejected(REASON_LABEL_NOT_FOUND)

        if self._mode == Mode.ADD:
            beacons = [self.store.add_beacon(p) for p in poses]
            return FusionOutcome.created(beacons)

        # edit_placing: move the taken beacon to the first synthesized pose
        assert self._taken_id is not None, "edit_placing without a taken beacon"
        moved = self.store.update_beacon(self._taken_id, poses[0])
        self._taken_id = None
        self._mode = Mode.EDIT_SELECTING
        return FusionOutcome.moved(moved)

    # -- non-inference branch ----------------------------------------------

    def take_beacon(self, window: CaptureWindow) -> FusionOutcome:
        if self._mode != Mode.EDIT_SELECTING:
            raise ValueError(f"take requires edit_selecting mode, not {self._mode.value}")
        outcome = self._pointer_command(window, Keyword.TAKE)
        if outcome is not None:
            return outcome
        hit = self.store.hit_test(window.pointer[-1].p, self.params.r_hit)
        if hit is None:
            return FusionOutcome.rejected(REASON_NO_BEACON_HIT)
        self._taken_id = hit.id
        self._mode = Mode.EDIT_PLACING
        return FusionOutcome.taken(hit.id)

    def _analyze_pointer_command(self, window: CaptureWindow) -> FusionOutcome:
        expected = _MODE_KEYWORDS[self._mode]
        outcome = self._pointer_command(window, expected)
        if outcome is not None:
            return outcome
        hit = self.store.hit_test(window.pointer[-1].p, self.params.r_hit)
        if hit is None:
            return FusionOutcome.rejected(REASON_NO_BEACON_HIT)
        if self._mode == Mode.GO:
            goal = hit.pose
            if self._on_goal is not None:
                self._on_goal(goal, hit.id)
            return FusionOutcome.dispatched(goal, hit.id)
        self.store.remove_beacon(hit.id)
        return FusionOutcome.deleted(hit.id)

    def _pointer_command(self, window: CaptureWindow, expected: Keyword) -> FusionOutcome | None:
        """Shared keyword/pointer validation; None means proceed to hit-test."""
        try:
            text = transcribe(window.utterance, self.backend)
        except IntentError:
            text = ""  # a dead STT backend degrades to "no keyword heard"
        if detect_keyword(text) != expected:
            return FusionOutcome.rejected(REASON_NO_KEYWORD)
        if not window.pointer:
            return FusionOutcome.rejected(REASON_NO_POINTER)
        return None

    # -- stage timing -------------------------------------------------------

    def _tick(self) -> float | None:
        return self._timer() if self._timer is not None else None

    def _record(self, stage: str, t0: float | None) -> None:
        if t0 is not None and self._on_timing is not None:
            self._on_timing(stage, self._timer() - t0)
