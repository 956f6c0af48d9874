"""Framed TCP bridge to a simulated robot.

Wire layout per frame: 4-byte little-endian topic length, topic bytes,
4-byte little-endian payload length, payload bytes. Payloads are UTF-8
JSON. The simulator consumes "goal_pose" frames and publishes its pose on
"tf" at 10 Hz; navigation is a rotate, drive straight, rotate controller
on an open plane.
"""

from __future__ import annotations

import json
import math
import socket
import struct
import threading
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .geometry import Pose, Quat, Vec3, quat_to_yaw, wrap_angle, yaw_to_quat

DEFAULT_PORT = 10000
TOPIC_TF = "tf"
TOPIC_GOAL = "goal_pose"
MAX_TOPIC_LEN = 255
MAX_PAYLOAD_LEN = 16 * 1024 * 1024  # defensive cap against hostile length prefixes
STALE_TF_AGE = 1.0  # seconds

_LEN = struct.Struct("<I")


class BridgeProtocolError(Exception):
    pass


class IncompleteFrameError(BridgeProtocolError):
    """More bytes are needed before a frame can be decoded."""


@dataclass(frozen=True)
class BridgeFrame:
    topic: str
    payload: bytes

    def __post_init__(self) -> None:
        encoded = self.topic.encode("utf-8")
        if not 1 <= len(encoded) <= MAX_TOPIC_LEN:
            raise ValueError(f"topic must be 1..{MAX_TOPIC_LEN} bytes, got {len(encoded)}")
        try:
            json.loads(self.payload.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"payload must be UTF-8 JSON: {exc}") from exc

    def payload_json(self) -> dict:
        return json.loads(self.payload.decode("utf-8"))

    @classmethod
    def from_json(cls, topic: str, obj) -> "BridgeFrame":
        return cls(topic, json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8"))


def encode_frame(frame: BridgeFrame) -> bytes:
    topic = frame.topic.encode("utf-8")
    return _LEN.pack(len(topic)) + topic + _LEN.pack(len(frame.payload)) + frame.payload


def decode_frame(data: bytes) -> BridgeFrame:
    """Decode exactly one frame; trailing bytes are a protocol error."""
    frame, consumed = _decode_prefix(data)
    if consumed != len(data):
        raise BridgeProtocolError(f"{len(data) - consumed} trailing bytes after frame")
    return frame


def _decode_prefix(data: bytes) -> tuple[BridgeFrame, int]:
    if len(data) < 4:
        raise IncompleteFrameError("need topic length")
    (topic_len,) = _LEN.unpack_from(data, 0)
    if topic_len == 0 or topic_len > MAX_TOPIC_LEN:
        raise BridgeProtocolError(f"topic length {topic_len} outside 1..{MAX_TOPIC_LEN}")
    if len(data) < 4 + topic_len + 4:
        raise IncompleteFrameError("need topic bytes and payload length")
    try:
        topic = data[4 : 4 + topic_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BridgeProtocolError(f"topic is not UTF-8: {exc}") from exc
    (payload_len,) = _LEN.unpack_from(data, 4 + topic_len)
    if payload_len > MAX_PAYLOAD_LEN:
        raise BridgeProtocolError(f"payload length {payload_len} exceeds cap")
    total = 4 + topic_len + 4 + payload_len
    if len(data) < total:
        raise IncompleteFrameError("need payload bytes")
    payload = bytes(data[4 + topic_len + 4 : total])
    try:
        frame = BridgeFrame(topic, payload)
    except ValueError as exc:
        raise BridgeProtocolError(str(exc)) from exc
    return frame, total


class FrameReader:
    """Incremental decoder over a byte stream."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[BridgeFrame]:
        self._buf.extend(data)
        frames = []
        while True:
            try:
                frame, consumed = _decode_prefix(bytes(self._buf))
            except IncompleteFrameError:
                break
            del self._buf[:consumed]
            frames.append(frame)
        return frames


# -- robot simulator -------------------------------------------------------


class RobotStatus(Enum):
    IDLE = "idle"
    ROTATING = "rotating"
    TRANSLATING = "translating"
    FINAL_ROTATING = "final_rotating"
    ARRIVED = "arrived"


@dataclass(frozen=True)
class RobotState:
    pose: Pose
    linear_speed: float = 0.0
    angular_speed: float = 0.0
    status: RobotStatus = RobotStatus.IDLE


@dataclass(frozen=True)
class NavGoal:
    pose: Pose
    goal_id: str

    def to_json(self) -> dict:
        return {
            "goal_id": self.goal_id,
            "position": self.pose.position.to_list(),
            "rotation": self.pose.rotation.to_list(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NavGoal":
        return cls(
            Pose(Vec3.from_list(obj["position"]), Quat.from_list(obj["rotation"])),
            str(obj["goal_id"]),
        )


@dataclass(frozen=True)
class SimParams:
    max_linear: float = 0.5  # m/s
    max_angular: float = 1.5  # rad/s
    tick: float = 0.05  # seconds
    pos_tol: float = 0.02  # meters
    yaw_tol: float = math.radians(1.0)
    tf_period: float = 0.1  # seconds between TF frames

    def __post_init__(self) -> None:
        if min(self.max_linear, self.max_angular, self.tick, self.pos_tol, self.yaw_tol) <= 0:
            raise ValueError("simulator parameters must be positive")


_HEADING_EPS = 1e-6  # rad; heading is "aligned" below this


def sim_tick(state: RobotState, goal: NavGoal | None, dt: float,
             params: SimParams = SimParams()) -> RobotState:
    """Advance the robot by dt toward the goal; pure function of its inputs.

    Phases fall through within a single tick when already satisfied, so a
    goal equal to the current pose arrives immediately.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if goal is None:
        return RobotState(state.pose, 0.0, 0.0, RobotStatus.IDLE)

    pos = state.pose.position
    yaw = quat_to_yaw(state.pose.rotation)
    dx = goal.pose.position.x - pos.x
    dy = goal.pose.position.y - pos.y
    dist = math.sqrt(dx * dx + dy * dy)

    if dist > params.pos_tol:
        bearing = math.atan2(dy, dx)
        heading_err = wrap_angle(bearing - yaw)
        if abs(heading_err) > _HEADING_EPS:
            step = _clamp(heading_err, params.max_angular * dt)
            new_yaw = wrap_angle(yaw + step)
            return RobotState(
                Pose(pos, yaw_to_quat(new_yaw)), 0.0, abs(step) / dt, RobotStatus.ROTATING
            )
        move = min(params.max_linear * dt, dist)
        ratio = move / dist
        new_pos = Vec3(pos.x + dx * ratio, pos.y + dy * ratio, pos.z)
        return RobotState(
            Pose(new_pos, state.pose.rotation), move / dt, 0.0, RobotStatus.TRANSLATING
        )

    goal_yaw = quat_to_yaw(goal.pose.rotation)
    yaw_err = wrap_angle(goal_yaw - yaw)
    if abs(yaw_err) > params.yaw_tol:
        step = _clamp(yaw_err, params.max_angular * dt)
        new_yaw = wrap_angle(yaw + step)
        return RobotState(
            Pose(pos, yaw_to_quat(new_yaw)), 0.0, abs(step) / dt, RobotStatus.FINAL_ROTATING
        )
    return RobotState(state.pose, 0.0, 0.0, RobotStatus.ARRIVED)


def _clamp(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))


# -- simulator server --------------------------------------------------------


class SimulatorServer:
    """TCP server running the kinematic robot.

    Accepts any number of bridge connections; every client receives the TF
    stream and may submit goals. Goal ids are deduplicated so re-delivery
    after a reconnect cannot restart a maneuver.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT,
                 params: SimParams = SimParams(), initial_pose: Pose | None = None):
        self.params = params
        self._host = host
        self._port = port
        self._state = RobotState(initial_pose or Pose.identity())
        self._goal: NavGoal | None = None
        self._seen_goal_ids: set[str] = set()
        self.accepted_goals = 0
        self._lock = threading.Lock()
        self._clients: list[socket.socket] = []
        self._listener: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self._running = False
        self._sim_time = 0.0

    @property
    def port(self) -> int:
        assert self._listener is not None, "server not started"
        return self._listener.getsockname()[1]

    @property
    def state(self) -> RobotState:
        with self._lock:
            return self._state

    def submit_goal(self, goal: NavGoal) -> bool:
        """Install a goal unless its id was already executed; returns acceptance."""
        with self._lock:
            if goal.goal_id in self._seen_goal_ids:
                return False
            self._seen_goal_ids.add(goal.goal_id)
            self._goal = goal
            self.accepted_goals += 1
            return True

    def start(self) -> None:
        self._listener = socket.create_server((self._host, self._port))
        self._listener.settimeout(0.2)
        self._running = True
        for target in (self._accept_loop, self._tick_loop):
            th = threading.Thread(target=target, daemon=True)
            th.start()
            self._threads.append(th)

    def stop(self) -> None:
        self._running = False
        for th in self._threads:
            th.join(timeout=2.0)
        with self._lock:
            clients = list(self._clients)
            self._clients.clear()
        for c in clients:
            _close_quietly(c)
        if self._listener is not None:
            _close_quietly(self._listener)

    def drop_connections(self) -> None:
        """Sever all client connections (fault injection in tests)."""
        with self._lock:
            clients = list(self._clients)
            self._clients.clear()
        for c in clients:
            _close_quietly(c)

    def _accept_loop(self) -> None:
        while self._running:
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            with self._lock:
                self._clients.append(conn)
            th = threading.Thread(target=self._client_loop, args=(conn,), daemon=True)
            th.start()
            self._threads.append(th)

    def _client_loop(self, conn: socket.socket) -> None:
        reader = FrameReader()
        conn.settimeout(0.2)
        while self._running:
            try:
                data = conn.recv(4096)
            except socket.timeout:
                continue
            except OSError:
                break
            if not data:
                break
            try:
                frames = reader.feed(data)
            except BridgeProtocolError:
                break  # a corrupt stream cannot be resynchronized
            for frame in frames:
                if frame.topic == TOPIC_GOAL:
                    try:
                        self.submit_goal(NavGoal.from_json(frame.payload_json()))
                    except (KeyError, TypeError, ValueError):
                        continue  # malformed goal: ignore rather than kill the link
        with self._lock:
            if conn in self._clients:
                self._clients.remove(conn)
        _close_quietly(conn)

    def _tick_loop(self) -> None:
        next_tf = 0.0
        while self._running:
            start = time.monotonic()
            with self._lock:
                self._state = sim_tick(self._state, self._goal, self.params.tick, self.params)
                if self._state.status == RobotStatus.ARRIVED:
                    self._goal = None
                self._sim_time += self.params.tick
                sim_time = self._sim_time
                state = self._state
            if sim_time + 1e-9 >= next_tf:
                next_tf += self.params.tf_period
                self._broadcast_tf(state, sim_time)
            elapsed = time.monotonic() - start
            time.sleep(max(0.0, self.params.tick - elapsed))

    def _broadcast_tf(self, state: RobotState, sim_time: float) -> None:
        frame = BridgeFrame.from_json(
            TOPIC_TF,
            {
                "position": state.pose.position.to_list(),
                "rotation": state.pose.rotation.to_list(),
                "t": sim_time,
            },
        )
        data = encode_frame(frame)
        with self._lock:
            clients = list(self._clients)
        for conn in clients:
            try:
                conn.sendall(data)
            except OSError:
                with self._lock:
                    if conn in self._clients:
                        self._clients.remove(conn)
                _close_quietly(conn)


# -- bridge client -----------------------------------------------------------


@dataclass(frozen=True)
class TfUpdate:
    pose: Pose  # map frame
    t: float  # simulator time
    received_at: float  # local monotonic receive time


class BridgeClient:
    """Service-side connection to the simulator.

    Reconnects with capped exponential backoff and re-publishes the last
    goal after a reconnect; the server's goal-id dedup makes that
    at-least-once delivery safe.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT,
                 queue_size: int = 64):
        self._addr = (host, port)
        self._queue_size = queue_size
        self._sock: socket.socket | None = None
        self._send_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._subscribers: list[deque[TfUpdate]] = []
        self._last_goal: NavGoal | None = None
        self._last_tf: TfUpdate | None = None
        self._running = False
        self._thread: threading.Thread | None = None
        self._connected = threading.Event()

    def start(self) -> None:
        self._running = True
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def close(self) -> None:
        self._running = False
        sock = self._sock
        if sock is not None:
            _close_quietly(sock)
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def wait_connected(self, timeout: float = 5.0) -> bool:
        return self._connected.wait(timeout)

    def subscribe_tf(self) -> deque:
        """A bounded deque of TfUpdate; oldest entries are dropped on overflow."""
        q: deque[TfUpdate] = deque(maxlen=self._queue_size)
        with self._state_lock:
            self._subscribers.append(q)
        return q

    @property
    def last_tf(self) -> TfUpdate | None:
        with self._state_lock:
            return self._last_tf

    def tf_stale(self, max_age: float = STALE_TF_AGE) -> bool:
        tf = self.last_tf
        return tf is None or (time.monotonic() - tf.received_at) > max_age

    def publish_goal(self, goal: NavGoal) -> None:
        with self._state_lock:
            self._last_goal = goal
        self._send(BridgeFrame.from_json(TOPIC_GOAL, goal.to_json()))

    def _send(self, frame: BridgeFrame) -> None:
        data = encode_frame(frame)
        with self._send_lock:
            sock = self._sock
            if sock is None:
                return  # will be re-sent by the reconnect path
            try:
                sock.sendall(data)
            except OSError:
                pass  # reader loop notices the broken link and reconnects

    def _run(self) -> None:
        backoff = 0.1
        while self._running:
            try:
                sock = socket.create_connection(self._addr, timeout=2.0)
            except OSError:
                self._connected.clear()
                time.sleep(backoff)
                backoff = min(backoff * 2, 2.0)
                continue
            backoff = 0.1
            sock.settimeout(0.2)
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            self._sock = sock
            self._connected.set()
            with self._state_lock:
                pending = self._last_goal
            if pending is not None:
                self._send(BridgeFrame.from_json(TOPIC_GOAL, pending.to_json()))
            self._read_until_closed(sock)
            self._sock = None
            self._connected.clear()
            _close_quietly(sock)

    def _read_until_closed(self, sock: socket.socket) -> None:
        reader = FrameReader()
        while self._running:
            try:
                data = sock.recv(4096)
            except socket.timeout:
                continue
            except OSError:
                return
            if not data:
                return
            try:
                frames = reader.feed(data)
            except BridgeProtocolError:
                return
            for frame in frames:
                if frame.topic != TOPIC_TF:
                    continue
                try:
                    obj = frame.payload_json()
                    update = TfUpdate(
                        Pose(Vec3.from_list(obj["position"]), Quat.from_list(obj["rotation"])),
                        float(obj["t"]),
                        time.monotonic(),
                    )
                except (KeyError, TypeError, ValueError):
                    continue
                with self._state_lock:
                    self._last_tf = update
                    for q in self._subscribers:
                        q.append(update)


def _close_quietly(sock: socket.socket) -> None:
    try:
        sock.close()
    except OSError:
        pass
