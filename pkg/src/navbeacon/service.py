"""Operator-facing HTTP + websocket service around one fusion session.

Every operator action becomes a SessionEvent: appended to the session
log, broadcast to /events subscribers, and kept in memory for /metrics.
Event log `t` is the serialized funnel time; the semantic capture times
travel inside payloads so replay sees exactly what the client sent.
"""

from __future__ import annotations

import base64
import os
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .config import AppConfig
from .clustering import PointerSample
from .events import (
    KIND_MODE_CHANGE,
    KIND_OUTCOME,
    KIND_POINTER,
    KIND_ROBOT_POSE,
    KIND_UTTERANCE_END,
    KIND_UTTERANCE_START,
    KIND_UTTERANCE_TEXT,
    SessionEvent,
    SessionLog,
)
from .fusion import CaptureWindow, FusionEngine, FusionOutcome, FusionParams, Mode
from .geometry import FrameId, Pose, Vec3, planar_distance, quat_to_yaw, transform_pose, wrap_angle
from .intent import Utterance
from .robot_bridge import BridgeClient, NavGoal, SimulatorServer
from .vad import calibrate, calibrate_from_rms, frames_from_wav
from .world_store import DuplicateNameError, NotFoundError, StoreError, WorldStore


class RealClock:
    """Monotonic seconds since construction."""

    def __init__(self):
        self._t0 = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._t0


def beacon_json(b) -> dict:
    return {"id": b.id, "location": b.location.to_list(), "rotation": b.rotation.to_list()}


def label_json(l) -> dict:
    return {"id": l.id, "name": l.name, "location": l.location.to_list()}


def outcome_json(outcome: FusionOutcome) -> dict:
    return {
        "kind": outcome.kind.value,
        "beacons": [beacon_json(b) for b in outcome.beacons],
        "beacon_id": outcome.beacon_id,
        "goal": outcome.goal.to_dict() if outcome.goal is not None else None,
        "reason": outcome.reason,
    }


@dataclass
class _CaptureTimings:
    stages: dict = field(default_factory=dict)

    def sink(self, stage: str, seconds: float) -> None:
        self.stages[stage] = seconds


class ServiceRuntime:
    """Owns the store, fusion engine, robot bridge, and event fan-out."""

    def __init__(self, config: AppConfig, clock=None, session_name: str | None = None):
        self.config = config
        self.clock = clock or RealClock()
        self.store = WorldStore()
        if os.path.exists(os.path.join(config.store_dir, "labels.jsonl")):
            self.store.load(config.store_dir)

        name = session_name or time.strftime("session-%Y%m%d-%H%M%S")
        self.session_path = os.path.join(config.session_dir, f"{name}.jsonl")
        self.log = SessionLog(self.session_path)

        self._timings = _CaptureTimings()
        self.engine = FusionEngine(
            self.store,
            config.backend,
            FusionParams(d_th=config.d_th, r_hit=config.r_hit),
            on_goal=self._dispatch_goal,
            on_timing=self._timings.sink,
            timer=time.perf_counter,
        )

        self.sim: SimulatorServer | None = None
        self.bridge: BridgeClient | None = None
        self._active_goal: NavGoal | None = None
        self._goal_beacon: dict[str, str] = {}

        self._lock = threading.RLock()
        self._events: list[SessionEvent] = []
        self._last_t = float("-inf")
        self._subscribers: list[queue.Queue] = []
        self._running = False
        self._tf_thread: threading.Thread | None = None

    # -- lifecycle -------------------------------------------------------

    def start(self) -> None:
        self._running = True
        if self.config.sim_embedded:
            self.sim = SimulatorServer(
                host=self.config.bridge_host,
                port=self.config.bridge_port,
                params=self.config.sim,
            )
            self.sim.start()
            bridge_port = self.sim.port
        else:
            bridge_port = self.config.bridge_port
        self.bridge = BridgeClient(self.config.bridge_host, bridge_port)
        self.bridge.start()
        self._tf_thread = threading.Thread(target=self._pump_tf, daemon=True)
        self._tf_thread.start()

    def stop(self) -> None:
        self._running = False
        if self._tf_thread is not None:
            self._tf_thread.join(timeout=2.0)
        if self.bridge is not None:
            self.bridge.close()
        if self.sim is not None:
            self.sim.stop()
        self.log.close()

    # -- event funnel ------------------------------------------------------

    def _emit(self, kind: str, payload: dict) -> SessionEvent:
        with self._lock:
            t = max(self.clock.now(), self._last_t + 1e-9)
            self._last_t = t
            event = SessionEvent(t, kind, payload)
            self._events.append(event)
            self.log.append(event)
            for q in list(self._subscribers):
                try:
                    q.put_nowait(event)
                except queue.Full:
                    try:
                        q.get_nowait()  # drop oldest for slow consumers
                    except queue.Empty:
                        pass
                    q.put_nowait(event)
            return event

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=256)
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    @property
    def events(self) -> list[SessionEvent]:
        with self._lock:
            return list(self._events)

    # -- operator actions ---------------------------------------------------

    def set_mode(self, mode_name: str) -> Mode:
        try:
            mode = Mode(mode_name)
        except ValueError:
            raise ValueError(f"unknown mode {mode_name!r}")
        with self._lock:
            result = self.engine.set_mode(mode)
            self._emit(KIND_MODE_CHANGE, {"mode": result.value})
            return result

    def upsert_label(self, name: str, location, overwrite: bool = False):
        with self._lock:
            label = self.store.upsert_label(name, Vec3.from_list(location), overwrite=overwrite)
            self.store.save(self.config.store_dir)
            return label

    def capture(self, *, text: str | None = None, wav: bytes | None = None,
                pointer=None, t_start: float | None = None,
                t_end: float | None = None) -> dict:
        """Run one capture window through the fusion engine.

        `pointer` is [[t, x, y], ...] in the client's window clock. Returns
        the outcome plus server-side processing time.
        """
        samples = [PointerSample(float(t), Vec3(float(x), float(y), 0.0))
                   for t, x, y in (pointer or [])]
        if t_start is None:
            t_start = samples[0].t if samples else 0.0
        if t_end is None:
            t_end = (samples[-1].t + 1e-3) if samples else t_start + 0.1
        if wav is not None:
            utterance = Utterance(t_start, t_end, audio=wav)
            text_payload = {"wav_b64": base64.b64encode(wav).decode("ascii")}
        else:
            utterance = Utterance(t_start, t_end, text=text or "")
            text_payload = {"text": text or ""}

        window = CaptureWindow(utterance, tuple(samples))

        with self._lock:
            started = time.perf_counter()
            self._emit(KIND_UTTERANCE_START, {"t_start": t_start})
            for s in samples:
                self._emit(KIND_POINTER, {"t": s.t, "p": s.p.to_list()})
            self._emit(KIND_UTTERANCE_TEXT, text_payload)
            self._emit(KIND_UTTERANCE_END, {"t_end": t_end})

            mode = self.engine.mode
            self._timings.stages = {}
            outcome = self.engine.analyze(window)
            stage = {
                "voice_s": t_end - t_start,
                "intent_s": self._timings.stages.get("intent", 0.0),
                "clustering_s": self._timings.stages.get("clustering", 0.0),
            }
            payload = outcome_json(outcome)
            payload["mode"] = mode.value
            payload["stage"] = stage
            self._emit(KIND_OUTCOME, payload)
            self.store.save(self.config.store_dir)
            processing = time.perf_counter() - started

        return {"outcome": payload, "revision": self.store.revision, "processing_s": processing}

    def state(self) -> dict:
        snap = self.store.snapshot()
        return {
            "labels": [label_json(l) for l in snap.labels],
            "beacons": [beacon_json(b) for b in snap.beacons],
            "mode": self.engine.mode.value,
            "revision": snap.revision,
            "robot": self._robot_state(),
        }

    def calibrate_threshold(self, *, rms=None, wav: bytes | None = None) -> float:
        if (rms is None) == (wav is None):
            raise ValueError("provide exactly one of rms list or wav audio")
        if rms is not None:
            return calibrate_from_rms([float(v) for v in rms])
        return calibrate(frames_from_wav(wav))

    # -- robot ----------------------------------------------------------------

    def _dispatch_goal(self, goal_world: Pose, beacon_id: str) -> None:
        goal_map = transform_pose(goal_world, FrameId.WORLD, FrameId.MAP, self.config.anchor)
        goal = NavGoal(goal_map, goal_id=str(uuid.uuid4()))
        self._goal_beacon[goal.goal_id] = beacon_id
        self._active_goal = goal
        if self.bridge is not None:
            self.bridge.publish_goal(goal)

    def _robot_state(self) -> dict | None:
        if self.bridge is None:
            return None
        tf = self.bridge.last_tf
        if tf is None:
            return None
        world = transform_pose(tf.pose, FrameId.MAP, FrameId.WORLD, self.config.anchor)
        return {
            "position": world.position.to_list(),
            "rotation": world.rotation.to_list(),
            "t": tf.t,
            "stale": self.bridge.tf_stale(),
            "arrived": self._goal_reached(tf.pose),
        }

    def _goal_reached(self, map_pose: Pose) -> bool:
        goal = self._active_goal
        if goal is None:
            return False
        pos_ok = planar_distance(map_pose.position, goal.pose.position) <= self.config.sim.pos_tol
        yaw_ok = abs(wrap_angle(quat_to_yaw(map_pose.rotation)
                                - quat_to_yaw(goal.pose.rotation))) <= self.config.sim.yaw_tol
        return pos_ok and yaw_ok

    def _pump_tf(self) -> None:
        if self.bridge is None:
            return
        updates = self.bridge.subscribe_tf()
        while self._running:
            if not updates:
                time.sleep(0.02)
                continue
            tf = updates.popleft()
            world = transform_pose(tf.pose, FrameId.MAP, FrameId.WORLD, self.config.anchor)
            self._emit(
                KIND_ROBOT_POSE,
                {
                    "position": world.position.to_list(),
                    "rotation": world.rotation.to_list(),
                    "t_sim": tf.t,
                    "arrived": self._goal_reached(tf.pose),
                },
            )


def create_app(runtime: ServiceRuntime) -> FastAPI:
    app = FastAPI(title="navbeacon")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],  # the console is served as static files elsewhere
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/state")
    def get_state():
        return runtime.state()

    @app.post("/mode")
    def post_mode(body: dict):
        try:
            mode = runtime.set_mode(str(body.get("mode", "")))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"mode": mode.value}

    @app.post("/labels")
    def post_label(body: dict):
        try:
            label = runtime.upsert_label(
                str(body["name"]), body["location"], overwrite=bool(body.get("overwrite", False))
            )
        except KeyError as exc:
            raise HTTPException(status_code=400, detail=f"missing field {exc}")
        except DuplicateNameError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return label_json(label)

    @app.post("/capture")
    def post_capture(body: dict):
        wav = None
        if body.get("wav_b64") is not None:
            try:
                wav = base64.b64decode(body["wav_b64"])
            except Exception as exc:
                raise HTTPException(status_code=400, detail=f"bad wav_b64: {exc}")
        try:
            return runtime.capture(
                text=body.get("text"),
                wav=wav,
                pointer=body.get("pointer"),
                t_start=body.get("t_start"),
                t_end=body.get("t_end"),
            )
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/calibrate")
    def post_calibrate(body: dict):
        wav = None
        if body.get("wav_b64") is not None:
            wav = base64.b64decode(body["wav_b64"])
        try:
            threshold = runtime.calibrate_threshold(rms=body.get("rms"), wav=wav)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"threshold": threshold}

    @app.get("/metrics")
    def get_metrics():
        from .replay import metrics_from_events

        report = metrics_from_events(runtime.events, runtime.store.snapshot().beacons, None)
        return JSONResponse(content=report.to_dict())

    @app.websocket("/events")
    async def events_ws(ws: WebSocket):
        await ws.accept()
        q = runtime.subscribe()
        try:
            await ws.send_json({"kind": "hello", "revision": runtime.store.revision})
            while True:
                try:
                    event = await run_in_threadpool(q.get, True, 0.25)
                except queue.Empty:
                    continue
                await ws.send_text(event.to_json_line())
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            runtime.unsubscribe(q)

    return app


def run_service(config: AppConfig) -> None:
    """Start the simulator (if embedded), the bridge, and the HTTP API."""
    import uvicorn

    runtime = ServiceRuntime(config)
    runtime.start()
    app = create_app(runtime)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    finally:
        runtime.stop()
