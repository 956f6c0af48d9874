// View state derived from the server: a resync snapshot plus the event
// stream. Nothing here is authoritative; after any reconnect a fresh
// GET /state must reproduce the same rendered world.

import type {
  BeaconRecord,
  LabelRecord,
  OutcomePayload,
  RobotRecord,
  SessionEvent,
  StateSnapshot,
  Vec3,
} from "./protocol.js";

export interface Toast {
  kind: "info" | "error";
  message: string;
  at: number; // ms timestamp for expiry
}

export interface RobotView {
  position: Vec3;
  yawQuat: [number, number, number, number];
  trail: Array<[number, number]>;
  arrived: boolean;
  lastSeenMs: number; // local receive time, drives the stale graying
}

const TRAIL_LIMIT = 400;

export class ViewStore {
  labels = new Map<string, LabelRecord>();
  beacons = new Map<string, BeaconRecord>();
  mode = "off";
  revision = 0;
  robot: RobotView | null = null;
  takenBeaconId: string | null = null;
  goal: { position: Vec3; beaconId: string | null } | null = null;
  toasts: Toast[] = [];
  connected = false;

  constructor(private now: () => number = () => Date.now()) {}

  applySnapshot(snap: StateSnapshot): void {
    this.labels = new Map(snap.labels.map((l) => [l.id, l]));
    this.beacons = new Map(snap.beacons.map((b) => [b.id, b]));
    this.mode = snap.mode;
    this.revision = snap.revision;
    if (snap.robot) {
      this.updateRobot(snap.robot.position, snap.robot.rotation, snap.robot.arrived);
    }
  }

  applyEvent(event: SessionEvent): void {
    switch (event.kind) {
      case "mode_change":
        this.mode = String(event.payload["mode"]);
        if (this.mode !== "edit_placing") this.takenBeaconId = null;
        break;
      case "outcome":
        this.applyOutcome(event.payload as unknown as OutcomePayload);
        break;
      case "robot_pose": {
        const p = event.payload as Record<string, unknown>;
        this.updateRobot(
          p["position"] as Vec3,
          p["rotation"] as [number, number, number, number],
          Boolean(p["arrived"]),
        );
        break;
      }
      default:
        break; // pointer/utterance echoes carry nothing the view needs
    }
  }

  private applyOutcome(outcome: OutcomePayload): void {
    switch (outcome.kind) {
      case "beacons_created":
        for (const b of outcome.beacons) this.beacons.set(b.id, b);
        this.toast("info", `placed ${outcome.beacons.length} beacon(s)`);
        break;
      case "beacon_moved":
        for (const b of outcome.beacons) this.beacons.set(b.id, b);
        this.takenBeaconId = null;
        this.mode = "edit_selecting"; // the server returns to selecting after a move
        this.toast("info", "beacon moved");
        break;
      case "beacon_taken":
        this.takenBeaconId = outcome.beacon_id;
        this.mode = "edit_placing";
        this.toast("info", "beacon taken: point and speak its new pose");
        break;
      case "beacon_deleted":
        if (outcome.beacon_id) this.beacons.delete(outcome.beacon_id);
        this.toast("info", "beacon deleted");
        break;
      case "nav_dispatched":
        this.goal = {
          position: outcome.goal ? outcome.goal.position : [0, 0, 0],
          beaconId: outcome.beacon_id,
        };
        if (this.robot) this.robot.arrived = false;
        this.toast("info", "robot dispatched");
        break;
      case "rejected":
        this.toast("error", `rejected: ${outcome.reason}`);
        break;
      default:
        break;
    }
  }

  private updateRobot(
    position: Vec3,
    rotation: [number, number, number, number],
    arrived: boolean,
  ): void {
    const trail = this.robot ? this.robot.trail : [];
    trail.push([position[0], position[1]]);
    if (trail.length > TRAIL_LIMIT) trail.shift();
    this.robot = { position, yawQuat: rotation, trail, arrived, lastSeenMs: this.now() };
  }

  robotStale(maxAgeMs = 1000): boolean {
    return this.robot !== null && this.now() - this.robot.lastSeenMs > maxAgeMs;
  }

  toast(kind: Toast["kind"], message: string): void {
    this.toasts.push({ kind, message, at: this.now() });
    if (this.toasts.length > 6) this.toasts.shift();
  }

  liveToasts(ttlMs = 4000): Toast[] {
    const cutoff = this.now() - ttlMs;
    return this.toasts.filter((t) => t.at >= cutoff);
  }

  // identity of the rendered world, for the reconnect-consistency check
  worldSignature(): string {
    const labels = [...this.labels.values()].sort((a, b) => a.id.localeCompare(b.id));
    const beacons = [...this.beacons.values()].sort((a, b) => a.id.localeCompare(b.id));
    return JSON.stringify({ labels, beacons, mode: this.mode });
  }
}

export function snapshotSignature(snap: StateSnapshot): string {
  const labels = [...snap.labels].sort((a, b) => a.id.localeCompare(b.id));
  const beacons = [...snap.beacons].sort((a, b) => a.id.localeCompare(b.id));
  return JSON.stringify({ labels, beacons, mode: snap.mode });
}
