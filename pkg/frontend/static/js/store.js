// View state derived from the server: a resync snapshot plus the event
// stream. Nothing here is authoritative; after any reconnect a fresh
// GET /state must reproduce the same rendered world.
const TRAIL_LIMIT = 400;
export class ViewStore {
    now;
    labels = new Map();
    beacons = new Map();
    mode = "off";
    revision = 0;
    robot = null;
    takenBeaconId = null;
    goal = null;
    toasts = [];
    connected = false;
    constructor(now = () => Date.now()) {
        this.now = now;
    }
    applySnapshot(snap) {
        this.labels = new Map(snap.labels.map((l) => [l.id, l]));
        this.beacons = new Map(snap.beacons.map((b) => [b.id, b]));
        this.mode = snap.mode;
        this.revision = snap.revision;
        if (snap.robot) {
            this.updateRobot(snap.robot.position, snap.robot.rotation, snap.robot.arrived);
        }
    }
    applyEvent(event) {
        switch (event.kind) {
            case "mode_change":
                this.mode = String(event.payload["mode"]);
                if (this.mode !== "edit_placing")
                    this.takenBeaconId = null;
                break;
            case "outcome":
                this.applyOutcome(event.payload);
                break;
            case "robot_pose": {
                const p = event.payload;
                this.updateRobot(p["position"], p["rotation"], Boolean(p["arrived"]));
                break;
            }
            default:
                break; // pointer/utterance echoes carry nothing the view needs
        }
    }
    applyOutcome(outcome) {
        switch (outcome.kind) {
            case "beacons_created":
                for (const b of outcome.beacons)
                    this.beacons.set(b.id, b);
                this.toast("info", `placed ${outcome.beacons.length} beacon(s)`);
                break;
            case "beacon_moved":
                for (const b of outcome.beacons)
                    this.beacons.set(b.id, b);
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
                if (outcome.beacon_id)
                    this.beacons.delete(outcome.beacon_id);
                this.toast("info", "beacon deleted");
                break;
            case "nav_dispatched":
                this.goal = {
                    position: outcome.goal ? outcome.goal.position : [0, 0, 0],
                    beaconId: outcome.beacon_id,
                };
                if (this.robot)
                    this.robot.arrived = false;
                this.toast("info", "robot dispatched");
                break;
            case "rejected":
                this.toast("error", `rejected: ${outcome.reason}`);
                break;
            default:
                break;
        }
    }
    updateRobot(position, rotation, arrived) {
        const trail = this.robot ? this.robot.trail : [];
        trail.push([position[0], position[1]]);
        if (trail.length > TRAIL_LIMIT)
            trail.shift();
        this.robot = { position, yawQuat: rotation, trail, arrived, lastSeenMs: this.now() };
    }
    robotStale(maxAgeMs = 1000) {
        return this.robot !== null && this.now() - this.robot.lastSeenMs > maxAgeMs;
    }
    toast(kind, message) {
        this.toasts.push({ kind, message, at: this.now() });
        if (this.toasts.length > 6)
            this.toasts.shift();
    }
    liveToasts(ttlMs = 4000) {
        const cutoff = this.now() - ttlMs;
        return this.toasts.filter((t) => t.at >= cutoff);
    }
    // identity of the rendered world, for the reconnect-consistency check
    worldSignature() {
        const labels = [...this.labels.values()].sort((a, b) => a.id.localeCompare(b.id));
        const beacons = [...this.beacons.values()].sort((a, b) => a.id.localeCompare(b.id));
        return JSON.stringify({ labels, beacons, mode: this.mode });
    }
}
export function snapshotSignature(snap) {
    const labels = [...snap.labels].sort((a, b) => a.id.localeCompare(b.id));
    const beacons = [...snap.beacons].sort((a, b) => a.id.localeCompare(b.id));
    return JSON.stringify({ labels, beacons, mode: snap.mode });
}
//# sourceMappingURL=store.js.map