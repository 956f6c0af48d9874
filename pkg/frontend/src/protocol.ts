// JSON shapes exchanged with the beacon service. These mirror the server's
// wire format exactly; the console never invents state of its own.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export interface LabelRecord {
  id: string;
  name: string;
  location: Vec3;
}

export interface BeaconRecord {
  id: string;
  location: Vec3;
  rotation: Quat;
}

export interface RobotRecord {
  position: Vec3;
  rotation: Quat;
  t: number;
  stale: boolean;
  arrived: boolean;
}

export interface StateSnapshot {
  labels: LabelRecord[];
  beacons: BeaconRecord[];
  mode: string;
  revision: number;
  robot: RobotRecord | null;
}

export interface OutcomePayload {
  kind: string;
  beacons: BeaconRecord[];
  beacon_id: string | null;
  goal: { position: Vec3; rotation: Quat } | null;
  reason: string | null;
  mode?: string;
  stage?: { voice_s: number; intent_s: number; clustering_s: number };
}

export interface SessionEvent {
  t: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface CapturePayload {
  text?: string;
  wav_b64?: string;
  pointer: Array<[number, number, number]>;
}

export interface CaptureResponse {
  outcome: OutcomePayload;
  revision: number;
  processing_s: number;
}

export const MODES = ["off", "add", "edit_selecting", "go", "delete"] as const;

// yaw of a z-axis rotation quaternion; beacons and the robot are planar
export function quatYaw(q: Quat): number {
  return 2 * Math.atan2(q[2], q[3]);
}
