// Scripted console loop against a real service: all four operator
// functions (Add with three beacons in one utterance, Edit take+move,
// Go with robot arrival, Delete), then reconnect and verify the rendered
// state equals GET /state. Requires the `navbeacon` CLI on PATH.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { CaptureSession } from "../src/capture.js";
import { EventStream, ServiceClient, type WsLike } from "../src/client.js";
import type { SessionEvent } from "../src/protocol.js";
import { ViewStore, snapshotSignature } from "../src/store.js";

const SERVICE_PORT = 8871;
const STUB_PORT = 9902;
const BRIDGE_PORT = 10451;
const BASE = `http://127.0.0.1:${SERVICE_PORT}`;

const procs: ChildProcess[] = [];

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitForService(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/state`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await sleep(250);
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  const work = mkdtempSync(join(tmpdir(), "console-e2e-"));
  const config = {
    port: SERVICE_PORT,
    store_dir: join(work, "store"),
    session_dir: join(work, "sessions"),
    backend: {
      stt_url: `http://127.0.0.1:${STUB_PORT}/stt`,
      llm_url: `http://127.0.0.1:${STUB_PORT}/llm`,
      timeout: 2.0,
    },
    bridge_port: BRIDGE_PORT,
    sim_embedded: true,
    sim: { max_linear: 1.5, max_angular: 4.0 },
  };
  const configPath = join(work, "config.json");
  writeFileSync(configPath, JSON.stringify(config));

  procs.push(spawn("navbeacon", ["stub-models", "--port", String(STUB_PORT)], { stdio: "ignore" }));
  procs.push(spawn("navbeacon", ["serve", "--config", configPath], { stdio: "ignore" }));
  await waitForService(30_000);
}, 60_000);

afterAll(() => {
  for (const p of procs) p.kill("SIGTERM");
});

describe("console loop against a live service", () => {
  const client = new ServiceClient(BASE);
  const store = new ViewStore();
  let pointer: { x: number; y: number } | null = null;
  const capture = new CaptureSession(
    () => pointer,
    { minX: -20, maxX: 20, minY: -20, maxY: 20 },
  );
  let stream: EventStream;
  const seen: SessionEvent[] = [];

  async function speakAt(
    dwells: Array<{ x: number; y: number; ms: number }>,
    text: string,
  ): Promise<string> {
    capture.begin();
    for (const d of dwells) {
      pointer = { x: d.x, y: d.y };
      await sleep(d.ms);
    }
    const result = await client.capture(capture.end(text));
    return result.outcome.kind;
  }

  async function waitFor(check: () => boolean, timeoutMs: number, what: string): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
      if (check()) return;
      await sleep(100);
    }
    throw new Error(`timed out waiting for ${what}`);
  }

  it("runs add, edit, go and delete end to end", async () => {
    stream = new EventStream(
      `ws://127.0.0.1:${SERVICE_PORT}/events`,
      (url) => new WebSocket(url) as unknown as WsLike,
      {
        onConnect: () => {
          store.connected = true;
          void client.getState().then((snap) => store.applySnapshot(snap));
        },
        onDisconnect: () => {
          store.connected = false;
        },
        onEvent: (event) => {
          seen.push(event);
          store.applyEvent(event);
        },
      },
    );
    stream.start();
    await waitFor(() => store.connected, 10_000, "event stream connect");

    await client.addLabel("Water bottle", [1, 5, 0]);
    await client.addLabel("Coffee machine", [2, 5, 0]);
    await client.addLabel("Television", [3, 5, 0]);
    await client.addLabel("Flower pot", [8, -2, 0]);

    // -- Add: three beacons from a single utterance --
    await client.setMode("add");
    const addKind = await speakAt(
      [
        { x: 1, y: 0, ms: 450 },
        { x: 2, y: 0, ms: 450 },
        { x: 3, y: 0, ms: 450 },
      ],
      "an object here facing water bottle then coffee machine then television",
    );
    expect(addKind).toBe("beacons_created");
    await waitFor(() => store.beacons.size === 3, 5_000, "three beacons in the view");
    const addedIds = [...store.beacons.keys()];
    expect(addedIds).toHaveLength(3);

    // -- Edit: take the first beacon, move it and face the flower pot --
    await client.setMode("edit_selecting");
    const firstId = [...store.beacons.values()].find(
      (b) => Math.abs(b.location[0] - 1) < 0.05,
    )!.id;
    const takeKind = await speakAt([{ x: 1, y: 0, ms: 350 }], "take");
    expect(takeKind).toBe("beacon_taken");
    await waitFor(() => store.takenBeaconId === firstId, 5_000, "taken beacon in the view");
    expect(store.mode).toBe("edit_placing");

    const moveKind = await speakAt([{ x: 0.5, y: -1, ms: 450 }], "facing flower pot");
    expect(moveKind).toBe("beacon_moved");
    await waitFor(
      () => Math.abs((store.beacons.get(firstId)?.location[1] ?? 0) + 1) < 0.05,
      5_000,
      "moved beacon position",
    );
    expect(store.beacons.size).toBe(3); // moved, not duplicated
    expect(store.mode).toBe("edit_selecting");

    // -- Go: dispatch to the moved beacon and watch the robot arrive --
    await client.setMode("go");
    const goKind = await speakAt([{ x: 0.5, y: -1, ms: 350 }], "go");
    expect(goKind).toBe("nav_dispatched");
    await waitFor(() => store.robot !== null && store.robot.arrived, 30_000, "robot arrival");
    expect(store.goal?.beaconId).toBe(firstId);
    const robot = store.robot!;
    expect(Math.hypot(robot.position[0] - 0.5, robot.position[1] + 1)).toBeLessThan(0.1);

    // -- Delete: remove the beacon at (2, 0) --
    await client.setMode("delete");
    const deleteKind = await speakAt([{ x: 2, y: 0, ms: 350 }], "delete");
    expect(deleteKind).toBe("beacon_deleted");
    await waitFor(() => store.beacons.size === 2, 5_000, "beacon removed from the view");

    // -- a rejection surfaces its reason code --
    const missKind = await speakAt([{ x: 15, y: 15, ms: 350 }], "delete");
    expect(missKind).toBe("rejected");
    await waitFor(
      () => store.liveToasts(60_000).some((t) => t.message.includes("no-beacon-hit")),
      5_000,
      "rejection toast",
    );
  }, 120_000);

  it("reconnect resyncs the view to exactly GET /state", async () => {
    stream.stop();
    store.connected = false;
    const reconnected = new Promise<void>((resolve) => {
      stream = new EventStream(
        `ws://127.0.0.1:${SERVICE_PORT}/events`,
        (url) => new WebSocket(url) as unknown as WsLike,
        {
          onConnect: () => {
            void client.getState().then((snap) => {
              store.applySnapshot(snap);
              store.connected = true;
              resolve();
            });
          },
          onDisconnect: () => {
            store.connected = false;
          },
          onEvent: (event) => store.applyEvent(event),
        },
      );
      stream.start();
    });
    await reconnected;

    const fresh = await client.getState();
    expect(store.worldSignature()).toBe(snapshotSignature(fresh));
    stream.stop();
  }, 30_000);
});
