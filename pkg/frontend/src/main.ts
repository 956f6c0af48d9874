// Console wiring: canvas, sidebar, command bar, and the service link.

import { CaptureSession } from "./capture.js";
import { EventStream, ServiceClient, ServiceError, type WsLike } from "./client.js";
import { canvasDraw, renderScene } from "./render.js";
import { ViewStore } from "./store.js";
import { Viewport } from "./viewport.js";
import { MODES } from "./protocol.js";

const FLOOR_BOUNDS = { minX: -20, maxX: 20, minY: -20, maxY: 20 };
const HOVER_RADIUS_M = 0.15;
const POINTER_TRAIL = 40;

function serviceBase(): string {
  const param = new URLSearchParams(location.search).get("service");
  return param ?? "http://127.0.0.1:8000";
}

function wsUrl(base: string): string {
  return base.replace(/^http/, "ws") + "/events";
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("map");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("canvas 2d context unavailable");
const draw = canvasDraw(ctx);

const base = serviceBase();
const client = new ServiceClient(base);
const store = new ViewStore();
const view = new Viewport(canvas.clientWidth, canvas.clientHeight);

let pointerScreen: { x: number; y: number } | null = null;
let pointerTrail: Array<[number, number]> = [];
let panning = false;
let lastPan = { x: 0, y: 0 };

const capture = new CaptureSession(
  () => (pointerScreen ? view.screenToWorld(pointerScreen) : null),
  FLOOR_BOUNDS,
);

// -- DOM ---------------------------------------------------------------

const modeBar = el<HTMLDivElement>("modes");
const commandInput = el<HTMLInputElement>("command");
const sendButton = el<HTMLButtonElement>("send");
const talkButton = el<HTMLButtonElement>("talk");
const statusEl = el<HTMLSpanElement>("status");
const modeEl = el<HTMLSpanElement>("mode");
const toastsEl = el<HTMLDivElement>("toasts");
const boundsWarnEl = el<HTMLSpanElement>("bounds-warning");

const MODE_TITLES: Record<string, string> = {
  off: "Off",
  add: "Add",
  edit_selecting: "Edit",
  go: "Go",
  delete: "Delete",
};

for (const mode of MODES) {
  const button = document.createElement("button");
  button.textContent = MODE_TITLES[mode] ?? mode;
  button.dataset["mode"] = mode;
  button.addEventListener("click", () => {
    void client
      .setMode(mode)
      .then(() => refreshState())
      .catch((err) => store.toast("error", describe(err)));
  });
  modeBar.appendChild(button);
}

function describe(err: unknown): string {
  if (err instanceof ServiceError) return `${err.status}: ${err.message}`;
  return String(err);
}

// -- capture lifecycle ----------------------------------------------------

function beginUtterance(): void {
  if (store.mode === "off") {
    store.toast("error", "pick a mode first");
    return;
  }
  if (!store.connected) {
    store.toast("error", "not connected");
    return;
  }
  if (!capture.open) capture.begin();
}

async function submitUtterance(text: string): Promise<void> {
  if (!capture.open) return;
  const payload = capture.end(text);
  if (capture.outOfBoundsWarning) {
    store.toast("error", "pointer left the floor: those samples were dropped");
  }
  try {
    const result = await client.capture(payload);
    void result; // rendering happens via the event stream
  } catch (err) {
    store.toast("error", describe(err));
  }
  commandInput.value = "";
}

commandInput.addEventListener("focus", beginUtterance);
commandInput.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") {
    void submitUtterance(commandInput.value);
  } else if (ev.key === "Escape") {
    capture.cancel();
    commandInput.blur();
  }
});
sendButton.addEventListener("click", () => void submitUtterance(commandInput.value));

// push-to-talk exists where the browser offers speech capture; the text
// path is the primary interface either way
interface SpeechRecognitionLike {
  lang: string;
  onresult: ((ev: { results: ArrayLike<ArrayLike<{ transcript: string }>> }) => void) | null;
  onend: (() => void) | null;
  start(): void;
  stop(): void;
}
const SpeechCtor = (window as unknown as Record<string, unknown>)["webkitSpeechRecognition"] as
  | (new () => SpeechRecognitionLike)
  | undefined;
if (SpeechCtor) {
  let recognizer: SpeechRecognitionLike | null = null;
  talkButton.addEventListener("mousedown", () => {
    beginUtterance();
    recognizer = new SpeechCtor();
    recognizer.lang = "en-US";
    recognizer.onresult = (ev) => {
      const first = ev.results[0]?.[0];
      if (first) void submitUtterance(first.transcript);
    };
    recognizer.start();
  });
  talkButton.addEventListener("mouseup", () => recognizer?.stop());
} else {
  talkButton.disabled = true;
  talkButton.title = "speech capture not available in this browser";
}

// -- map interaction ------------------------------------------------------

canvas.addEventListener("mousemove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const point = { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  if (panning) {
    view.panByScreen(point.x - lastPan.x, point.y - lastPan.y);
    lastPan = point;
    return;
  }
  pointerScreen = point;
  const world = view.screenToWorld(point);
  pointerTrail.push([world.x, world.y]);
  if (pointerTrail.length > POINTER_TRAIL) pointerTrail.shift();
});
canvas.addEventListener("mouseleave", () => {
  pointerScreen = null;
  pointerTrail = [];
});
canvas.addEventListener("mousedown", (ev) => {
  if (ev.button === 1 || ev.shiftKey) {
    const rect = canvas.getBoundingClientRect();
    panning = true;
    lastPan = { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
    ev.preventDefault();
  }
});
window.addEventListener("mouseup", () => {
  panning = false;
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const rect = canvas.getBoundingClientRect();
  const at = { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  view.zoomAt(at, ev.deltaY < 0 ? 1.15 : 1 / 1.15);
});

function hoverBeaconId(): string | null {
  if (!pointerScreen) return null;
  const world = view.screenToWorld(pointerScreen);
  let best: string | null = null;
  let bestD = HOVER_RADIUS_M;
  for (const beacon of store.beacons.values()) {
    const d = Math.hypot(world.x - beacon.location[0], world.y - beacon.location[1]);
    if (d <= bestD) {
      best = beacon.id;
      bestD = d;
    }
  }
  return best;
}

// -- service link -----------------------------------------------------------

async function refreshState(): Promise<void> {
  try {
    store.applySnapshot(await client.getState());
  } catch (err) {
    store.toast("error", describe(err));
  }
}

const stream = new EventStream(wsUrl(base), (url) => new WebSocket(url) as unknown as WsLike, {
  onConnect: () => {
    store.connected = true;
    void refreshState(); // full resync: the stream only carries deltas
  },
  onDisconnect: () => {
    store.connected = false;
    if (capture.open) {
      capture.cancel();
      store.toast("error", "connection lost: capture discarded");
    }
  },
  onEvent: (event) => store.applyEvent(event),
});
stream.start();

// -- render loop ------------------------------------------------------------

function resizeCanvas(): void {
  const rect = canvas.getBoundingClientRect();
  if (canvas.width !== rect.width || canvas.height !== rect.height) {
    canvas.width = rect.width;
    canvas.height = rect.height;
    view.resize(rect.width, rect.height);
  }
}

function frame(): void {
  resizeCanvas();
  renderScene(
    draw,
    view,
    store,
    {
      world: pointerScreen ? view.screenToWorld(pointerScreen) : null,
      trail: pointerTrail,
      capturing: capture.open,
    },
    hoverBeaconId(),
  );

  statusEl.textContent = store.connected ? "connected" : "reconnecting…";
  statusEl.className = store.connected ? "ok" : "bad";
  modeEl.textContent = MODE_TITLES[store.mode] ?? store.mode;
  boundsWarnEl.hidden = !capture.outOfBoundsWarning;
  for (const button of modeBar.querySelectorAll("button")) {
    button.classList.toggle(
      "active",
      button.dataset["mode"] === store.mode ||
        (button.dataset["mode"] === "edit_selecting" && store.mode === "edit_placing"),
    );
  }

  toastsEl.replaceChildren(
    ...store.liveToasts().map((t) => {
      const node = document.createElement("div");
      node.className = `toast ${t.kind}`;
      node.textContent = t.message;
      return node;
    }),
  );
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
