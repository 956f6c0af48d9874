// Floor-map renderer. Draws through a narrow 2D interface so tests can
// record draw calls without a real canvas.

import type { ViewStore } from "./store.js";
import type { Viewport } from "./viewport.js";
import { quatYaw } from "./protocol.js";

export interface Draw2D {
  clear(width: number, height: number): void;
  line(x1: number, y1: number, x2: number, y2: number, color: string, width: number): void;
  circle(x: number, y: number, r: number, fill: string, alpha?: number): void;
  ring(x: number, y: number, r: number, color: string, width: number): void;
  poly(points: Array<[number, number]>, fill: string, alpha?: number): void;
  text(x: number, y: number, s: string, color: string, size: number): void;
}

export interface PointerView {
  world: { x: number; y: number } | null;
  trail: Array<[number, number]>; // recent world positions
  capturing: boolean;
}

const COLORS = {
  grid: "#2a2f3a",
  gridAxis: "#3d4454",
  label: "#8ab4f8",
  labelPanel: "#1c2633",
  beacon: "#34d399",
  beaconTaken: "#fbbf24",
  beaconArrow: "#a7f3d0",
  ghost: "#67e8f9",
  robot: "#f87171",
  robotStale: "#6b7280",
  trail: "#7f1d1d",
  pointer: "#e5e7eb",
  goal: "#fde047",
};

export function renderScene(
  draw: Draw2D,
  view: Viewport,
  store: ViewStore,
  pointer: PointerView,
  hoverBeaconId: string | null,
): void {
  draw.clear(view.width, view.height);
  drawGrid(draw, view);

  for (const label of store.labels.values()) {
    const s = view.worldToScreen({ x: label.location[0], y: label.location[1] });
    draw.circle(s.x, s.y, 4, COLORS.label);
    const panelY = s.y - 18;
    draw.line(s.x, s.y, s.x, panelY + 6, COLORS.label, 1);
    draw.text(s.x + 6, panelY, label.name, COLORS.label, 12);
  }

  if (store.goal) {
    const s = view.worldToScreen({ x: store.goal.position[0], y: store.goal.position[1] });
    draw.ring(s.x, s.y, 12, COLORS.goal, 2);
    if (store.robot?.arrived) {
      draw.text(s.x + 10, s.y - 10, "arrived", COLORS.goal, 12);
    }
  }

  for (const beacon of store.beacons.values()) {
    const s = view.worldToScreen({ x: beacon.location[0], y: beacon.location[1] });
    const taken = beacon.id === store.takenBeaconId;
    const color = taken ? COLORS.beaconTaken : COLORS.beacon;
    draw.circle(s.x, s.y, 7, color, taken ? 0.6 : 1.0);
    if (beacon.id === hoverBeaconId) draw.ring(s.x, s.y, 11, color, 2);
    const yaw = quatYaw(beacon.rotation);
    // facing arrow: world yaw, screen y flipped
    const ax = s.x + Math.cos(yaw) * 16;
    const ay = s.y - Math.sin(yaw) * 16;
    draw.line(s.x, s.y, ax, ay, COLORS.beaconArrow, 2);
  }

  if (store.robot) {
    const stale = store.robotStale();
    const color = stale ? COLORS.robotStale : COLORS.robot;
    if (store.robot.trail.length > 1 && !stale) {
      for (let i = 1; i < store.robot.trail.length; i++) {
        const a = store.robot.trail[i - 1]!;
        const b = store.robot.trail[i]!;
        const sa = view.worldToScreen({ x: a[0], y: a[1] });
        const sb = view.worldToScreen({ x: b[0], y: b[1] });
        draw.line(sa.x, sa.y, sb.x, sb.y, COLORS.trail, 1);
      }
    }
    const pos = view.worldToScreen({ x: store.robot.position[0], y: store.robot.position[1] });
    const yaw = quatYaw(store.robot.yawQuat);
    draw.poly(robotTriangle(pos.x, pos.y, yaw), color, stale ? 0.5 : 1.0);
  }

  if (pointer.trail.length > 1) {
    for (let i = 1; i < pointer.trail.length; i++) {
      const a = pointer.trail[i - 1]!;
      const b = pointer.trail[i]!;
      const sa = view.worldToScreen({ x: a[0], y: a[1] });
      const sb = view.worldToScreen({ x: b[0], y: b[1] });
      draw.line(sa.x, sa.y, sb.x, sb.y, COLORS.pointer, 1);
    }
  }
  if (pointer.world) {
    const s = view.worldToScreen(pointer.world);
    if (pointer.capturing) {
      // semi-transparent candidate beacon riding the pointer
      draw.circle(s.x, s.y, 7, COLORS.ghost, 0.35);
      draw.ring(s.x, s.y, 10, COLORS.ghost, 1);
    } else {
      draw.circle(s.x, s.y, 2.5, COLORS.pointer);
    }
  }
}

function drawGrid(draw: Draw2D, view: Viewport): void {
  const topLeft = view.screenToWorld({ x: 0, y: 0 });
  const bottomRight = view.screenToWorld({ x: view.width, y: view.height });
  const step = gridStep(view.metersPerPixel());
  const x0 = Math.floor(topLeft.x / step) * step;
  const y0 = Math.floor(bottomRight.y / step) * step;
  for (let x = x0; x <= bottomRight.x; x += step) {
    const s = view.worldToScreen({ x, y: 0 });
    draw.line(s.x, 0, s.x, view.height, Math.abs(x) < 1e-9 ? COLORS.gridAxis : COLORS.grid, 1);
  }
  for (let y = y0; y <= topLeft.y; y += step) {
    const s = view.worldToScreen({ x: 0, y });
    draw.line(0, s.y, view.width, s.y, Math.abs(y) < 1e-9 ? COLORS.gridAxis : COLORS.grid, 1);
  }
}

function gridStep(metersPerPixel: number): number {
  const target = metersPerPixel * 80; // roughly every 80 px
  const pow = Math.pow(10, Math.floor(Math.log10(target)));
  for (const m of [1, 2, 5, 10]) {
    if (pow * m >= target) return pow * m;
  }
  return pow * 10;
}

function robotTriangle(x: number, y: number, yaw: number): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  for (const [dx, dy] of [
    [14, 0],
    [-8, 8],
    [-8, -8],
  ] as Array<[number, number]>) {
    const wx = dx * Math.cos(yaw) - dy * Math.sin(yaw);
    const wy = dx * Math.sin(yaw) + dy * Math.cos(yaw);
    pts.push([x + wx, y - wy]); // screen y points down
  }
  return pts;
}

export function canvasDraw(ctx: CanvasRenderingContext2D): Draw2D {
  return {
    clear(width, height) {
      ctx.fillStyle = "#11151c";
      ctx.fillRect(0, 0, width, height);
    },
    line(x1, y1, x2, y2, color, width) {
      ctx.strokeStyle = color;
      ctx.lineWidth = width;
      ctx.beginPath();
      ctx.moveTo(x1, y1);
      ctx.lineTo(x2, y2);
      ctx.stroke();
    },
    circle(x, y, r, fill, alpha = 1) {
      ctx.globalAlpha = alpha;
      ctx.fillStyle = fill;
      ctx.beginPath();
      ctx.arc(x, y, r, 0, Math.PI * 2);
      ctx.fill();
      ctx.globalAlpha = 1;
    },
    ring(x, y, r, color, width) {
      ctx.strokeStyle = color;
      ctx.lineWidth = width;
      ctx.beginPath();
      ctx.arc(x, y, r, 0, Math.PI * 2);
      ctx.stroke();
    },
    poly(points, fill, alpha = 1) {
      if (points.length === 0) return;
      ctx.globalAlpha = alpha;
      ctx.fillStyle = fill;
      ctx.beginPath();
      ctx.moveTo(points[0]![0], points[0]![1]);
      for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
      ctx.closePath();
      ctx.fill();
      ctx.globalAlpha = 1;
    },
    text(x, y, s, color, size) {
      ctx.fillStyle = color;
      ctx.font = `${size}px system-ui, sans-serif`;
      ctx.fillText(s, x, y);
    },
  };
}
