import { describe, expect, it } from "vitest";

import { Viewport } from "../src/viewport.js";

function randomIn(lo: number, hi: number): number {
  return lo + Math.random() * (hi - lo);
}

describe("viewport mapping", () => {
  it("screen -> world -> screen round trip stays within 1 px at any zoom", () => {
    const view = new Viewport(800, 600);
    for (let i = 0; i < 500; i++) {
      view.zoomAt({ x: randomIn(0, 800), y: randomIn(0, 600) }, randomIn(0.5, 2.0));
      view.panByScreen(randomIn(-50, 50), randomIn(-50, 50));
      const s = { x: randomIn(0, 800), y: randomIn(0, 600) };
      const back = view.worldToScreen(view.screenToWorld(s));
      expect(Math.abs(back.x - s.x)).toBeLessThan(1);
      expect(Math.abs(back.y - s.y)).toBeLessThan(1);
    }
  });

  it("world y up maps to screen y down", () => {
    const view = new Viewport(400, 400);
    const origin = view.worldToScreen({ x: 0, y: 0 });
    const up = view.worldToScreen({ x: 0, y: 1 });
    expect(up.y).toBeLessThan(origin.y);
    expect(up.x).toBeCloseTo(origin.x, 6);
  });

  it("zooming does not change which world point the cursor is over", () => {
    const view = new Viewport(640, 480);
    const cursor = { x: 123, y: 321 };
    const before = view.screenToWorld(cursor);
    view.zoomAt(cursor, 3.0);
    const after = view.screenToWorld(cursor);
    expect(after.x).toBeCloseTo(before.x, 9);
    expect(after.y).toBeCloseTo(before.y, 9);
  });

  it("a zoomed viewport reports the same world coordinates for a fixed world point", () => {
    const view = new Viewport(640, 480);
    const world = { x: 2.5, y: -1.25 };
    const s1 = view.worldToScreen(world);
    const w1 = view.screenToWorld(s1);
    view.zoomAt({ x: 320, y: 240 }, 2.5);
    const s2 = view.worldToScreen(world);
    const w2 = view.screenToWorld(s2);
    expect(w1.x).toBeCloseTo(world.x, 9);
    expect(w2.x).toBeCloseTo(world.x, 9);
    expect(w1.y).toBeCloseTo(world.y, 9);
    expect(w2.y).toBeCloseTo(world.y, 9);
  });

  it("panning shifts the view by the screen delta", () => {
    const view = new Viewport(640, 480);
    const before = view.screenToWorld({ x: 320, y: 240 });
    view.panByScreen(60, 0); // drag right: world content follows the cursor
    const after = view.screenToWorld({ x: 320 + 60, y: 240 });
    expect(after.x).toBeCloseTo(before.x, 9);
    expect(after.y).toBeCloseTo(before.y, 9);
  });
});
