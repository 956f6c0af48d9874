// Capture lifecycle: while an utterance is open the pointer is sampled at
// 10 Hz into a window that is POSTed as one batch when the utterance ends.

import type { CapturePayload } from "./protocol.js";

export const SAMPLE_PERIOD_MS = 100;

export interface FloorBounds {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
}

export interface CaptureTimer {
  setInterval(fn: () => void, ms: number): number;
  clearInterval(id: number): void;
}

const realTimer: CaptureTimer = {
  setInterval: (fn, ms) => setInterval(fn, ms) as unknown as number,
  clearInterval: (id) => clearInterval(id),
};

export class CaptureSession {
  private samples: Array<[number, number, number]> = [];
  private timerId: number | null = null;
  private tick = 0;
  outOfBoundsWarning = false;

  constructor(
    private pointerWorld: () => { x: number; y: number } | null,
    private bounds: FloorBounds | null = null,
    private timer: CaptureTimer = realTimer,
  ) {}

  get open(): boolean {
    return this.timerId !== null;
  }

  get sampleCount(): number {
    return this.samples.length;
  }

  begin(): void {
    if (this.timerId !== null) return;
    this.samples = [];
    this.tick = 0;
    this.outOfBoundsWarning = false;
    this.sampleOnce();
    this.timerId = this.timer.setInterval(() => this.sampleOnce(), SAMPLE_PERIOD_MS);
  }

  private sampleOnce(): void {
    const t = this.tick * (SAMPLE_PERIOD_MS / 1000);
    this.tick += 1;
    const p = this.pointerWorld();
    if (p === null) return; // pointer not over the map: nothing to record
    if (this.bounds && !inBounds(p, this.bounds)) {
      this.outOfBoundsWarning = true; // clamped off, not sent
      return;
    }
    this.samples.push([t, p.x, p.y]);
  }

  end(text: string): CapturePayload {
    this.stop();
    return { text, pointer: this.samples };
  }

  cancel(): void {
    this.stop();
    this.samples = [];
  }

  private stop(): void {
    if (this.timerId !== null) {
      this.timer.clearInterval(this.timerId);
      this.timerId = null;
    }
  }
}

function inBounds(p: { x: number; y: number }, b: FloorBounds): boolean {
  return p.x >= b.minX && p.x <= b.maxX && p.y >= b.minY && p.y <= b.maxY;
}
