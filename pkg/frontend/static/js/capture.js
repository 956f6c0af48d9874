// Capture lifecycle: while an utterance is open the pointer is sampled at
// 10 Hz into a window that is POSTed as one batch when the utterance ends.
export const SAMPLE_PERIOD_MS = 100;
const realTimer = {
    setInterval: (fn, ms) => setInterval(fn, ms),
    clearInterval: (id) => clearInterval(id),
};
export class CaptureSession {
    pointerWorld;
    bounds;
    timer;
    samples = [];
    timerId = null;
    tick = 0;
    outOfBoundsWarning = false;
    constructor(pointerWorld, bounds = null, timer = realTimer) {
        this.pointerWorld = pointerWorld;
        this.bounds = bounds;
        this.timer = timer;
    }
    get open() {
        return this.timerId !== null;
    }
    get sampleCount() {
        return this.samples.length;
    }
    begin() {
        if (this.timerId !== null)
            return;
        this.samples = [];
        this.tick = 0;
        this.outOfBoundsWarning = false;
        this.sampleOnce();
        this.timerId = this.timer.setInterval(() => this.sampleOnce(), SAMPLE_PERIOD_MS);
    }
    sampleOnce() {
        const t = this.tick * (SAMPLE_PERIOD_MS / 1000);
        this.tick += 1;
        const p = this.pointerWorld();
        if (p === null)
            return; // pointer not over the map: nothing to record
        if (this.bounds && !inBounds(p, this.bounds)) {
            this.outOfBoundsWarning = true; // clamped off, not sent
            return;
        }
        this.samples.push([t, p.x, p.y]);
    }
    end(text) {
        this.stop();
        return { text, pointer: this.samples };
    }
    cancel() {
        this.stop();
        this.samples = [];
    }
    stop() {
        if (this.timerId !== null) {
            this.timer.clearInterval(this.timerId);
            this.timerId = null;
        }
    }
}
function inBounds(p, b) {
    return p.x >= b.minX && p.x <= b.maxX && p.y >= b.minY && p.y <= b.maxY;
}
//# sourceMappingURL=capture.js.map