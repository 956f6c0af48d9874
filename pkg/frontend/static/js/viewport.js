// World <-> screen mapping for the floor map.
// World is meters, +x right, +y up; screen is CSS pixels, +y down.
export class Viewport {
    width;
    height;
    centerX = 0; // world point shown at the canvas center
    centerY = 0;
    _scale; // pixels per meter
    constructor(width, height, scale = 60) {
        this.width = width;
        this.height = height;
        this._scale = scale;
    }
    get scale() {
        return this._scale;
    }
    resize(width, height) {
        this.width = width;
        this.height = height;
    }
    worldToScreen(p) {
        return {
            x: this.width / 2 + (p.x - this.centerX) * this._scale,
            y: this.height / 2 - (p.y - this.centerY) * this._scale,
        };
    }
    screenToWorld(p) {
        return {
            x: this.centerX + (p.x - this.width / 2) / this._scale,
            y: this.centerY - (p.y - this.height / 2) / this._scale,
        };
    }
    panByScreen(dx, dy) {
        this.centerX -= dx / this._scale;
        this.centerY += dy / this._scale;
    }
    // zoom keeping the world point under `at` fixed on screen
    zoomAt(at, factor) {
        const anchor = this.screenToWorld(at);
        this._scale = Math.min(2000, Math.max(5, this._scale * factor));
        const after = this.screenToWorld(at);
        this.centerX += anchor.x - after.x;
        this.centerY += anchor.y - after.y;
    }
    metersPerPixel() {
        return 1 / this._scale;
    }
}
//# sourceMappingURL=viewport.js.map