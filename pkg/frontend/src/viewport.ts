// World <-> screen mapping for the floor map.
// World is meters, +x right, +y up; screen is CSS pixels, +y down.

export interface ScreenPoint {
  x: number;
  y: number;
}

export interface WorldPoint {
  x: number;
  y: number;
}

export class Viewport {
  private centerX = 0; // world point shown at the canvas center
  private centerY = 0;
  private _scale: number; // pixels per meter

  constructor(
    public width: number,
    public height: number,
    scale = 60,
  ) {
    this._scale = scale;
  }

  get scale(): number {
    return this._scale;
  }

  resize(width: number, height: number): void {
    this.width = width;
    this.height = height;
  }

  worldToScreen(p: WorldPoint): ScreenPoint {
    return {
      x: this.width / 2 + (p.x - this.centerX) * this._scale,
      y: this.height / 2 - (p.y - this.centerY) * this._scale,
    };
  }

  screenToWorld(p: ScreenPoint): WorldPoint {
    return {
      x: this.centerX + (p.x - this.width / 2) / this._scale,
      y: this.centerY - (p.y - this.height / 2) / this._scale,
    };
  }

  panByScreen(dx: number, dy: number): void {
    this.centerX -= dx / this._scale;
    this.centerY += dy / this._scale;
  }

  // zoom keeping the world point under `at` fixed on screen
  zoomAt(at: ScreenPoint, factor: number): void {
    const anchor = this.screenToWorld(at);
    this._scale = Math.min(2000, Math.max(5, this._scale * factor));
    const after = this.screenToWorld(at);
    this.centerX += anchor.x - after.x;
    this.centerY += anchor.y - after.y;
  }

  metersPerPixel(): number {
    return 1 / this._scale;
  }
}
