import { encodeGrayPng } from "./png.js";
import type { BrushState, Point } from "./types.js";

/** Painted selection layer, one gray byte per source pixel (255 = reflection).
 *
 * Kept at exactly the source dimensions; nothing here ever rescales.
 */
export class MaskLayer {
  readonly width: number;
  readonly height: number;
  readonly gray: Uint8Array;
  private strokes = 0;

  constructor(width: number, height: number) {
    if (width < 1 || height < 1) {
      throw new Error(`mask needs positive dims, got ${width}x${height}`);
    }
    this.width = width;
    this.height = height;
    this.gray = new Uint8Array(width * height);
  }

  /** True until the first stroke after construction or clear(). */
  get untouched(): boolean {
    return this.strokes === 0;
  }

  clear(): void {
    this.gray.fill(0);
    this.strokes = 0;
  }

  fill(intensity: number): void {
    this.gray.fill(MaskLayer.quantize(intensity));
    this.strokes++;
  }

  static quantize(intensity: number): number {
    const v = Math.round(Math.min(Math.max(intensity, 0), 1) * 255);
    return Math.min(Math.max(v, 0), 255);
  }

  stampDisk(cx: number, cy: number, radius: number, value: number): void {
    const r = Math.max(1, radius);
    const r2 = r * r;
    const x0 = Math.max(0, Math.floor(cx - r));
    const x1 = Math.min(this.width - 1, Math.ceil(cx + r));
    const y0 = Math.max(0, Math.floor(cy - r));
    const y1 = Math.min(this.height - 1, Math.ceil(cy + r));
    for (let y = y0; y <= y1; y++) {
      const dy = y - cy;
      for (let x = x0; x <= x1; x++) {
        const dx = x - cx;
        if (dx * dx + dy * dy <= r2) {
          this.gray[y * this.width + x] = value;
        }
      }
    }
  }

  /** Stamp disks along the polyline so fast strokes stay gap-free. */
  stroke(path: Point[], brush: BrushState): void {
    if (path.length === 0) {
      return;
    }
    const value = brush.mode === "erase" ? 0 : MaskLayer.quantize(brush.intensity);
    this.strokes++;
    let prev = path[0];
    this.stampDisk(prev.x, prev.y, brush.radius, value);
    for (let i = 1; i < path.length; i++) {
      const next = path[i];
      const dist = Math.hypot(next.x - prev.x, next.y - prev.y);
      const steps = Math.max(1, Math.ceil(dist));
      for (let s = 1; s <= steps; s++) {
        const t = s / steps;
        this.stampDisk(
          prev.x + (next.x - prev.x) * t,
          prev.y + (next.y - prev.y) * t,
          brush.radius,
          value,
        );
      }
      prev = next;
    }
  }

  /** Grayscale PNG at source dims; the service reads white as selected. */
  exportPng(): Promise<Uint8Array> {
    return encodeGrayPng(this.width, this.height, this.gray);
  }
}
