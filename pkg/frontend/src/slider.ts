/** Swipe-compare math: where to clip the "after" layer, in [0, 1]. */
export function splitFraction(pointerX: number, boxLeft: number, boxWidth: number): number {
  if (boxWidth <= 0) {
    return 0.5;
  }
  const f = (pointerX - boxLeft) / boxWidth;
  return Math.min(Math.max(f, 0), 1);
}

/** Pixel column of the divider for a given fraction. */
export function dividerX(fraction: number, width: number): number {
  return Math.round(Math.min(Math.max(fraction, 0), 1) * width);
}
