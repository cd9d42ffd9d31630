// Size encodings. Radius keeps area roughly proportional to the metric
// (square root), hard-clamped to [6, 48] px so a single whale cannot blow
// the layout apart and a zero-metric node stays clickable.

export const MIN_RADIUS = 6;
export const MAX_RADIUS = 48;

export const MIN_EDGE_WIDTH = 1;
export const MAX_EDGE_WIDTH = 10;

export function radiusFor(metric: number, maxMetric: number): number {
  if (maxMetric <= 0 || metric <= 0) return MIN_RADIUS;
  const t = Math.sqrt(metric / maxMetric);
  const r = MIN_RADIUS + (MAX_RADIUS - MIN_RADIUS) * t;
  return Math.min(MAX_RADIUS, Math.max(MIN_RADIUS, r));
}

export function edgeWidthFor(value: number, maxValue: number): number {
  if (maxValue <= 0 || value <= 0) return MIN_EDGE_WIDTH;
  const t = Math.sqrt(value / maxValue);
  const w = MIN_EDGE_WIDTH + (MAX_EDGE_WIDTH - MIN_EDGE_WIDTH) * t;
  return Math.min(MAX_EDGE_WIDTH, Math.max(MIN_EDGE_WIDTH, w));
}

// Stable hue per id. The graph endpoints do not say which channel a node
// lives on, so color is keyed by the id itself; equal ids always get equal
// colors across views and reloads.
export function colorFor(id: string): string {
  let hash = 0;
  for (let i = 0; i < id.length; i++) {
    hash = (hash * 31 + id.charCodeAt(i)) | 0;
  }
  const hue = ((hash % 360) + 360) % 360;
  return `hsl(${hue}, 62%, 46%)`;
}
