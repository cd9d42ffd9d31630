// Small force-directed layout with no randomness anywhere: nodes start on a
// circle in id order and relax for a fixed number of rounds, so one response
// always produces one layout. Good enough for the node counts a windowed
// account graph serves; not meant for thousands of nodes.

import { Point } from './dag.js';

export interface ForceLayoutOptions {
  iterations: number;
  size: number;
  padding: number;
}

export const FORCE_DEFAULTS: ForceLayoutOptions = {
  iterations: 160,
  size: 720,
  padding: 60,
};

export function layoutForce(
  nodeIds: string[],
  edges: { from: string; to: string }[],
  opts: ForceLayoutOptions = FORCE_DEFAULTS,
): Map<string, Point> {
  const ids = [...nodeIds].sort();
  const n = ids.length;
  const positions = new Map<string, Point>();
  if (n === 0) return positions;

  const center = opts.size / 2;
  const ring = center - opts.padding;
  ids.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / n;
    positions.set(id, {
      x: center + ring * Math.cos(angle),
      y: center + ring * Math.sin(angle),
    });
  });
  if (n === 1) {
    positions.set(ids[0]!, { x: center, y: center });
    return positions;
  }

  const index = new Map(ids.map((id, i) => [id, i]));
  const xs = ids.map((id) => positions.get(id)!.x);
  const ys = ids.map((id) => positions.get(id)!.y);
  const springs: [number, number][] = [];
  for (const e of edges) {
    const a = index.get(e.from);
    const b = index.get(e.to);
    if (a !== undefined && b !== undefined && a !== b) springs.push([a, b]);
  }

  const ideal = Math.sqrt((opts.size * opts.size) / n) * 0.9;
  let heat = opts.size / 12;
  const cool = heat / (opts.iterations + 1);

  for (let round = 0; round < opts.iterations; round++) {
    const dx = new Array<number>(n).fill(0);
    const dy = new Array<number>(n).fill(0);

    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let vx = xs[i]! - xs[j]!;
        let vy = ys[i]! - ys[j]!;
        let d2 = vx * vx + vy * vy;
        if (d2 === 0) {
          // coincident nodes: deterministic nudge along the index axis
          vx = (i - j) * 0.01;
          vy = 0.01;
          d2 = vx * vx + vy * vy;
        }
        const push = (ideal * ideal) / d2;
        dx[i]! += vx * push;
        dy[i]! += vy * push;
        dx[j]! -= vx * push;
        dy[j]! -= vy * push;
      }
    }

    for (const [a, b] of springs) {
      const vx = xs[a]! - xs[b]!;
      const vy = ys[a]! - ys[b]!;
      const d = Math.sqrt(vx * vx + vy * vy) || 0.01;
      const pull = (d * d) / ideal / d;
      dx[a]! -= vx * pull;
      dy[a]! -= vy * pull;
      dx[b]! += vx * pull;
      dy[b]! += vy * pull;
    }

    for (let i = 0; i < n; i++) {
      const d = Math.sqrt(dx[i]! * dx[i]! + dy[i]! * dy[i]!) || 1;
      const step = Math.min(d, heat);
      xs[i]! += (dx[i]! / d) * step;
      ys[i]! += (dy[i]! / d) * step;
      xs[i] = Math.max(opts.padding, Math.min(opts.size - opts.padding, xs[i]!));
      ys[i] = Math.max(opts.padding, Math.min(opts.size - opts.padding, ys[i]!));
    }
    heat -= cool;
  }

  ids.forEach((id, i) => positions.set(id, { x: xs[i]!, y: ys[i]! }));
  return positions;
}
