// Layered left-to-right placement for transaction DAGs: one column per hop,
// rows sorted by id so the same response always lands on the same pixels.

export interface Point {
  x: number;
  y: number;
}

export interface DagLayoutOptions {
  columnGap: number;
  rowGap: number;
  margin: number;
}

export const DAG_DEFAULTS: DagLayoutOptions = {
  columnGap: 180,
  rowGap: 90,
  margin: 60,
};

export interface DagLayout {
  positions: Map<string, Point>;
  width: number;
  height: number;
}

export function layoutDag(
  nodes: { id: string; hop: number }[],
  opts: DagLayoutOptions = DAG_DEFAULTS,
): DagLayout {
  const byHop = new Map<number, string[]>();
  for (const node of nodes) {
    const column = byHop.get(node.hop);
    if (column) column.push(node.id);
    else byHop.set(node.hop, [node.id]);
  }

  const hops = [...byHop.keys()].sort((a, b) => a - b);
  const tallest = Math.max(1, ...[...byHop.values()].map((c) => c.length));
  const height = 2 * opts.margin + (tallest - 1) * opts.rowGap;

  const positions = new Map<string, Point>();
  hops.forEach((hop, columnIndex) => {
    const column = byHop.get(hop)!;
    column.sort();
    // center shorter columns vertically
    const top = (height - (column.length - 1) * opts.rowGap) / 2;
    column.forEach((id, row) => {
      positions.set(id, {
        x: opts.margin + columnIndex * opts.columnGap,
        y: top + row * opts.rowGap,
      });
    });
  });

  const width = 2 * opts.margin + Math.max(0, hops.length - 1) * opts.columnGap;
  return { positions, width, height };
}
