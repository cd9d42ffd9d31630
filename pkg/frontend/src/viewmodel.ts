// Pure response-to-scene mapping. Every number in a scene is copied or
// scaled from a field of the API response it was built from; nothing is
// computed client-side beyond positions and size encodings. The painter
// draws scenes verbatim, and the tests assert on scenes directly.

import { layoutDag } from './layout/dag.js';
import { layoutForce } from './layout/force.js';
import { colorFor, edgeWidthFor, radiusFor } from './scale.js';
import {
  AccountGraphWire,
  MetricKey,
  MetricsWire,
  TraceWire,
} from './types.js';

export interface NodeVM {
  id: string;
  x: number;
  y: number;
  radius: number;
  shape: 'circle' | 'square';
  color: string;
  // short text drawn under the node
  caption: string;
  // full text for the hover title / details panel
  title: string;
  hop?: number;
  expandable?: boolean;
  metric?: number;
  metrics?: MetricsWire;
  label?: string | null;
  contract?: string | null;
  timestamp?: number;
}

export interface EdgeVM {
  from: string;
  to: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  width: number;
  // the numeric annotation drawn on the edge
  label: string;
  value: number;
  count: number;
  title: string;
}

export interface SceneVM {
  kind: 'dag' | 'accounts';
  nodes: NodeVM[];
  edges: EdgeVM[];
  width: number;
  height: number;
  truncated?: boolean;
}

function shortId(id: string): string {
  return id.length > 10 ? id.slice(0, 10) : id;
}

function isoOf(epoch: number): string {
  return new Date(epoch * 1000).toISOString().replace('.000Z', 'Z');
}

export function dagScene(trace: TraceWire): SceneVM {
  const layout = layoutDag(trace.nodes);
  const frontier = trace.meta.max_hops;

  const nodes: NodeVM[] = trace.nodes.map((n) => {
    const at = layout.positions.get(n.id)!;
    const contract = n.contract ? ` contract=${n.contract}` : '';
    return {
      id: n.id,
      x: at.x,
      y: at.y,
      radius: 16,
      shape: 'circle',
      color: colorFor(n.id),
      caption: shortId(n.id),
      title: `tx ${n.id}\nhop ${n.hop} at ${isoOf(n.timestamp)}${contract}`,
      hop: n.hop,
      expandable: trace.meta.truncated && n.hop === frontier,
      contract: n.contract,
      timestamp: n.timestamp,
    };
  });

  const maxValue = Math.max(0, ...trace.edges.map((e) => e.value));
  const edges: EdgeVM[] = trace.edges.map((e) => {
    const a = layout.positions.get(e.from)!;
    const b = layout.positions.get(e.to)!;
    const ts = e.timestamp === undefined ? '' : ` at ${isoOf(e.timestamp)}`;
    return {
      from: e.from,
      to: e.to,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
      width: edgeWidthFor(e.value, maxValue),
      label: String(e.value),
      value: e.value,
      count: e.count,
      title: `value ${e.value} over ${e.count} spend(s)${ts}`,
    };
  });

  return {
    kind: 'dag',
    nodes,
    edges,
    width: layout.width,
    height: layout.height,
    truncated: trace.meta.truncated,
  };
}

export function accountScene(graph: AccountGraphWire, metric: MetricKey): SceneVM {
  const positions = layoutForce(
    graph.nodes.map((n) => n.id),
    graph.edges,
  );

  const maxMetric = Math.max(0, ...graph.nodes.map((n) => n.metrics[metric]));
  const nodes: NodeVM[] = graph.nodes.map((n) => {
    const at = positions.get(n.id)!;
    const m = n.metrics;
    return {
      id: n.id,
      x: at.x,
      y: at.y,
      radius: radiusFor(m[metric], maxMetric),
      // squares for plain addresses, circles for clustered entities
      shape: n.kind === 'entity' ? 'circle' : 'square',
      color: colorFor(n.id),
      caption: n.label ?? shortId(n.id),
      title:
        `${n.id}\n` +
        `txs ${m.tx_count}, in ${m.total_in_value}, out ${m.total_out_value}, ` +
        `members ${m.member_count}, intra ${m.intra_value}`,
      metric: m[metric],
      metrics: m,
      label: n.label,
    };
  });

  const maxValue = Math.max(0, ...graph.edges.map((e) => e.value));
  const edges: EdgeVM[] = graph.edges.map((e) => {
    const a = positions.get(e.from)!;
    const b = positions.get(e.to)!;
    return {
      from: e.from,
      to: e.to,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
      width: edgeWidthFor(e.value, maxValue),
      label: String(e.value),
      value: e.value,
      count: e.count,
      title: `total ${e.value} over ${e.count} interaction(s)`,
    };
  });

  return { kind: 'accounts', nodes, edges, width: 720, height: 720 };
}
