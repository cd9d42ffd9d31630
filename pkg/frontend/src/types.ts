// Wire shapes of the /v1 API, plus the runtime guards the views use to
// reject a response that does not match before anything is rendered.

export interface TraceNodeWire {
  id: string;
  kind: string;
  hop: number;
  timestamp: number;
  contract: string | null;
}

export interface EdgeWire {
  from: string;
  to: string;
  value: number;
  count: number;
  timestamp?: number;
}

export interface TraceMetaWire {
  snapshot_id: number;
  truncated: boolean;
  origin: string;
  direction: string;
  max_hops: number;
}

export interface TraceWire {
  kind: 'transaction_dag';
  nodes: TraceNodeWire[];
  edges: EdgeWire[];
  meta: TraceMetaWire;
}

export interface MetricsWire {
  tx_count: number;
  total_in_value: number;
  total_out_value: number;
  member_count: number;
  intra_value: number;
}

export interface AccountNodeWire {
  id: string;
  kind: 'address' | 'entity';
  label: string | null;
  metrics: MetricsWire;
}

export interface AccountGraphMetaWire {
  snapshot_id: number;
  clustering_version: number | null;
  window: { start: number; end: number };
  granularity: string;
}

export interface AccountGraphWire {
  kind: 'account_graph';
  nodes: AccountNodeWire[];
  edges: EdgeWire[];
  meta: AccountGraphMetaWire;
}

export interface ErrorEnvelope {
  error: string;
  detail: string;
}

export interface LabelRecordWire {
  target: string;
  label: string;
  source: string;
  applied_at: number;
}

export type Granularity = 'address' | 'entity';
export type Direction = 'forward' | 'backward' | 'both';

export type MetricKey = keyof MetricsWire;

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === 'object' && v !== null && !Array.isArray(v);
}

function isEdge(v: unknown): v is EdgeWire {
  return (
    isRecord(v) &&
    typeof v.from === 'string' &&
    typeof v.to === 'string' &&
    typeof v.value === 'number' &&
    typeof v.count === 'number'
  );
}

export function isErrorEnvelope(v: unknown): v is ErrorEnvelope {
  return isRecord(v) && typeof v.error === 'string' && typeof v.detail === 'string';
}

export function isTrace(v: unknown): v is TraceWire {
  if (!isRecord(v) || v.kind !== 'transaction_dag') return false;
  if (!Array.isArray(v.nodes) || !Array.isArray(v.edges)) return false;
  if (!isRecord(v.meta) || typeof v.meta.truncated !== 'boolean') return false;
  if (typeof v.meta.max_hops !== 'number' || typeof v.meta.origin !== 'string') return false;
  return (
    v.nodes.every(
      (n: unknown) => isRecord(n) && typeof n.id === 'string' && typeof n.hop === 'number',
    ) && v.edges.every(isEdge)
  );
}

export function isAccountGraph(v: unknown): v is AccountGraphWire {
  if (!isRecord(v) || v.kind !== 'account_graph') return false;
  if (!Array.isArray(v.nodes) || !Array.isArray(v.edges)) return false;
  if (!isRecord(v.meta) || !isRecord(v.meta.window)) return false;
  const nodesOk = v.nodes.every((n: unknown) => {
    if (!isRecord(n) || typeof n.id !== 'string' || !isRecord(n.metrics)) return false;
    const m = n.metrics;
    return (
      typeof m.tx_count === 'number' &&
      typeof m.total_in_value === 'number' &&
      typeof m.total_out_value === 'number' &&
      typeof m.member_count === 'number' &&
      typeof m.intra_value === 'number'
    );
  });
  return nodesOk && v.edges.every(isEdge);
}
