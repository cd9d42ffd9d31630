import {
  AccountGraphWire,
  Direction,
  ErrorEnvelope,
  Granularity,
  isAccountGraph,
  isErrorEnvelope,
  isTrace,
  LabelRecordWire,
  TraceWire,
} from './types.js';

// Narrow view of fetch so tests can hand in a replay double.
export interface HttpResponseLike {
  status: number;
  text(): Promise<string>;
}

export type HttpLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<HttpResponseLike>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

// Raised when a 2xx body fails its shape guard; callers treat it like any
// other request failure (banner up, previous view kept).
export class SchemaMismatch extends Error {
  constructor(url: string) {
    super(`response from ${url} does not match the expected shape`);
  }
}

export interface RuleDraft {
  kind: 'merge' | 'isolate' | 'heuristic';
  addresses?: string[];
  address?: string;
  name?: string;
  enabled?: boolean;
}

export interface ClusterSummary {
  id: string;
  label: string | null;
  member_count: number;
  members: string[];
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly http: HttpLike,
  ) {}

  private async request(url: string, init?: Parameters<HttpLike>[1]): Promise<unknown> {
    const resp = await this.http(this.base + url, init);
    const body = await resp.text();
    let parsed: unknown;
    try {
      parsed = JSON.parse(body);
    } catch {
      throw new ApiError(resp.status, 'bad_response', 'response body is not JSON');
    }
    if (resp.status >= 400) {
      const env: ErrorEnvelope = isErrorEnvelope(parsed)
        ? parsed
        : { error: 'http_error', detail: `status ${resp.status}` };
      throw new ApiError(resp.status, env.error, env.detail);
    }
    return parsed;
  }

  private post(url: string, payload?: unknown): Promise<unknown> {
    return this.request(url, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
  }

  async trace(tx: string, dir: Direction, hops: number): Promise<TraceWire> {
    const url = `/v1/trace?tx=${encodeURIComponent(tx)}&dir=${dir}&hops=${hops}`;
    const body = await this.request(url);
    if (!isTrace(body)) throw new SchemaMismatch(url);
    return body;
  }

  async accountGraph(
    start: number,
    end: number,
    granularity: Granularity,
    clusteringVersion?: number,
  ): Promise<AccountGraphWire> {
    let url = `/v1/graph/accounts?start=${start}&end=${end}&granularity=${granularity}`;
    if (clusteringVersion !== undefined) url += `&clustering_version=${clusteringVersion}`;
    const body = await this.request(url);
    if (!isAccountGraph(body)) throw new SchemaMismatch(url);
    return body;
  }

  async status(): Promise<Record<string, unknown>> {
    return (await this.request('/v1/status')) as Record<string, unknown>;
  }

  async submitLabel(target: string, label: string): Promise<LabelRecordWire> {
    const body = (await this.post('/v1/labels', { target, label })) as {
      applied: LabelRecordWire;
    };
    return body.applied;
  }

  async submitRules(rules: RuleDraft[]): Promise<unknown> {
    return this.post('/v1/clustering/rules', { rules });
  }

  async rebuild(): Promise<unknown> {
    return this.post('/v1/clustering/rebuild');
  }

  async clusterMembers(version: number | null = null): Promise<ClusterSummary[]> {
    const which = version === null ? 'current' : String(version);
    const body = (await this.request(`/v1/clustering/${which}`)) as {
      clustering: { clusters?: ClusterSummary[] };
    };
    return body.clustering.clusters ?? [];
  }
}
