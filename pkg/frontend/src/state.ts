// View state and request sequencing. One controller instance owns what is
// on screen: which view, which query produced it, and the draft annotations.
// Every mutation goes through the API and is followed by a re-fetch of the
// current view, so the screen never shows anything the server did not say.

import { ApiClient, RuleDraft } from './api.js';
import { accountScene, dagScene, SceneVM } from './viewmodel.js';
import {
  AccountGraphWire,
  Direction,
  Granularity,
  MetricKey,
  TraceWire,
} from './types.js';

export type ViewKind = 'dag' | 'accounts';

export interface ViewState {
  active: ViewKind;
  originTx: string | null;
  hops: number;
  direction: Direction;
  windowStart: number;
  windowEnd: number;
  granularity: Granularity;
  metric: MetricKey;
  selection: string | null;
}

export interface ExplorerCallbacks {
  onRender: (scene: SceneVM, state: ViewState) => void;
  onError: (message: string) => void;
  onNotice?: (message: string) => void;
}

export class Explorer {
  readonly state: ViewState = {
    active: 'dag',
    originTx: null,
    hops: 1,
    direction: 'both',
    windowStart: 0,
    windowEnd: 0,
    granularity: 'address',
    metric: 'member_count',
    selection: null,
  };

  lastScene: SceneVM | null = null;
  lastTrace: TraceWire | null = null;
  lastGraph: AccountGraphWire | null = null;

  // one ticket counter per view: a response only renders if it is still the
  // newest request for that view when it lands
  private tickets: Record<ViewKind, number> = { dag: 0, accounts: 0 };

  constructor(
    private readonly api: ApiClient,
    private readonly callbacks: ExplorerCallbacks,
  ) {}

  private render(scene: SceneVM): void {
    this.lastScene = scene;
    this.callbacks.onRender(scene, this.state);
  }

  private fail(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.callbacks.onError(message);
  }

  async showDag(origin: string, hops: number, direction: Direction): Promise<void> {
    if (!Number.isInteger(hops) || hops < 0) {
      this.callbacks.onError('hops must be a whole number of at least 0');
      return;
    }
    const ticket = ++this.tickets.dag;
    try {
      const trace = await this.api.trace(origin, direction, hops);
      if (ticket !== this.tickets.dag) return;
      this.lastTrace = trace;
      this.state.active = 'dag';
      this.state.originTx = origin;
      this.state.hops = hops;
      this.state.direction = direction;
      this.render(dagScene(trace));
    } catch (err) {
      if (ticket !== this.tickets.dag) return;
      this.fail(err);
    }
  }

  // one re-query at hops+1; the server decides what the bigger subgraph is
  async expandFrontier(): Promise<void> {
    if (this.state.active !== 'dag' || this.state.originTx === null) return;
    await this.showDag(this.state.originTx, this.state.hops + 1, this.state.direction);
  }

  async showAccounts(
    start: number,
    end: number,
    granularity: Granularity,
  ): Promise<void> {
    const ticket = ++this.tickets.accounts;
    try {
      const graph = await this.api.accountGraph(start, end, granularity);
      if (ticket !== this.tickets.accounts) return;
      this.lastGraph = graph;
      this.state.active = 'accounts';
      this.state.windowStart = start;
      this.state.windowEnd = end;
      this.state.granularity = granularity;
      this.render(accountScene(graph, this.state.metric));
    } catch (err) {
      if (ticket !== this.tickets.accounts) return;
      this.fail(err);
    }
  }

  async setGranularity(granularity: Granularity): Promise<void> {
    await this.showAccounts(this.state.windowStart, this.state.windowEnd, granularity);
  }

  // pure re-encoding of the response already on screen, no request
  setMetric(metric: MetricKey): void {
    this.state.metric = metric;
    if (this.state.active === 'accounts' && this.lastGraph) {
      this.render(accountScene(this.lastGraph, metric));
    }
  }

  select(id: string | null): void {
    this.state.selection = id;
  }

  async refresh(): Promise<void> {
    if (this.state.active === 'dag' && this.state.originTx !== null) {
      await this.showDag(this.state.originTx, this.state.hops, this.state.direction);
    } else if (this.state.active === 'accounts') {
      await this.showAccounts(
        this.state.windowStart,
        this.state.windowEnd,
        this.state.granularity,
      );
    }
  }

  async submitLabel(target: string, label: string): Promise<boolean> {
    try {
      await this.api.submitLabel(target, label);
    } catch (err) {
      this.fail(err);
      return false;
    }
    this.callbacks.onNotice?.(`labeled ${target}`);
    await this.refresh();
    return true;
  }

  async submitMergeRule(addresses: string[]): Promise<boolean> {
    try {
      await this.api.submitRules([{ kind: 'merge', addresses }]);
    } catch (err) {
      this.fail(err);
      return false;
    }
    this.callbacks.onNotice?.(`merge rule staged for ${addresses.length} addresses`);
    return true;
  }

  async rebuildClusters(): Promise<boolean> {
    try {
      await this.api.rebuild();
    } catch (err) {
      this.fail(err);
      return false;
    }
    this.callbacks.onNotice?.('clustering rebuilt');
    await this.refresh();
    return true;
  }
}
