import { describe, expect, it } from 'vitest';
import { ApiClient, HttpResponseLike } from '../src/api.js';
import { Explorer } from '../src/state.js';
import { SceneVM } from '../src/viewmodel.js';
import { harness, lastOf } from './helpers.js';
import { loadBundle } from './replay.js';

const bundle = loadBundle();

function jsonResponse(status: number, body: unknown): HttpResponseLike {
  return { status, text: () => Promise.resolve(JSON.stringify(body)) };
}

describe('dag view state', () => {
  it('renders a zero hop trace as a lone expandable origin', async () => {
    const { explorer, scenes } = harness(bundle);
    await explorer.showDag(bundle.fan.origin, 0, 'both');
    const scene = lastOf(scenes);
    expect(scene.nodes).toHaveLength(1);
    expect(scene.edges).toHaveLength(0);
    expect(scene.nodes[0]!.expandable).toBe(true);
  });

  it('keeps the previous scene when a trace fails', async () => {
    const { explorer, scenes, errors } = harness(bundle);
    await explorer.showDag(bundle.fan.origin, 1, 'both');
    const before = lastOf(scenes);

    await explorer.showDag('f'.repeat(64), 1, 'both');
    expect(errors).toHaveLength(1);
    expect(errors[0]).toContain('not found');
    expect(lastOf(scenes)).toBe(before);
    expect(explorer.state.originTx).toBe(bundle.fan.origin);
  });

  it('rejects bad hop counts before any request goes out', async () => {
    const { explorer, errors, server } = harness(bundle);
    await explorer.showDag(bundle.fan.origin, -1, 'both');
    await explorer.showDag(bundle.fan.origin, 1.5, 'both');
    expect(errors).toHaveLength(2);
    expect(server.hitCount('/v1/trace')).toBe(0);
  });
});

describe('request sequencing', () => {
  it('discards a stale response that lands after a newer one', async () => {
    let releaseSlow: (resp: HttpResponseLike) => void = () => {};
    const slow = new Promise<HttpResponseLike>((resolve) => {
      releaseSlow = resolve;
    });
    const k1 = bundle.fan.trace_k1;
    const k2 = bundle.fan.trace_k2;
    const http = (url: string): Promise<HttpResponseLike> => {
      if (url === k1.url) return slow;
      if (url === k2.url) return Promise.resolve(jsonResponse(200, k2.body));
      throw new Error(`unexpected request ${url}`);
    };

    const scenes: SceneVM[] = [];
    const errors: string[] = [];
    const explorer = new Explorer(new ApiClient('', http), {
      onRender: (scene) => scenes.push(scene),
      onError: (message) => errors.push(message),
    });

    const older = explorer.showDag(bundle.fan.origin, 1, 'both');
    const newer = explorer.showDag(bundle.fan.origin, 2, 'both');
    await newer;
    releaseSlow(jsonResponse(200, k1.body));
    await older;

    // only the newer response rendered; the late one was dropped silently
    expect(scenes).toHaveLength(1);
    expect(scenes[0]!.nodes).toHaveLength(k2.body.nodes.length);
    expect(errors).toEqual([]);
    expect(explorer.state.hops).toBe(2);
  });

  it('treats a malformed 200 body as a failure and keeps the view', async () => {
    const k1 = bundle.fan.trace_k1;
    let calls = 0;
    const http = (url: string): Promise<HttpResponseLike> => {
      calls += 1;
      if (calls === 1) return Promise.resolve(jsonResponse(200, k1.body));
      return Promise.resolve(jsonResponse(200, { nodes: 'not a list', url }));
    };

    const scenes: SceneVM[] = [];
    const errors: string[] = [];
    const explorer = new Explorer(new ApiClient('', http), {
      onRender: (scene) => scenes.push(scene),
      onError: (message) => errors.push(message),
    });

    await explorer.showDag(bundle.fan.origin, 1, 'both');
    expect(scenes).toHaveLength(1);

    await explorer.showDag(bundle.fan.origin, 2, 'both');
    expect(errors).toHaveLength(1);
    expect(errors[0]).toContain('expected shape');
    expect(scenes).toHaveLength(1);
    expect(explorer.state.hops).toBe(1);
  });
});

describe('metric switching', () => {
  it('re-renders from the response already on screen without a request', async () => {
    const { explorer, scenes, server } = harness(bundle);
    const { start, end } = bundle.grants.window;
    await explorer.showAccounts(start, end, 'address');
    const fetched = server.hitCount('/v1/graph/accounts');

    explorer.setMetric('total_in_value');
    expect(server.hitCount('/v1/graph/accounts')).toBe(fetched);
    expect(scenes).toHaveLength(2);

    // member_count is 1 for every plain address, so all radii were equal;
    // in-values differ, so now they must not all match
    const before = new Set(scenes[0]!.nodes.map((n) => n.radius));
    const after = new Set(scenes[1]!.nodes.map((n) => n.radius));
    expect(before.size).toBe(1);
    expect(after.size).toBeGreaterThan(1);
  });

  it('re-queries when granularity changes', async () => {
    const { explorer, server } = harness(bundle);
    const { start, end } = bundle.grants.window;
    await explorer.showAccounts(start, end, 'address');
    expect(server.hitCount('granularity=address')).toBe(1);
    await explorer.setGranularity('entity');
    expect(server.hitCount('granularity=entity')).toBe(1);
  });
});
