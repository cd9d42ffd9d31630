// Browser entry point. Builds the control strip, owns the one Explorer
// instance, and repaints whenever the controller hands us a new scene.

import { ApiClient } from './api.js';
import { Explorer, ViewState } from './state.js';
import { NodeVM, SceneVM } from './viewmodel.js';
import { clearBanner, paintScene, showBanner } from './render/svg.js';
import { Granularity, MetricKey } from './types.js';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, val] of Object.entries(attrs)) node.setAttribute(key, val);
  if (text !== undefined) node.textContent = text;
  return node;
}

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('api');
  return fromQuery ?? window.location.origin;
}

function numberOr(value: string, fallback: number): number {
  const parsed = Number(value);
  return Number.isFinite(parsed) ? parsed : fallback;
}

function main(): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app container');

  const banner = el('div', { id: 'banner' });
  const controls = el('div', { id: 'controls' });
  const stage = el('div', { id: 'stage' });
  const inspector = el('div', { id: 'inspector' });
  root.append(banner, controls, stage, inspector);

  const client = new ApiClient(apiBase(), (url, init) => fetch(url, init));
  const explorer = new Explorer(client, {
    onRender: (scene: SceneVM, state: ViewState) => {
      clearBanner(banner);
      paintScene(stage, scene, {
        onExpand: () => void explorer.expandFrontier(),
        onSelect: (id) => explorer.select(id),
        onInspect: (node) => void inspect(node),
      });
      syncControls(state);
    },
    onError: (message: string) => showBanner(banner, message),
    onNotice: (message: string) => showBanner(banner, message),
  });

  async function inspect(node: NodeVM): Promise<void> {
    inspector.textContent = '';
    inspector.appendChild(el('h3', {}, node.label ?? node.id));
    if (node.metrics) {
      const list = el('dl');
      for (const [key, val] of Object.entries(node.metrics)) {
        list.appendChild(el('dt', {}, key));
        list.appendChild(el('dd', {}, String(val)));
      }
      inspector.appendChild(list);
    }
    if (node.shape === 'circle' && node.metrics) {
      try {
        const members = await client.clusterMembers();
        const mine = members.find((c) => c.id === node.id);
        if (mine) {
          const preview = mine.members.slice(0, 8).join(', ');
          inspector.appendChild(el('p', {}, `members: ${preview}`));
        }
      } catch {
        // member preview is best effort; metrics above already rendered
      }
    }
  }

  // -- control strip ---------------------------------------------------

  const originInput = el('input', { placeholder: 'origin tx id', size: '20' });
  const hopsInput = el('input', { type: 'number', min: '0', value: '1', size: '3' });
  const dirSelect = el('select');
  for (const d of ['forward', 'backward', 'both']) dirSelect.appendChild(el('option', { value: d }, d));
  dirSelect.value = 'both';
  const traceBtn = el('button', {}, 'trace');
  traceBtn.addEventListener('click', () => {
    void explorer.showDag(originInput.value.trim(), numberOr(hopsInput.value, 1), dirSelect.value as never);
  });

  const startInput = el('input', { placeholder: 'window start', size: '12' });
  const endInput = el('input', { placeholder: 'window end', size: '12' });
  const granSelect = el('select');
  for (const g of ['address', 'entity']) granSelect.appendChild(el('option', { value: g }, g));
  const graphBtn = el('button', {}, 'accounts');
  graphBtn.addEventListener('click', () => {
    void explorer.showAccounts(
      numberOr(startInput.value, 0),
      numberOr(endInput.value, 0),
      granSelect.value as Granularity,
    );
  });
  granSelect.addEventListener('change', () => {
    void explorer.setGranularity(granSelect.value as Granularity);
  });

  const metricSelect = el('select');
  for (const m of ['member_count', 'total_in_value', 'total_out_value', 'tx_count', 'intra_value']) {
    metricSelect.appendChild(el('option', { value: m }, m.replace(/_/g, ' ')));
  }
  metricSelect.addEventListener('change', () => explorer.setMetric(metricSelect.value as MetricKey));

  const labelTarget = el('input', { placeholder: 'address or cluster', size: '16' });
  const labelText = el('input', { placeholder: 'label', size: '14' });
  const labelBtn = el('button', {}, 'label');
  labelBtn.addEventListener('click', () => {
    void explorer.submitLabel(labelTarget.value.trim(), labelText.value.trim());
  });

  const mergeInput = el('input', { placeholder: 'addr1, addr2, ...', size: '24' });
  const mergeBtn = el('button', {}, 'merge rule');
  mergeBtn.addEventListener('click', () => {
    const addrs = mergeInput.value.split(',').map((s) => s.trim()).filter(Boolean);
    void explorer.submitMergeRule(addrs);
  });
  const rebuildBtn = el('button', {}, 'rebuild clusters');
  rebuildBtn.addEventListener('click', () => void explorer.rebuildClusters());

  const row = (label: string, ...items: HTMLElement[]) => {
    const div = el('div', { class: 'row' });
    div.appendChild(el('span', { class: 'row-label' }, label));
    div.append(...items);
    return div;
  };
  controls.append(
    row('trace', originInput, hopsInput, dirSelect, traceBtn),
    row('graph', startInput, endInput, granSelect, graphBtn, metricSelect),
    row('annotate', labelTarget, labelText, labelBtn, mergeInput, mergeBtn, rebuildBtn),
  );

  function syncControls(state: ViewState): void {
    hopsInput.value = String(state.hops);
    granSelect.value = state.granularity;
    metricSelect.value = state.metric;
  }
}

main();
