// Thin SVG painter. Scenes arrive fully computed; this file only turns them
// into elements and wires DOM events back to the controller.

import { EdgeVM, NodeVM, SceneVM } from '../viewmodel.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface PaintHandlers {
  onExpand?: (nodeId: string) => void;
  onSelect?: (nodeId: string) => void;
  onInspect?: (node: NodeVM) => void;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, val] of Object.entries(attrs)) el.setAttribute(key, String(val));
  return el;
}

function titled<T extends SVGElement>(el: T, text: string): T {
  const title = document.createElementNS(SVG_NS, 'title');
  title.textContent = text;
  el.appendChild(title);
  return el;
}

function paintEdge(edge: EdgeVM): SVGGElement {
  const group = svgEl('g', { class: 'edge' });
  group.appendChild(
    titled(
      svgEl('line', {
        x1: edge.x1,
        y1: edge.y1,
        x2: edge.x2,
        y2: edge.y2,
        stroke: '#8a8f98',
        'stroke-width': edge.width,
        'marker-end': 'url(#arrow)',
      }),
      edge.title,
    ),
  );
  const text = svgEl('text', {
    x: (edge.x1 + edge.x2) / 2,
    y: (edge.y1 + edge.y2) / 2 - 6,
    class: 'edge-label',
    'text-anchor': 'middle',
  });
  text.textContent = edge.label;
  group.appendChild(text);
  return group;
}

function paintNode(node: NodeVM, handlers: PaintHandlers): SVGGElement {
  const group = svgEl('g', {
    class: 'node',
    'data-id': node.id,
    transform: `translate(${node.x},${node.y})`,
  });

  const body =
    node.shape === 'circle'
      ? svgEl('circle', { r: node.radius, fill: node.color })
      : svgEl('rect', {
          x: -node.radius,
          y: -node.radius,
          width: node.radius * 2,
          height: node.radius * 2,
          fill: node.color,
        });
  titled(body, node.title);
  body.addEventListener('click', () => handlers.onSelect?.(node.id));
  body.addEventListener('dblclick', () => handlers.onInspect?.(node));
  group.appendChild(body);

  const caption = svgEl('text', {
    y: node.radius + 14,
    class: 'node-caption',
    'text-anchor': 'middle',
  });
  caption.textContent = node.caption;
  group.appendChild(caption);

  if (node.expandable) {
    const plus = svgEl('text', {
      x: node.radius + 6,
      y: -node.radius,
      class: 'expand',
    });
    plus.textContent = '+';
    titled(plus, 'expand one more hop');
    plus.addEventListener('click', () => handlers.onExpand?.(node.id));
    group.appendChild(plus);
  }
  return group;
}

export function paintScene(
  container: HTMLElement,
  scene: SceneVM,
  handlers: PaintHandlers = {},
): void {
  container.textContent = '';
  const svg = svgEl('svg', {
    viewBox: `0 0 ${scene.width} ${scene.height}`,
    width: scene.width,
    height: scene.height,
  });

  const defs = svgEl('defs', {});
  const marker = svgEl('marker', {
    id: 'arrow',
    viewBox: '0 0 10 10',
    refX: 22,
    refY: 5,
    markerWidth: 7,
    markerHeight: 7,
    orient: 'auto-start-reverse',
  });
  marker.appendChild(svgEl('path', { d: 'M 0 0 L 10 5 L 0 10 z', fill: '#8a8f98' }));
  defs.appendChild(marker);
  svg.appendChild(defs);

  for (const edge of scene.edges) svg.appendChild(paintEdge(edge));
  for (const node of scene.nodes) svg.appendChild(paintNode(node, handlers));
  container.appendChild(svg);
}

export function showBanner(container: HTMLElement, message: string): void {
  container.textContent = message;
  container.classList.add('visible');
}

export function clearBanner(container: HTMLElement): void {
  container.textContent = '';
  container.classList.remove('visible');
}
