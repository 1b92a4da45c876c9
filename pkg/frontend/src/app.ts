/** DOM wiring: split layout with the model graph on the left and the
 * attack-vector results on the right. All logic lives in the view-model
 * modules; this file only draws and forwards events. */

import { ApiClient, ApiError } from './api.js';
import { buildGraphView } from './graph.js';
import {
  FilterState,
  NO_FILTER,
  buildCompareView,
  buildResultsPanel,
} from './panels.js';
import { LoopState, WhatIfLoop } from './state.js';
import type { DocKind, SeverityBand } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function startApp(root: HTMLElement, baseUrl: string): void {
  const api = new ApiClient(baseUrl);
  const loop = new WhatIfLoop(api);
  let selectedEntity: string | null = null;
  const filter: FilterState = { ...NO_FILTER, kinds: null };

  root.innerHTML = `
    <header>
      <strong>threatscope</strong>
      <input type="file" id="model-file" accept=".graphml,.xml"/>
      <button id="pin-baseline">pin baseline</button>
      <button id="clear-baseline">clear baseline</button>
      <span id="status"></span>
    </header>
    <div id="banner" class="banner" hidden></div>
    <main>
      <section id="graph-pane"><svg id="graph" width="560" height="520"></svg>
        <div id="graph-hint"></div></section>
      <section id="results-pane">
        <div id="filters">
          <label><input type="checkbox" data-kind="attack_pattern" checked/>attack patterns</label>
          <label><input type="checkbox" data-kind="weakness" checked/>weaknesses</label>
          <label><input type="checkbox" data-kind="vulnerability" checked/>vulnerabilities</label>
          <input id="keyword" placeholder="keyword"/>
          <select id="min-severity">
            <option value="">any severity</option>
            <option value="low">low+</option><option value="medium">medium+</option>
            <option value="high">high+</option><option value="critical">critical</option>
          </select>
        </div>
        <div id="attribute-editor"></div>
        <div id="results"></div>
        <div id="compare"></div>
      </section>
    </main>`;

  const banner = root.querySelector('#banner') as HTMLElement;
  const statusEl = root.querySelector('#status') as HTMLElement;

  function render(state: LoopState): void {
    banner.hidden = state.error === null;
    banner.textContent = state.error ?? '';
    statusEl.textContent = state.busy ? 'analyzing…' : `v${state.version}`;
    renderGraph(state);
    renderEditor(state);
    renderResults(state);
    renderCompare(state);
  }

  function renderGraph(state: LoopState): void {
    const svg = root.querySelector('#graph') as SVGSVGElement;
    const view = buildGraphView(state.model, state.analysis?.report ?? null, {
      width: 560, height: 520, selected: selectedEntity,
    });
    (root.querySelector('#graph-hint') as HTMLElement).textContent = view.hint ?? '';
    svg.replaceChildren();
    for (const edge of view.edges) {
      const line = document.createElementNS(SVG_NS, 'line');
      line.setAttribute('x1', String(edge.x1));
      line.setAttribute('y1', String(edge.y1));
      line.setAttribute('x2', String(edge.x2));
      line.setAttribute('y2', String(edge.y2));
      line.setAttribute('class', 'edge');
      svg.append(line);
    }
    for (const node of view.nodes) {
      const group = document.createElementNS(SVG_NS, 'g');
      group.setAttribute('transform', `translate(${node.x},${node.y})`);
      group.setAttribute('class',
        `node${node.selected ? ' selected' : ''}${node.neutral ? ' neutral' : ''}`);
      const circle = document.createElementNS(SVG_NS, 'circle');
      circle.setAttribute('r', '26');
      const label = document.createElementNS(SVG_NS, 'text');
      label.setAttribute('y', '42');
      label.textContent = node.name;
      const badge = document.createElementNS(SVG_NS, 'text');
      badge.setAttribute('class', 'badge');
      badge.setAttribute('y', '5');
      badge.textContent = String(node.badge);
      group.append(circle, label, badge);
      group.addEventListener('click', () => {
        selectedEntity = node.id;
        render(loop.state);
      });
      svg.append(group);
    }
  }

  function renderEditor(state: LoopState): void {
    const editor = root.querySelector('#attribute-editor') as HTMLElement;
    editor.replaceChildren();
    if (state.model === null || selectedEntity === null) {
      return;
    }
    const component = state.model.components.find((c) => c.id === selectedEntity);
    if (component === undefined) {
      selectedEntity = null;
      return;
    }
    editor.append(el('h3', '', component.name));
    for (const attribute of component.attributes) {
      const row = el('div', 'attr-row');
      row.append(el('span', 'attr-key', attribute.key));
      const input = el('input');
      input.value = attribute.value;
      input.addEventListener('change', () => {
        loop.editAttribute(component.id, attribute.key, input.value);
      });
      row.append(input);
      editor.append(row);
    }
  }

  function renderResults(state: LoopState): void {
    const container = root.querySelector('#results') as HTMLElement;
    const panel = buildResultsPanel(state.analysis, filter, selectedEntity);
    container.replaceChildren();
    if (panel.emptyMessage !== null) {
      container.append(el('p', 'empty', panel.emptyMessage));
    }
    for (const group of panel.groups) {
      if (group.entries.length === 0) continue;
      const section = el('div', 'attr-results');
      section.append(el('h4', '', `${group.entity} / ${group.key}`));
      for (const entry of group.entries) {
        const row = el('div', `match kind-${entry.kind ?? 'unknown'}`);
        row.append(el('span', 'doc-id', entry.docId));
        row.append(el('span', 'title', entry.title));
        row.append(el('span', 'score', entry.score.toFixed(3)));
        if (entry.severity !== null) {
          row.append(el('span', `severity ${entry.severity}`, entry.severity));
        }
        if (entry.via === 'crossref') {
          row.append(el('span', 'via', `via ${entry.viaSource}`));
        }
        section.append(row);
      }
      container.append(section);
    }
  }

  function renderCompare(state: LoopState): void {
    const container = root.querySelector('#compare') as HTMLElement;
    const view = buildCompareView(state.diff, state.diffDisabledReason);
    container.replaceChildren(el('h4', '', 'compare vs baseline'));
    if (!view.enabled) {
      container.append(el('p', 'empty', view.reason ?? ''));
      return;
    }
    if (view.identical) {
      container.append(el('p', 'empty', 'no change vs baseline'));
    }
    for (const row of view.rows) {
      container.append(el('div', `delta ${row.direction}`,
        `${row.entity}: ${row.delta > 0 ? '+' : ''}${row.delta}`));
    }
    container.append(el('div', 'net',
      `net ${view.netDelta > 0 ? '+' : ''}${view.netDelta}`));
  }

  loop.onChange(render);

  (root.querySelector('#model-file') as HTMLInputElement)
    .addEventListener('change', async (event) => {
      const file = (event.target as HTMLInputElement).files?.[0];
      if (!file) return;
      try {
        const uploaded = await api.uploadModel(await file.text());
        await loop.loadModel(uploaded.model_id);
      } catch (error) {
        banner.hidden = false;
        banner.textContent = error instanceof ApiError
          ? error.payload.message : String(error);
      }
    });
  (root.querySelector('#pin-baseline') as HTMLElement)
    .addEventListener('click', () => loop.pinBaseline());
  (root.querySelector('#clear-baseline') as HTMLElement)
    .addEventListener('click', () => loop.clearBaseline());
  for (const box of root.querySelectorAll<HTMLInputElement>('#filters input[data-kind]')) {
    box.addEventListener('change', () => {
      const checked = [...root.querySelectorAll<HTMLInputElement>(
        '#filters input[data-kind]')].filter((b) => b.checked);
      filter.kinds = checked.length === 3
        ? null
        : new Set(checked.map((b) => b.dataset.kind as DocKind));
      render(loop.state);
    });
  }
  (root.querySelector('#keyword') as HTMLInputElement)
    .addEventListener('input', (event) => {
      filter.keyword = (event.target as HTMLInputElement).value;
      render(loop.state);
    });
  (root.querySelector('#min-severity') as HTMLSelectElement)
    .addEventListener('change', (event) => {
      const value = (event.target as HTMLSelectElement).value;
      filter.minSeverity = value === '' ? null : value as SeverityBand;
      render(loop.state);
    });

  render(loop.state);
}
