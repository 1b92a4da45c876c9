/** Node-link view model for the architecture graph.
 *
 * Pure layout and badge computation; the DOM layer only draws what this
 * module returns. Badges come straight from the service's exposure report,
 * never from client-side association.
 */

import type { ModelView, Report } from './types.js';

export interface GraphNode {
  id: string;
  name: string;
  x: number;
  y: number;
  badge: number;
  neutral: boolean;
  selected: boolean;
}

export interface GraphEdge {
  id: string;
  source: string;
  target: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface GraphViewModel {
  nodes: GraphNode[];
  edges: GraphEdge[];
  hint: string | null;
}

export interface GraphOptions {
  width: number;
  height: number;
  selected?: string | null;
  positions?: Map<string, { x: number; y: number }>;
}

export function componentTotals(report: Report | null): Map<string, number> {
  const totals = new Map<string, number>();
  for (const row of report?.rows ?? []) {
    totals.set(row.component, (totals.get(row.component) ?? 0) + row.total);
  }
  return totals;
}

export function buildGraphView(model: ModelView | null, report: Report | null,
                               options: GraphOptions): GraphViewModel {
  if (model === null || model.components.length === 0) {
    return { nodes: [], edges: [], hint: 'no components' };
  }
  const totals = componentTotals(report);
  const sorted = [...model.components].sort((a, b) => a.id.localeCompare(b.id));
  const cx = options.width / 2;
  const cy = options.height / 2;
  const radius = Math.max(40, Math.min(options.width, options.height) / 2 - 60);

  const nodes: GraphNode[] = sorted.map((component, index) => {
    const angle = (2 * Math.PI * index) / sorted.length - Math.PI / 2;
    const stored = options.positions?.get(component.id);
    const badge = totals.get(component.id) ?? 0;
    return {
      id: component.id,
      name: component.name,
      x: stored?.x ?? cx + radius * Math.cos(angle),
      y: stored?.y ?? cy + radius * Math.sin(angle),
      badge,
      neutral: badge === 0,
      selected: component.id === options.selected,
    };
  });

  const byId = new Map(nodes.map((n) => [n.id, n]));
  const edges: GraphEdge[] = [];
  for (const connection of model.connections) {
    const source = byId.get(connection.source);
    const target = byId.get(connection.target);
    if (source === undefined || target === undefined) {
      continue;
    }
    edges.push({
      id: connection.id,
      source: connection.source,
      target: connection.target,
      x1: source.x,
      y1: source.y,
      x2: target.x,
      y2: target.y,
    });
  }
  return { nodes, edges, hint: null };
}
