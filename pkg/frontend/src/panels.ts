/** Results panel and compare view models.
 *
 * Both are pure views over service responses: toggling a filter never
 * mutates the stored analysis, and the compare view only passes signed
 * count deltas through (no aggregation into a score).
 */

import type { AnalysisView, DiffView, DocKind, SeverityBand } from './types.js';

const BAND_RANK: Record<SeverityBand, number> = {
  none: 0, low: 1, medium: 2, high: 3, critical: 4,
};

export interface FilterState {
  kinds: Set<DocKind> | null;
  keyword: string;
  minSeverity: SeverityBand | null;
}

export const NO_FILTER: FilterState = { kinds: null, keyword: '', minSeverity: null };

export interface ResultEntry {
  docId: string;
  kind: DocKind | null;
  title: string;
  score: number;
  via: 'direct' | 'crossref';
  viaSource: string | null;
  severity: SeverityBand | null;
}

export interface AttributeGroup {
  entity: string;
  key: string;
  entries: ResultEntry[];
}

export interface ResultsPanelVM {
  groups: AttributeGroup[];
  total: number;
  emptyMessage: string | null;
}

function admits(entry: ResultEntry, filter: FilterState): boolean {
  if (filter.kinds !== null && (entry.kind === null || !filter.kinds.has(entry.kind))) {
    return false;
  }
  if (filter.keyword !== '') {
    const needle = filter.keyword.toLowerCase();
    if (!entry.title.toLowerCase().includes(needle)
        && !entry.docId.toLowerCase().includes(needle)) {
      return false;
    }
  }
  if (filter.minSeverity !== null) {
    const band = entry.severity ?? 'none';
    if (BAND_RANK[band] < BAND_RANK[filter.minSeverity]) {
      return false;
    }
  }
  return true;
}

export function buildResultsPanel(analysis: AnalysisView | null, filter: FilterState,
                                  selectedEntity?: string | null): ResultsPanelVM {
  if (analysis === null) {
    return { groups: [], total: 0, emptyMessage: 'no analysis yet' };
  }
  const groups: AttributeGroup[] = [];
  let total = 0;
  for (const row of analysis.attributes) {
    if (selectedEntity != null && row.entity !== selectedEntity) {
      continue;
    }
    const entries = row.matches
      .map((match): ResultEntry => ({
        docId: match.doc_id,
        kind: match.kind ?? null,
        title: match.title ?? match.doc_id,
        score: match.score,
        via: match.via,
        viaSource: match.via_source,
        severity: match.severity_band ?? null,
      }))
      .filter((entry) => admits(entry, filter));
    total += entries.length;
    groups.push({ entity: row.entity, key: row.key, entries });
  }
  return { groups, total, emptyMessage: total === 0 ? 'no matches' : null };
}

export interface CompareRow {
  entity: string;
  delta: number;
  direction: 'up' | 'down';
}

export interface CompareVM {
  enabled: boolean;
  reason: string | null;
  rows: CompareRow[];
  netDelta: number;
  identical: boolean;
}

export function buildCompareView(diff: DiffView | null,
                                 disabledReason: string | null): CompareVM {
  if (disabledReason !== null) {
    return { enabled: false, reason: disabledReason, rows: [], netDelta: 0, identical: false };
  }
  if (diff === null) {
    return { enabled: false, reason: 'no baseline pinned', rows: [], netDelta: 0, identical: false };
  }
  const rows: CompareRow[] = Object.entries(diff.per_component)
    .map(([entity, delta]) => ({
      entity,
      delta,
      direction: delta > 0 ? 'up' as const : 'down' as const,
    }))
    .sort((a, b) => a.entity.localeCompare(b.entity));
  return {
    enabled: true,
    reason: null,
    rows,
    netDelta: diff.net_delta,
    identical: diff.empty,
  };
}
