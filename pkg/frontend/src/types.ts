/** Wire types for the analysis service JSON API. */

export type DocKind = 'attack_pattern' | 'weakness' | 'vulnerability';

export type SeverityBand = 'none' | 'low' | 'medium' | 'high' | 'critical';

export interface ModelAttribute {
  key: string;
  value: string;
}

export interface ModelComponent {
  id: string;
  name: string;
  attributes: ModelAttribute[];
}

export interface ModelConnection {
  id: string;
  source: string;
  target: string;
  attributes: ModelAttribute[];
}

export interface ModelView {
  id: string;
  metadata: Record<string, string>;
  components: ModelComponent[];
  connections: ModelConnection[];
}

export interface ModelResponse {
  model_id: string;
  version: number;
  model: ModelView;
}

export interface UploadResponse {
  model_id: string;
  version: number;
  warnings: string[];
  summary: {
    id: string;
    component_count: number;
    connection_count: number;
    components: string[];
  };
}

export interface MatchView {
  doc_id: string;
  score: number;
  matched_terms: string[];
  via: 'direct' | 'crossref';
  via_source: string | null;
  kind?: DocKind;
  title?: string;
  severity_band?: SeverityBand | null;
}

export interface AttributeMatches {
  entity: string;
  key: string;
  matches: MatchView[];
}

export interface ReportRow {
  component: string;
  attribute: string;
  attack_patterns: number;
  weaknesses: number;
  vulnerabilities: number;
  total: number;
}

export interface Report {
  model_id: string;
  rows: ReportRow[];
  total: number;
}

export interface AnalyzeResponse {
  analysis_id: string;
  model_id: string;
  version: number;
  corpus_stamp: string;
  config: unknown;
  report: Report;
}

export interface AnalysisView extends AnalyzeResponse {
  attributes: AttributeMatches[];
  warnings: string[];
}

export interface AttributeDelta {
  entity: string;
  key: string;
  added: string[];
  removed: string[];
}

export interface DiffView {
  before: string;
  after: string;
  corpus_stamp: string;
  attributes: AttributeDelta[];
  per_component: Record<string, number>;
  net_delta: number;
  empty: boolean;
}

export interface PatchResponse {
  model_id: string;
  version: number;
  diff: unknown;
}

export interface Mutation {
  op: 'add_component' | 'remove_component' | 'add_connection' | 'remove_connection'
    | 'set_attribute' | 'remove_attribute';
  id: string;
  name?: string;
  source?: string;
  target?: string;
  key?: string;
  value?: string;
  attributes?: Record<string, string>;
}

export interface ErrorPayload {
  code: string;
  message: string;
  detail: unknown;
}
