/** Typed client for the analysis service. The dashboard talks to the
 * service exclusively through this module; no analysis logic lives here. */

import type {
  AnalysisView,
  AnalyzeResponse,
  DiffView,
  ErrorPayload,
  ModelResponse,
  Mutation,
  PatchResponse,
  UploadResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly payload: ErrorPayload,
  ) {
    super(`${payload.code}: ${payload.message}`);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body as ErrorPayload);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  putCorpus(snapshot: string): Promise<{ doc_count: number; build_stamp: string }> {
    return this.fetchFn(this.url('/corpus'), { method: 'PUT', body: snapshot })
      .then((r) => asJson(r));
  }

  uploadModel(graphml: string): Promise<UploadResponse> {
    return this.fetchFn(this.url('/models'), {
      method: 'POST',
      body: graphml,
      headers: { 'content-type': 'application/xml' },
    }).then((r) => asJson(r));
  }

  getModel(modelId: string, version?: number): Promise<ModelResponse> {
    const suffix = version === undefined ? '' : `?version=${version}`;
    return this.fetchFn(this.url(`/models/${modelId}${suffix}`))
      .then((r) => asJson(r));
  }

  patchModel(modelId: string, mutations: Mutation[]): Promise<PatchResponse> {
    return this.fetchFn(this.url(`/models/${modelId}`), {
      method: 'PATCH',
      body: JSON.stringify(mutations),
      headers: { 'content-type': 'application/json' },
    }).then((r) => asJson(r));
  }

  analyze(modelId: string, signal?: AbortSignal): Promise<AnalyzeResponse> {
    return this.fetchFn(this.url(`/models/${modelId}/analyze`), {
      method: 'POST',
      body: '{}',
      headers: { 'content-type': 'application/json' },
      signal,
    }).then((r) => asJson(r));
  }

  getAnalysis(analysisId: string, signal?: AbortSignal): Promise<AnalysisView> {
    return this.fetchFn(this.url(`/analyses/${analysisId}`), { signal })
      .then((r) => asJson(r));
  }

  diffAnalyses(beforeId: string, afterId: string): Promise<DiffView> {
    return this.fetchFn(this.url(`/analyses/${beforeId}/diff/${afterId}`))
      .then((r) => asJson(r));
  }
}
