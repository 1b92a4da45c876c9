/** Replay recorded service exchanges through a fake fetch. */

import type { FetchLike } from '../src/api.js';

export interface Exchange {
  method: string;
  path: string;
  status: number;
  request_body?: unknown;
  body: unknown;
}

export interface RecordedCall {
  method: string;
  url: string;
  body: string | null;
}

type Interceptor = (method: string, url: string) => Promise<Response> | null;

export class FakeService {
  readonly calls: RecordedCall[] = [];
  private readonly queues = new Map<string, Exchange[]>();

  constructor(exchanges: Exchange[], private readonly intercept?: Interceptor) {
    for (const exchange of exchanges) {
      const key = `${exchange.method} ${exchange.path}`;
      const queue = this.queues.get(key) ?? [];
      queue.push(exchange);
      this.queues.set(key, queue);
    }
  }

  readonly fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? 'GET';
    this.calls.push({ method, url, body: typeof init?.body === 'string' ? init.body : null });
    const intercepted = this.intercept?.(method, url);
    if (intercepted) {
      return intercepted;
    }
    const queue = this.queues.get(`${method} ${url}`);
    if (queue === undefined || queue.length === 0) {
      throw new Error(`no recorded exchange for ${method} ${url}`);
    }
    const exchange = queue.length > 1 ? queue.shift()! : queue[0];
    return new Response(JSON.stringify(exchange.body), {
      status: exchange.status,
      headers: { 'content-type': 'application/json' },
    });
  };

  count(method: string, pattern?: RegExp): number {
    return this.calls.filter(
      (call) => call.method === method && (pattern === undefined || pattern.test(call.url)),
    ).length;
  }
}

export function errorResponse(status: number, code: string, message: string): Response {
  return new Response(JSON.stringify({ code, message, detail: null }), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

/** Drain the microtask queue so promise chains settle under fake timers. */
export async function drain(rounds = 25): Promise<void> {
  for (let i = 0; i < rounds; i += 1) {
    await Promise.resolve();
  }
}
