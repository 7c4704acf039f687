/** Shared test utilities: fake storage, scripted fetch, DOM polling. */

import type { Credentials } from '../src/session';

export class FakeStorage implements Storage {
  private map = new Map<string, string>();

  get length(): number {
    return this.map.size;
  }

  clear(): void {
    this.map.clear();
  }

  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }

  key(index: number): string | null {
    return [...this.map.keys()][index] ?? null;
  }

  removeItem(key: string): void {
    this.map.delete(key);
  }

  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
}

export const TEST_CREDENTIALS: Credentials = {
  baseUrl: 'http://service.test',
  apiKey: 'key-phc1',
  centerId: 'PHC-1',
};

export function storageWithCredentials(credentials: Credentials = TEST_CREDENTIALS): FakeStorage {
  const storage = new FakeStorage();
  storage.setItem('imz-operator-credentials', JSON.stringify(credentials));
  return storage;
}

export interface RecordedRequest {
  method: string;
  path: string;
  headers: Record<string, string>;
  body: unknown;
}

export type RouteHandler = (req: RecordedRequest) => { status?: number; body: unknown } | Error;

/**
 * Scripted fetch for DOM tests: routes "METHOD /path" (query stripped) to a
 * handler and records every request it serves and every body it returns.
 */
export function scriptedFetch(routes: Record<string, RouteHandler>): {
  fetchImpl: typeof fetch;
  requests: RecordedRequest[];
  responses: unknown[];
} {
  const requests: RecordedRequest[] = [];
  const responses: unknown[] = [];

  const fetchImpl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input));
    const method = init?.method ?? 'GET';
    const headers: Record<string, string> = {};
    for (const [name, value] of Object.entries(init?.headers ?? {})) {
      headers[name.toLowerCase()] = value as string;
    }
    const request: RecordedRequest = {
      method,
      path: url.pathname,
      headers,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    };
    requests.push(request);

    const handler = routes[`${method} ${url.pathname}`];
    if (!handler) {
      throw new Error(`no scripted route for ${method} ${url.pathname}`);
    }
    const outcome = handler(request);
    if (outcome instanceof Error) {
      throw outcome;
    }
    responses.push(outcome.body);
    return new Response(JSON.stringify(outcome.body), {
      status: outcome.status ?? 200,
      headers: { 'Content-Type': 'application/json' },
    });
  }) as typeof fetch;

  return { fetchImpl, requests, responses };
}

/** Poll until `condition` is truthy; fails the test after `timeoutMs`. */
export async function waitFor(condition: () => boolean, timeoutMs = 5000): Promise<void> {
  const started = Date.now();
  while (!condition()) {
    if (Date.now() - started > timeoutMs) {
      throw new Error('waitFor: condition not met in time');
    }
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}

/** Let queued microtasks and zero-delay timers run. */
export async function flush(): Promise<void> {
  for (let i = 0; i < 5; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export function setInputValue(input: HTMLInputElement | HTMLSelectElement, value: string): void {
  input.value = value;
  input.dispatchEvent(new Event('input', { bubbles: true }));
  input.dispatchEvent(new Event('change', { bubbles: true }));
}

export function submitForm(form: HTMLFormElement): void {
  form.dispatchEvent(new Event('submit', { bubbles: true, cancelable: true }));
}

/** All due-date strings currently rendered inside `root`. */
export function renderedDueDates(root: ParentNode): string[] {
  return [...root.querySelectorAll('.due-date')].map((node) => node.textContent ?? '');
}

/** Every `due_date` value anywhere inside captured response payloads. */
export function dueDatesIn(value: unknown, out = new Set<string>()): Set<string> {
  if (Array.isArray(value)) {
    for (const item of value) {
      dueDatesIn(item, out);
    }
  } else if (value !== null && typeof value === 'object') {
    for (const [key, item] of Object.entries(value)) {
      if (key === 'due_date' && typeof item === 'string') {
        out.add(item);
      } else {
        dueDatesIn(item, out);
      }
    }
  }
  return out;
}
