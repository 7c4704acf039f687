import { describe, expect, it } from 'vitest';

import { ApiRequestError, doseLabel, newIdempotencyKey, RegistryClient } from '../src/api';
import { scriptedFetch } from './helpers';

function client(routes: Parameters<typeof scriptedFetch>[0]) {
  const scripted = scriptedFetch(routes);
  return {
    ...scripted,
    client: new RegistryClient({
      baseUrl: 'http://service.test/',
      apiKey: 'key-phc1',
      fetchImpl: scripted.fetchImpl,
    }),
  };
}

describe('RegistryClient', () => {
  it('sends the API key on reads and strips trailing slashes from the base URL', async () => {
    const { client: api, requests } = client({
      'GET /healthz': () => ({ body: { status: 'ok', children: 0, events: 0 } }),
    });
    const health = await api.healthz();
    expect(health.children).toBe(0);
    expect(requests[0]?.path).toBe('/healthz');
    expect(requests[0]?.headers['x-api-key']).toBe('key-phc1');
  });

  it('sends JSON content type and the idempotency key on mutating calls', async () => {
    const { client: api, requests } = client({
      'POST /children/234567890128/vaccinations': () => ({
        body: { uid: '234567890128', accepted: ['BCG-1'], duplicates: [], conflicts: [], next_due: [], message_queued: true },
      }),
    });
    await api.recordDoses('234567890128', [{ vaccine: 'BCG', dose_number: 1 }], '2026-08-22', 'intent-1');
    const request = requests[0]!;
    expect(request.headers['content-type']).toBe('application/json');
    expect(request.headers['idempotency-key']).toBe('intent-1');
    expect(request.body).toEqual({
      doses: [{ vaccine: 'BCG', dose_number: 1 }],
      administered_date: '2026-08-22',
      batch_id: '',
    });
  });

  it('builds next-due and due-list query strings', async () => {
    const seen: string[] = [];
    const fetchImpl = (async (input: RequestInfo | URL) => {
      seen.push(String(input));
      return new Response(JSON.stringify({ uid: 'x', as_of: '2026-01-01', doses: [] }), { status: 200 });
    }) as typeof fetch;
    const api = new RegistryClient({ baseUrl: 'http://s', apiKey: 'k', fetchImpl });
    await api.nextDue('234567890128', '2026-01-01');
    await api.dueList('PHC-1', '2026-01-02');
    expect(seen[0]).toBe('http://s/children/234567890128/next-due?as_of=2026-01-01');
    expect(seen[1]).toBe('http://s/centers/PHC-1/due-list?date=2026-01-02');
  });

  it('surfaces the service error envelope as code and message', async () => {
    const { client: api } = client({
      'POST /guardians/verify': () => ({
        status: 401,
        body: { error: { code: 'UNAUTHENTICATED', message: 'unknown or revoked API key' } },
      }),
    });
    const failure = await api.verifyGuardian('512345678903', 'Asha Rao').catch((err) => err);
    expect(failure).toBeInstanceOf(ApiRequestError);
    expect(failure.code).toBe('UNAUTHENTICATED');
    expect(failure.status).toBe(401);
    expect(failure.message).toBe('unknown or revoked API key');
    expect(failure.retryable).toBe(false);
  });

  it('copes with error responses that carry no JSON envelope', async () => {
    const fetchImpl = (async () => new Response('gateway timeout', { status: 502 })) as typeof fetch;
    const api = new RegistryClient({ baseUrl: 'http://s', apiKey: 'k', fetchImpl });
    const failure = await api.healthz().catch((err) => err);
    expect(failure).toBeInstanceOf(ApiRequestError);
    expect(failure.code).toBe('UNKNOWN_ERROR');
    expect(failure.status).toBe(502);
    expect(failure.retryable).toBe(true);
  });

  it('maps a network failure to SERVICE_UNREACHABLE with status 0', async () => {
    const { client: api } = client({
      'GET /healthz': () => new TypeError('fetch failed'),
    });
    const failure = await api.healthz().catch((err) => err);
    expect(failure).toBeInstanceOf(ApiRequestError);
    expect(failure.code).toBe('SERVICE_UNREACHABLE');
    expect(failure.status).toBe(0);
    expect(failure.retryable).toBe(true);
  });

  it('treats 503 as retryable and 409 as final', () => {
    expect(new ApiRequestError('x', 503, 'QUEUE_FULL').retryable).toBe(true);
    expect(new ApiRequestError('x', 409, 'CONFLICT_IDEMPOTENCY').retryable).toBe(false);
  });

  it('URL-encodes child identifiers in paths', async () => {
    const seen: string[] = [];
    const fetchImpl = (async (input: RequestInfo | URL) => {
      seen.push(String(input));
      return new Response(JSON.stringify({ uid: 'x', events: [] }), { status: 200 });
    }) as typeof fetch;
    const api = new RegistryClient({ baseUrl: 'http://s', apiKey: 'k', fetchImpl });
    await api.history('12/34');
    expect(seen[0]).toBe('http://s/children/12%2F34/history');
  });
});

describe('idempotency keys', () => {
  it('mints distinct keys per call', () => {
    const keys = new Set(Array.from({ length: 100 }, () => newIdempotencyKey()));
    expect(keys.size).toBe(100);
  });
});

describe('dose labels', () => {
  it('formats vaccine and dose number', () => {
    expect(doseLabel('BCG', 1)).toBe('BCG-1');
    expect(doseLabel('OPV', 0)).toBe('OPV-0');
  });
});
