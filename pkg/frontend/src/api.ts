/**
 * Typed client for the immunization registry service.
 *
 * Every response shape here mirrors the service's wire contract field for
 * field. The client does no schedule math of its own: due dates and dose
 * statuses pass through exactly as the server sent them.
 */

export interface GuardianPayload {
  uid: string;
  name: string;
  mobile: string;
  guardian_type: 'PARENT' | 'GUARDIAN' | 'ORPHANAGE';
}

export interface RegistrationRequest {
  child_name: string;
  date_of_birth: string;
  sex: 'F' | 'M' | 'X';
  place_of_birth: string;
  guardian: GuardianPayload;
}

export interface ChildRecord {
  uid: string;
  child_name: string;
  guardian_name: string;
  guardian_mobile: string;
  guardian_uid: string;
  date_of_birth: string;
  sex: string;
  place_of_birth: string;
  zone_id: string;
  registered_center: string;
  registered_at: string;
}

export interface Certificate {
  certificate_id: string;
  uid: string;
  child_name: string;
  date_of_birth: string;
  sex: string;
  place_of_birth: string;
  guardian_name: string;
  guardian_uid: string;
  issuing_center: string;
  issued_at: string;
  digest: string;
  canonical_text: string;
}

export interface RegistrationResponse {
  uid: string;
  created: boolean;
  child: ChildRecord;
  certificate: Certificate;
}

export interface VerifyResponse {
  uid: string;
  result: 'VERIFIED' | 'UNKNOWN_UID' | 'NAME_MISMATCH';
}

export interface DueDose {
  vaccine: string;
  dose_number: number;
  due_date: string;
  status: string;
}

export interface DoseSelection {
  vaccine: string;
  dose_number: number;
}

export interface VaccinationResponse {
  uid: string;
  accepted: string[];
  duplicates: string[];
  conflicts: string[];
  next_due: DueDose[];
  message_queued: boolean;
}

export interface HistoryEvent {
  event_id: string;
  child_uid: string;
  vaccine: string;
  dose_number: number;
  administered_date: string;
  center_id: string;
  batch_id: string;
  recorded_at: string;
  superseded: boolean;
}

export interface HistoryResponse {
  uid: string;
  events: HistoryEvent[];
}

export interface NextDueResponse {
  uid: string;
  as_of: string;
  doses: DueDose[];
}

export interface DueListChild {
  uid: string;
  child_name: string;
  guardian_mobile: string;
  doses: DueDose[];
}

export interface DueListResponse {
  center_id: string;
  date: string;
  children: DueListChild[];
}

export interface HealthResponse {
  status: 'ok';
  children: number;
  events: number;
}

/** A service error with its stable machine-readable code. */
export class ApiRequestError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly code: string,
  ) {
    super(message);
    this.name = 'ApiRequestError';
  }

  /** True when retrying the same request might succeed (outage, not rejection). */
  get retryable(): boolean {
    return this.status === 0 || this.status === 503 || this.status >= 500;
  }
}

/** Fresh idempotency key; one per user intent, reused across retries of it. */
export function newIdempotencyKey(): string {
  if (typeof crypto !== 'undefined' && 'randomUUID' in crypto) {
    return crypto.randomUUID();
  }
  return `ik-${Date.now()}-${Math.random().toString(36).slice(2, 10)}`;
}

export interface ClientOptions {
  baseUrl: string;
  apiKey: string;
  fetchImpl?: typeof fetch;
}

export class RegistryClient {
  private readonly baseUrl: string;
  private readonly apiKey: string;
  private readonly fetchImpl: typeof fetch;

  constructor(opts: ClientOptions) {
    this.baseUrl = opts.baseUrl.replace(/\/+$/, '');
    this.apiKey = opts.apiKey;
    this.fetchImpl = opts.fetchImpl ?? fetch.bind(globalThis);
  }

  private async request<T>(
    method: 'GET' | 'POST',
    path: string,
    body?: unknown,
    idempotencyKey?: string,
  ): Promise<T> {
    const headers: Record<string, string> = { 'X-Api-Key': this.apiKey };
    if (body !== undefined) {
      headers['Content-Type'] = 'application/json';
    }
    if (idempotencyKey) {
      headers['Idempotency-Key'] = idempotencyKey;
    }
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiRequestError(
        `service unreachable: ${err instanceof Error ? err.message : String(err)}`,
        0,
        'SERVICE_UNREACHABLE',
      );
    }
    const parsed: unknown = await response.json().catch(() => null);
    if (!response.ok) {
      const envelope = parsed as { error?: { code?: string; message?: string } } | null;
      throw new ApiRequestError(
        envelope?.error?.message ?? `request failed (HTTP ${response.status})`,
        response.status,
        envelope?.error?.code ?? 'UNKNOWN_ERROR',
      );
    }
    return parsed as T;
  }

  healthz(): Promise<HealthResponse> {
    return this.request('GET', '/healthz');
  }

  verifyGuardian(uid: string, name: string): Promise<VerifyResponse> {
    return this.request('POST', '/guardians/verify', { uid, name });
  }

  register(body: RegistrationRequest, idempotencyKey: string): Promise<RegistrationResponse> {
    return this.request('POST', '/registrations', body, idempotencyKey);
  }

  recordDoses(
    uid: string,
    doses: DoseSelection[],
    administeredDate: string,
    idempotencyKey: string,
    batchId = '',
  ): Promise<VaccinationResponse> {
    return this.request(
      'POST',
      `/children/${encodeURIComponent(uid)}/vaccinations`,
      { doses, administered_date: administeredDate, batch_id: batchId },
      idempotencyKey,
    );
  }

  history(uid: string): Promise<HistoryResponse> {
    return this.request('GET', `/children/${encodeURIComponent(uid)}/history`);
  }

  nextDue(uid: string, asOf?: string): Promise<NextDueResponse> {
    const query = asOf ? `?as_of=${encodeURIComponent(asOf)}` : '';
    return this.request('GET', `/children/${encodeURIComponent(uid)}/next-due${query}`);
  }

  dueList(centerId: string, date: string): Promise<DueListResponse> {
    return this.request(
      'GET',
      `/centers/${encodeURIComponent(centerId)}/due-list?date=${encodeURIComponent(date)}`,
    );
  }
}

/** Label like "BCG-1" for a dose; the only formatting the client does. */
export function doseLabel(vaccine: string, doseNumber: number): string {
  return `${vaccine}-${doseNumber}`;
}
