/**
 * Desk visit session: the state machine behind the screens.
 *
 * Two gating invariants are enforced here, not in the views:
 *   - the registration form stays disabled until a guardian is verified;
 *   - dose recording stays disabled until a child is loaded.
 * Views read `canRegister` / `canRecordDoses` instead of re-deriving them.
 */

import type { DueDose, GuardianPayload } from './api';

export interface Credentials {
  baseUrl: string;
  apiKey: string;
  centerId: string;
}

export interface ActiveChild {
  uid: string;
  /** Known only when the child arrived via registration or the due list. */
  childName: string | null;
  /** Verbatim from the most recent server response; never computed locally. */
  nextDue: DueDose[];
  asOf: string;
}

export interface Banner {
  kind: 'info' | 'success' | 'error';
  text: string;
  /** Present when the failed action can be retried with the same intent. */
  retry?: () => void;
}

export interface SessionState {
  credentials: Credentials | null;
  verifiedGuardian: GuardianPayload | null;
  activeChild: ActiveChild | null;
  pendingDoses: string[];
  banner: Banner | null;
}

type Listener = (state: SessionState) => void;

export class VisitSession {
  private state: SessionState = {
    credentials: null,
    verifiedGuardian: null,
    activeChild: null,
    pendingDoses: [],
    banner: null,
  };
  private listeners = new Set<Listener>();

  get snapshot(): SessionState {
    return this.state;
  }

  get isLoggedIn(): boolean {
    return this.state.credentials !== null;
  }

  get canRegister(): boolean {
    return this.state.verifiedGuardian !== null;
  }

  get canRecordDoses(): boolean {
    return this.state.activeChild !== null;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private patch(partial: Partial<SessionState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  logIn(credentials: Credentials): void {
    this.patch({ credentials, banner: null });
  }

  logOut(): void {
    this.state = {
      credentials: null,
      verifiedGuardian: null,
      activeChild: null,
      pendingDoses: [],
      banner: null,
    };
    this.emit();
  }

  guardianVerified(guardian: GuardianPayload): void {
    this.patch({ verifiedGuardian: guardian });
  }

  clearGuardian(): void {
    this.patch({ verifiedGuardian: null });
  }

  /** Loading a (different) child resets any dose selection made for the last one. */
  childLoaded(active: ActiveChild): void {
    this.patch({ activeChild: active, pendingDoses: [] });
  }

  /** Refresh the server-sourced due panel without touching the selection. */
  nextDueUpdated(nextDue: DueDose[], asOf: string): void {
    if (!this.state.activeChild) {
      return;
    }
    this.patch({ activeChild: { ...this.state.activeChild, nextDue, asOf } });
  }

  clearChild(): void {
    this.patch({ activeChild: null, pendingDoses: [] });
  }

  toggleDose(label: string): void {
    if (!this.canRecordDoses) {
      return;
    }
    const selected = this.state.pendingDoses.includes(label)
      ? this.state.pendingDoses.filter((d) => d !== label)
      : [...this.state.pendingDoses, label];
    this.patch({ pendingDoses: selected });
  }

  clearDoseSelection(): void {
    this.patch({ pendingDoses: [] });
  }

  setBanner(banner: Banner | null): void {
    this.patch({ banner });
  }
}

const STORAGE_KEY = 'imz-operator-credentials';

/** Credentials persist for the tab only; a new tab is a new session. */
export function loadStoredCredentials(storage: Storage): Credentials | null {
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) {
    return null;
  }
  try {
    const parsed = JSON.parse(raw) as Partial<Credentials>;
    if (parsed.baseUrl && parsed.apiKey && parsed.centerId) {
      return { baseUrl: parsed.baseUrl, apiKey: parsed.apiKey, centerId: parsed.centerId };
    }
  } catch {
    storage.removeItem(STORAGE_KEY);
  }
  return null;
}

export function storeCredentials(storage: Storage, credentials: Credentials | null): void {
  if (credentials === null) {
    storage.removeItem(STORAGE_KEY);
  } else {
    storage.setItem(STORAGE_KEY, JSON.stringify(credentials));
  }
}
