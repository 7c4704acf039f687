/** Shared contract between the app shell and the individual screens. */

import type { RegistryClient } from '../api';
import type { VisitSession } from '../session';

export type ScreenName = 'verify' | 'register' | 'record' | 'history' | 'duelist';

export interface ScreenContext {
  session: VisitSession;
  /** Client for the logged-in center; throws if the session has no credentials. */
  client(): RegistryClient;
  centerId(): string;
  show(screen: ScreenName): void;
}
