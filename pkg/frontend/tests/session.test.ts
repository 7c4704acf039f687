import { describe, expect, it } from 'vitest';

import { loadStoredCredentials, storeCredentials, VisitSession } from '../src/session';
import type { GuardianPayload } from '../src/api';
import { FakeStorage, TEST_CREDENTIALS } from './helpers';

const GUARDIAN: GuardianPayload = {
  uid: '512345678903',
  name: 'Asha Rao',
  mobile: '+919812345678',
  guardian_type: 'PARENT',
};

function activeChild(uid = '234567890128') {
  return {
    uid,
    childName: 'Ravi',
    nextDue: [{ vaccine: 'BCG', dose_number: 1, due_date: '2026-08-22', status: 'DUE' }],
    asOf: '2026-08-22',
  };
}

describe('VisitSession gating', () => {
  it('starts with both registration and dose recording locked', () => {
    const session = new VisitSession();
    expect(session.isLoggedIn).toBe(false);
    expect(session.canRegister).toBe(false);
    expect(session.canRecordDoses).toBe(false);
  });

  it('unlocks registration only after a guardian is verified', () => {
    const session = new VisitSession();
    session.logIn(TEST_CREDENTIALS);
    expect(session.canRegister).toBe(false);
    session.guardianVerified(GUARDIAN);
    expect(session.canRegister).toBe(true);
    session.clearGuardian();
    expect(session.canRegister).toBe(false);
  });

  it('unlocks dose recording only after a child is loaded', () => {
    const session = new VisitSession();
    expect(session.canRecordDoses).toBe(false);
    session.childLoaded(activeChild());
    expect(session.canRecordDoses).toBe(true);
    session.clearChild();
    expect(session.canRecordDoses).toBe(false);
  });

  it('ignores dose toggles while no child is active', () => {
    const session = new VisitSession();
    session.toggleDose('BCG-1');
    expect(session.snapshot.pendingDoses).toEqual([]);
  });

  it('toggles doses on and off for an active child', () => {
    const session = new VisitSession();
    session.childLoaded(activeChild());
    session.toggleDose('BCG-1');
    session.toggleDose('OPV-0');
    expect(session.snapshot.pendingDoses).toEqual(['BCG-1', 'OPV-0']);
    session.toggleDose('BCG-1');
    expect(session.snapshot.pendingDoses).toEqual(['OPV-0']);
  });

  it('drops the dose selection when a different child is loaded', () => {
    const session = new VisitSession();
    session.childLoaded(activeChild('234567890128'));
    session.toggleDose('BCG-1');
    session.childLoaded(activeChild('345678901234'));
    expect(session.snapshot.pendingDoses).toEqual([]);
    expect(session.canRecordDoses).toBe(true);
  });

  it('updates the due panel without touching the selection', () => {
    const session = new VisitSession();
    session.childLoaded(activeChild());
    session.toggleDose('BCG-1');
    const refreshed = [{ vaccine: 'OPV', dose_number: 1, due_date: '2026-10-03', status: 'DUE' }];
    session.nextDueUpdated(refreshed, '2026-08-22');
    expect(session.snapshot.activeChild?.nextDue).toEqual(refreshed);
    expect(session.snapshot.pendingDoses).toEqual(['BCG-1']);
  });

  it('ignores due-panel updates when no child is active', () => {
    const session = new VisitSession();
    session.nextDueUpdated([], '2026-08-22');
    expect(session.snapshot.activeChild).toBeNull();
  });

  it('clears everything on logout', () => {
    const session = new VisitSession();
    session.logIn(TEST_CREDENTIALS);
    session.guardianVerified(GUARDIAN);
    session.childLoaded(activeChild());
    session.toggleDose('BCG-1');
    session.setBanner({ kind: 'info', text: 'hello' });
    session.logOut();
    expect(session.snapshot).toEqual({
      credentials: null,
      verifiedGuardian: null,
      activeChild: null,
      pendingDoses: [],
      banner: null,
    });
  });

  it('notifies subscribers on every transition and supports unsubscribe', () => {
    const session = new VisitSession();
    const seen: boolean[] = [];
    const unsubscribe = session.subscribe((state) => seen.push(state.verifiedGuardian !== null));
    session.guardianVerified(GUARDIAN);
    session.clearGuardian();
    unsubscribe();
    session.guardianVerified(GUARDIAN);
    expect(seen).toEqual([true, false]);
  });
});

describe('credential storage', () => {
  it('round-trips credentials through storage', () => {
    const storage = new FakeStorage();
    storeCredentials(storage, TEST_CREDENTIALS);
    expect(loadStoredCredentials(storage)).toEqual(TEST_CREDENTIALS);
    storeCredentials(storage, null);
    expect(loadStoredCredentials(storage)).toBeNull();
  });

  it('treats malformed stored values as absent', () => {
    const storage = new FakeStorage();
    storage.setItem('imz-operator-credentials', '{not json');
    expect(loadStoredCredentials(storage)).toBeNull();
    storage.setItem('imz-operator-credentials', JSON.stringify({ baseUrl: 'x' }));
    expect(loadStoredCredentials(storage)).toBeNull();
  });
});
