/**
 * Dose recording screen. A child must be loaded before anything can be
 * recorded; the pending-doses checkboxes and the next-due panel are both
 * rendered straight from server responses — the client never computes a due
 * date or status itself.
 */

import { ApiRequestError, doseLabel } from '../api';
import type { DueDose } from '../api';
import { newIdempotencyKey } from '../api';
import { el, replaceChildrenOf, todayIso } from '../dom';
import type { ScreenContext } from './context';

/** Load a child into the session from any screen (record form, due-list row). */
export async function loadChildIntoSession(
  ctx: ScreenContext,
  uid: string,
  childName: string | null = null,
): Promise<void> {
  const due = await ctx.client().nextDue(uid);
  ctx.session.childLoaded({ uid, childName, nextDue: due.doses, asOf: due.as_of });
}

export function renderRecordScreen(container: HTMLElement, ctx: ScreenContext): void {
  const uidInput = el('input', { id: 'record-uid', autocomplete: 'off', maxlength: '12' });
  const loadButton = el('button', { type: 'button', id: 'record-load' }, ['Load child']);
  const loadError = el('p', { class: 'field-error', id: 'record-load-error' });
  const childLine = el('p', { id: 'record-child-line', class: 'muted' });
  const lockNote = el('p', { id: 'record-lock-note', class: 'muted' }, [
    'Load a child by UID (or pick one from the due list) to record doses.',
  ]);
  const doseBoxes = el('div', { id: 'dose-checkboxes' });
  const dateInput = el('input', { id: 'record-date', type: 'date', max: todayIso() });
  dateInput.value = todayIso();
  const recordButton = el('button', { type: 'submit', id: 'record-submit', disabled: true }, [
    'Record selected doses',
  ]);
  const outcome = el('div', { id: 'record-outcome', class: 'status-panel' });
  const duePanel = el('div', { id: 'next-due-panel' });

  const form = el('form', { id: 'record-form' }, [
    el('div', { class: 'lookup-row' }, [
      el('label', { for: 'record-uid' }, ['Child UID']),
      uidInput,
      loadButton,
    ]),
    loadError,
    childLine,
    lockNote,
    el('h3', {}, ['Pending doses']),
    doseBoxes,
    el('label', { for: 'record-date' }, ['Administered on']),
    dateInput,
    recordButton,
  ]);

  // One idempotency key per recording intent (child + selection + date);
  // retries of a failed submit reuse it, edits mint a new one.
  let intentKey: string | null = null;
  let inFlight = false;

  dateInput.addEventListener('input', () => {
    intentKey = null;
  });

  loadButton.addEventListener('click', () => {
    void handleLoad();
  });
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void handleRecord();
  });

  ctx.session.subscribe(() => {
    syncFromSession();
  });
  syncFromSession();

  async function handleLoad(): Promise<void> {
    loadError.textContent = '';
    const uid = uidInput.value.trim();
    if (!/^\d{12}$/.test(uid)) {
      loadError.textContent = 'UID must be exactly 12 digits.';
      return;
    }
    loadButton.disabled = true;
    try {
      await loadChildIntoSession(ctx, uid);
      replaceChildrenOf(outcome);
    } catch (err) {
      if (err instanceof ApiRequestError && err.code === 'UNKNOWN_CHILD') {
        loadError.textContent = 'No child registered under this UID.';
      } else {
        const message = err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err);
        ctx.session.setBanner({ kind: 'error', text: message });
      }
    } finally {
      loadButton.disabled = false;
    }
  }

  function syncFromSession(): void {
    const active = ctx.session.snapshot.activeChild;
    lockNote.hidden = active !== null;
    if (!active) {
      childLine.textContent = '';
      replaceChildrenOf(doseBoxes);
      replaceChildrenOf(duePanel);
      recordButton.disabled = true;
      return;
    }
    childLine.textContent = active.childName
      ? `Child: ${active.childName} — UID ${active.uid}`
      : `Child UID ${active.uid}`;
    if (uidInput.value.trim() === '') {
      uidInput.value = active.uid;
    }
    renderDoseCheckboxes(active.nextDue);
    renderDuePanel(active.nextDue, active.asOf);
    recordButton.disabled = ctx.session.snapshot.pendingDoses.length === 0;
  }

  function renderDoseCheckboxes(nextDue: DueDose[]): void {
    const selected = new Set(ctx.session.snapshot.pendingDoses);
    replaceChildrenOf(
      doseBoxes,
      ...(nextDue.length === 0
        ? [el('p', { class: 'muted', id: 'dose-empty' }, ['Nothing pending for this child.'])]
        : nextDue.map((dose) => {
            const label = doseLabel(dose.vaccine, dose.dose_number);
            const checkbox = el('input', {
              type: 'checkbox',
              id: `dose-${label}`,
              value: label,
              checked: selected.has(label),
              onchange: () => {
                intentKey = null;
                ctx.session.toggleDose(label);
              },
            });
            return el('div', { class: 'dose-row' }, [
              checkbox,
              el('label', { for: `dose-${label}` }, [
                `${label} — due `,
                el('span', { class: 'due-date' }, [dose.due_date]),
                ` (${dose.status})`,
              ]),
            ]);
          })),
    );
  }

  function renderDuePanel(nextDue: DueDose[], asOf: string): void {
    replaceChildrenOf(
      duePanel,
      el('h3', {}, [`Next due${asOf ? ` as of ${asOf}` : ''}`]),
      nextDue.length === 0
        ? el('p', { id: 'due-empty', class: 'muted' }, ['Schedule complete — nothing due.'])
        : el('ul', {}, [
            ...nextDue.map((dose) =>
              el('li', { class: 'due-item' }, [
                `${doseLabel(dose.vaccine, dose.dose_number)}: `,
                el('span', { class: 'due-date' }, [dose.due_date]),
                ` (${dose.status})`,
              ]),
            ),
          ]),
    );
  }

  async function handleRecord(): Promise<void> {
    const active = ctx.session.snapshot.activeChild;
    const selection = ctx.session.snapshot.pendingDoses;
    if (!active || selection.length === 0 || inFlight) {
      return;
    }
    const doses = selection.map((label) => {
      const [vaccine, dose] = label.split('-');
      return { vaccine: vaccine ?? '', dose_number: Number(dose) };
    });
    intentKey ??= newIdempotencyKey();
    const key = intentKey;

    inFlight = true;
    recordButton.disabled = true;
    try {
      const response = await ctx.client().recordDoses(active.uid, doses, dateInput.value, key);
      intentKey = null;
      renderOutcome(response.accepted, response.duplicates, response.conflicts);
      // The refreshed panel is exactly what the server returned with this
      // vaccination — no local recomputation.
      ctx.session.clearDoseSelection();
      ctx.session.nextDueUpdated(response.next_due, dateInput.value);
    } catch (err) {
      if (err instanceof ApiRequestError && err.retryable) {
        ctx.session.setBanner({
          kind: 'error',
          text: `Recording not confirmed (${err.message}). Selection preserved; retry sends the same request.`,
          retry: () => void handleRecord(),
        });
      } else {
        const message = err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err);
        intentKey = null;
        ctx.session.setBanner({ kind: 'error', text: `Recording rejected — ${message}` });
      }
    } finally {
      inFlight = false;
      recordButton.disabled = ctx.session.snapshot.pendingDoses.length === 0;
    }
  }

  function renderOutcome(accepted: string[], duplicates: string[], conflicts: string[]): void {
    const rows: HTMLElement[] = [];
    for (const label of accepted) {
      rows.push(el('p', { class: 'ok outcome-row' }, [`${label}: recorded`]));
    }
    for (const label of duplicates) {
      rows.push(el('p', { class: 'muted outcome-row' }, [`${label}: already recorded (ignored)`]));
    }
    for (const label of conflicts) {
      rows.push(
        el('p', { class: 'bad outcome-row' }, [
          `${label}: conflicts with an earlier record — the earlier date stands`,
        ]),
      );
    }
    replaceChildrenOf(outcome, ...rows);
  }

  replaceChildrenOf(container, el('h2', {}, ['Record doses']), form, outcome, duePanel);
}
