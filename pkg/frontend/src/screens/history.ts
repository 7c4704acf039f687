/**
 * Immunization history for the active child — the cardless lookup. Every row
 * comes from the server's history response, including superseded entries,
 * which render struck through.
 */

import { ApiRequestError, doseLabel } from '../api';
import type { HistoryEvent } from '../api';
import { el, replaceChildrenOf } from '../dom';
import type { ScreenContext } from './context';

export function renderHistoryScreen(container: HTMLElement, ctx: ScreenContext): void {
  const heading = el('h2', {}, ['History']);
  const refreshButton = el('button', { type: 'button', id: 'history-refresh' }, ['Refresh']);
  const lockNote = el('p', { id: 'history-lock-note', class: 'muted' }, [
    'Load a child on the Record screen to see their history.',
  ]);
  const table = el('div', { id: 'history-table' });

  refreshButton.addEventListener('click', () => {
    void refresh();
  });

  let lastLoadedUid: string | null = null;

  ctx.session.subscribe(() => {
    const active = ctx.session.snapshot.activeChild;
    lockNote.hidden = active !== null;
    refreshButton.disabled = active === null;
    if (!active) {
      lastLoadedUid = null;
      replaceChildrenOf(table);
      return;
    }
    if (active.uid !== lastLoadedUid) {
      void refresh();
    }
  });
  refreshButton.disabled = ctx.session.snapshot.activeChild === null;

  async function refresh(): Promise<void> {
    const active = ctx.session.snapshot.activeChild;
    if (!active) {
      return;
    }
    try {
      const response = await ctx.client().history(active.uid);
      lastLoadedUid = active.uid;
      renderRows(response.events);
    } catch (err) {
      const message = err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err);
      ctx.session.setBanner({ kind: 'error', text: message });
    }
  }

  function renderRows(events: HistoryEvent[]): void {
    if (events.length === 0) {
      replaceChildrenOf(table, el('p', { class: 'muted', id: 'history-empty' }, ['No doses recorded yet.']));
      return;
    }
    const header = el('tr', {}, [
      el('th', {}, ['Dose']),
      el('th', {}, ['Administered']),
      el('th', {}, ['Center']),
      el('th', {}, ['Batch']),
    ]);
    const rows = events.map((event) =>
      el('tr', { class: event.superseded ? 'superseded history-row' : 'history-row' }, [
        el('td', {}, [doseLabel(event.vaccine, event.dose_number)]),
        el('td', { class: 'administered-date' }, [event.administered_date]),
        el('td', {}, [event.center_id]),
        el('td', {}, [event.batch_id || '—']),
      ]),
    );
    replaceChildrenOf(table, el('table', {}, [el('thead', {}, [header]), el('tbody', {}, rows)]));
  }

  replaceChildrenOf(container, heading, refreshButton, lockNote, table);
}
