/**
 * Today's due list for the logged-in center. Clicking a row loads that child
 * into the session and jumps to the Record screen.
 */

import { ApiRequestError, doseLabel } from '../api';
import type { DueListChild } from '../api';
import { el, replaceChildrenOf, todayIso } from '../dom';
import { loadChildIntoSession } from './record';
import type { ScreenContext } from './context';

export function renderDueListScreen(container: HTMLElement, ctx: ScreenContext): void {
  const dateInput = el('input', { id: 'duelist-date', type: 'date' });
  dateInput.value = todayIso();
  const loadButton = el('button', { type: 'button', id: 'duelist-load' }, ['Load due list']);
  const table = el('div', { id: 'duelist-table' });

  loadButton.addEventListener('click', () => {
    void refresh();
  });

  async function refresh(): Promise<void> {
    loadButton.disabled = true;
    try {
      const response = await ctx.client().dueList(ctx.centerId(), dateInput.value);
      renderRows(response.children);
    } catch (err) {
      const message = err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err);
      ctx.session.setBanner({ kind: 'error', text: message });
    } finally {
      loadButton.disabled = false;
    }
  }

  function renderRows(children: DueListChild[]): void {
    if (children.length === 0) {
      replaceChildrenOf(
        table,
        el('p', { id: 'duelist-empty', class: 'muted' }, [
          'No children with pending doses at this center on this date.',
        ]),
      );
      return;
    }
    const rows = children.map((child) => {
      const doses = child.doses.map((dose) =>
        el('span', { class: 'due-chip' }, [
          `${doseLabel(dose.vaccine, dose.dose_number)} `,
          el('span', { class: 'due-date' }, [dose.due_date]),
          ` (${dose.status})`,
        ]),
      );
      const row = el('tr', { class: 'duelist-row', 'data-uid': child.uid }, [
        el('td', {}, [child.child_name]),
        el('td', {}, [child.uid]),
        el('td', {}, [child.guardian_mobile || '—']),
        el('td', {}, doses),
      ]);
      row.addEventListener('click', () => {
        void pickChild(child);
      });
      return row;
    });
    replaceChildrenOf(
      table,
      el('table', {}, [
        el('thead', {}, [
          el('tr', {}, [
            el('th', {}, ['Child']),
            el('th', {}, ['UID']),
            el('th', {}, ['Guardian mobile']),
            el('th', {}, ['Pending doses']),
          ]),
        ]),
        el('tbody', {}, rows),
      ]),
    );
  }

  async function pickChild(child: DueListChild): Promise<void> {
    try {
      await loadChildIntoSession(ctx, child.uid, child.child_name);
      ctx.show('record');
    } catch (err) {
      const message = err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err);
      ctx.session.setBanner({ kind: 'error', text: message });
    }
  }

  replaceChildrenOf(
    container,
    el('h2', {}, ["Today's due list"]),
    el('div', { class: 'lookup-row' }, [el('label', { for: 'duelist-date' }, ['Date']), dateInput, loadButton]),
    table,
  );
}
