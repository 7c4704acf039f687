/**
 * Infant registration screen. Locked until a guardian is verified; submits
 * with one idempotency key per intent so a double-click or retry after an
 * outage can never create a second child.
 */

import { ApiRequestError, newIdempotencyKey } from '../api';
import type { RegistrationResponse } from '../api';
import { el, replaceChildrenOf, todayIso } from '../dom';
import type { ScreenContext } from './context';

export function renderRegisterScreen(container: HTMLElement, ctx: ScreenContext): void {
  const nameInput = el('input', { id: 'child-name', autocomplete: 'off' });
  const dobInput = el('input', { id: 'child-dob', type: 'date', max: todayIso() });
  const sexSelect = el('select', { id: 'child-sex' }, [
    el('option', { value: 'F' }, ['Female']),
    el('option', { value: 'M' }, ['Male']),
    el('option', { value: 'X' }, ['Unspecified']),
  ]);
  const placeInput = el('input', { id: 'child-place', autocomplete: 'off' });
  const nameError = el('p', { class: 'field-error', id: 'child-name-error' });
  const dobError = el('p', { class: 'field-error', id: 'child-dob-error' });
  const placeError = el('p', { class: 'field-error', id: 'child-place-error' });
  const submit = el('button', { type: 'submit', id: 'register-submit' }, ['Register infant']);
  const guardianLine = el('p', { id: 'register-guardian-line', class: 'muted' });
  const lockNote = el('p', { id: 'register-lock-note', class: 'muted' }, [
    'Verify a guardian first to unlock this form.',
  ]);
  const result = el('div', { id: 'register-result', class: 'status-panel' });

  const fieldset = el('fieldset', { id: 'register-fieldset', disabled: true }, [
    el('label', { for: 'child-name' }, ['Child name']),
    nameInput,
    nameError,
    el('label', { for: 'child-dob' }, ['Date of birth']),
    dobInput,
    dobError,
    el('label', { for: 'child-sex' }, ['Sex']),
    sexSelect,
    el('label', { for: 'child-place' }, ['Place of birth']),
    placeInput,
    placeError,
    submit,
  ]);
  const form = el('form', { id: 'register-form' }, [guardianLine, lockNote, fieldset]);

  // One idempotency key per registration intent: minted on the first submit,
  // kept across retries of the same intent, dropped once the intent succeeds
  // or the operator edits the form (which makes it a new intent).
  let intentKey: string | null = null;
  let inFlight = false;

  for (const input of [nameInput, dobInput, placeInput]) {
    input.addEventListener('input', () => {
      intentKey = null;
    });
  }
  sexSelect.addEventListener('change', () => {
    intentKey = null;
  });

  ctx.session.subscribe(() => {
    syncGuardianState();
  });
  syncGuardianState();

  function syncGuardianState(): void {
    const guardian = ctx.session.snapshot.verifiedGuardian;
    fieldset.disabled = guardian === null;
    lockNote.hidden = guardian !== null;
    guardianLine.textContent = guardian
      ? `Guardian: ${guardian.name} (${guardian.uid}, ${guardian.guardian_type})`
      : '';
  }

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void handleSubmit();
  });

  async function handleSubmit(): Promise<void> {
    const guardian = ctx.session.snapshot.verifiedGuardian;
    if (!guardian || inFlight) {
      return;
    }
    nameError.textContent = '';
    dobError.textContent = '';
    placeError.textContent = '';

    const childName = nameInput.value.trim();
    const dob = dobInput.value;
    const place = placeInput.value.trim();
    let valid = true;
    if (!childName) {
      nameError.textContent = 'Child name is required.';
      valid = false;
    }
    if (!dob) {
      dobError.textContent = 'Date of birth is required.';
      valid = false;
    } else if (dob > todayIso()) {
      dobError.textContent = 'Date of birth cannot be in the future.';
      valid = false;
    }
    if (!place) {
      placeError.textContent = 'Place of birth is required.';
      valid = false;
    }
    if (!valid) {
      return;
    }

    intentKey ??= newIdempotencyKey();
    const key = intentKey;
    const body = {
      child_name: childName,
      date_of_birth: dob,
      sex: sexSelect.value as 'F' | 'M' | 'X',
      place_of_birth: place,
      guardian,
    };

    inFlight = true;
    submit.disabled = true;
    try {
      const response = await ctx.client().register(body, key);
      intentKey = null;
      clearForm();
      renderResult(response);
      await loadRegisteredChild(response);
      ctx.session.setBanner({
        kind: 'success',
        text: `Registered ${response.child.child_name} with UID ${response.uid}.`,
      });
    } catch (err) {
      if (err instanceof ApiRequestError && err.retryable) {
        ctx.session.setBanner({
          kind: 'error',
          text: `Registration not confirmed (${err.message}). Your entries are preserved; retry sends the same request.`,
          retry: () => void handleSubmit(),
        });
      } else {
        const message = err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err);
        intentKey = null;
        ctx.session.setBanner({ kind: 'error', text: `Registration rejected — ${message}` });
      }
    } finally {
      inFlight = false;
      submit.disabled = false;
    }
  }

  // After a successful registration the fields are emptied so that pressing
  // submit again cannot re-send the same child as a new intent; the next
  // registration starts from a blank form.
  function clearForm(): void {
    nameInput.value = '';
    dobInput.value = '';
    placeInput.value = '';
    nameError.textContent = '';
    dobError.textContent = '';
    placeError.textContent = '';
  }

  function renderResult(response: RegistrationResponse): void {
    const certificate = response.certificate;
    replaceChildrenOf(
      result,
      el('h3', {}, ['Registration complete']),
      el('p', { id: 'registered-uid', class: 'uid-display' }, [response.uid]),
      el('p', {}, [response.created ? 'New record created.' : 'Already registered (same request replayed).']),
      el('div', { id: 'certificate-panel' }, [
        el('h4', {}, ['Birth certificate']),
        el('dl', {}, [
          el('dt', {}, ['Certificate ID']),
          el('dd', { id: 'certificate-id' }, [certificate.certificate_id]),
          el('dt', {}, ['Issued at']),
          el('dd', {}, [certificate.issued_at]),
          el('dt', {}, ['Issuing center']),
          el('dd', {}, [certificate.issuing_center]),
          el('dt', {}, ['Digest']),
          el('dd', { class: 'digest' }, [certificate.digest]),
        ]),
        el('pre', { class: 'certificate-text' }, [certificate.canonical_text]),
      ]),
    );
  }

  async function loadRegisteredChild(response: RegistrationResponse): Promise<void> {
    try {
      const due = await ctx.client().nextDue(response.uid);
      ctx.session.childLoaded({
        uid: response.uid,
        childName: response.child.child_name,
        nextDue: due.doses,
        asOf: due.as_of,
      });
    } catch {
      // The child exists even if the due fetch failed; let the record screen retry.
      ctx.session.childLoaded({
        uid: response.uid,
        childName: response.child.child_name,
        nextDue: [],
        asOf: '',
      });
    }
  }

  replaceChildrenOf(container, el('h2', {}, ['Register infant']), form, result);
}
