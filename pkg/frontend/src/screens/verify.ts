/**
 * Guardian verification screen: the first desk step. A successful check
 * unlocks the registration form for this session.
 */

import { ApiRequestError } from '../api';
import type { GuardianPayload } from '../api';
import { el, replaceChildrenOf } from '../dom';
import type { ScreenContext } from './context';

const MOBILE_PATTERN = /^\+\d{8,15}$/;

export function renderVerifyScreen(container: HTMLElement, ctx: ScreenContext): void {
  const uidInput = el('input', { id: 'guardian-uid', autocomplete: 'off', maxlength: '12' });
  const nameInput = el('input', { id: 'guardian-name', autocomplete: 'off' });
  const mobileInput = el('input', { id: 'guardian-mobile', placeholder: '+919812345678' });
  const typeSelect = el('select', { id: 'guardian-type' }, [
    el('option', { value: 'PARENT' }, ['Parent']),
    el('option', { value: 'GUARDIAN' }, ['Guardian']),
    el('option', { value: 'ORPHANAGE' }, ['Orphanage owner']),
  ]);
  const uidError = el('p', { class: 'field-error', id: 'guardian-uid-error' });
  const nameError = el('p', { class: 'field-error', id: 'guardian-name-error' });
  const mobileError = el('p', { class: 'field-error', id: 'guardian-mobile-error' });
  const status = el('div', { id: 'verify-status', class: 'status-panel' });
  const submit = el('button', { type: 'submit', id: 'verify-submit' }, ['Verify guardian']);

  const form = el('form', { id: 'verify-form' }, [
    el('label', { for: 'guardian-uid' }, ['Guardian UID']),
    uidInput,
    uidError,
    el('label', { for: 'guardian-name' }, ['Guardian name']),
    nameInput,
    nameError,
    el('label', { for: 'guardian-mobile' }, ['Mobile']),
    mobileInput,
    mobileError,
    el('label', { for: 'guardian-type' }, ['Relationship']),
    typeSelect,
    submit,
  ]);

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void handleSubmit();
  });

  async function handleSubmit(): Promise<void> {
    uidError.textContent = '';
    nameError.textContent = '';
    mobileError.textContent = '';
    replaceChildrenOf(status);

    const uid = uidInput.value.trim();
    const name = nameInput.value.trim();
    const mobile = mobileInput.value.trim();
    let valid = true;
    if (!/^\d{12}$/.test(uid)) {
      uidError.textContent = 'UID must be exactly 12 digits.';
      valid = false;
    }
    if (!name) {
      nameError.textContent = 'Name is required.';
      valid = false;
    }
    if (!MOBILE_PATTERN.test(mobile)) {
      mobileError.textContent = 'Mobile must be + followed by 8-15 digits.';
      valid = false;
    }
    if (!valid) {
      return;
    }

    submit.disabled = true;
    try {
      const response = await ctx.client().verifyGuardian(uid, name);
      if (response.result === 'VERIFIED') {
        const guardian: GuardianPayload = {
          uid,
          name,
          mobile,
          guardian_type: typeSelect.value as GuardianPayload['guardian_type'],
        };
        ctx.session.guardianVerified(guardian);
        replaceChildrenOf(
          status,
          el('p', { class: 'ok' }, [`Verified: ${name}. Registration is now unlocked.`]),
        );
        ctx.session.setBanner({ kind: 'success', text: `Guardian ${name} verified.` });
      } else if (response.result === 'NAME_MISMATCH') {
        ctx.session.clearGuardian();
        nameError.textContent = 'Name does not match the identity record.';
        replaceChildrenOf(status, el('p', { class: 'bad' }, ['Verification failed: NAME_MISMATCH']));
      } else {
        ctx.session.clearGuardian();
        uidError.textContent = 'UID not found in the identity directory.';
        replaceChildrenOf(status, el('p', { class: 'bad' }, ['Verification failed: UNKNOWN_UID']));
      }
    } catch (err) {
      const message = err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err);
      ctx.session.setBanner({ kind: 'error', text: message });
    } finally {
      submit.disabled = false;
    }
  }

  replaceChildrenOf(container, el('h2', {}, ['Verify guardian']), form, status);
}
