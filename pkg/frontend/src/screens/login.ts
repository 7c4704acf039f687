/**
 * Center login: service URL, the center's API key, and its center id. The key
 * is checked against the service before the session starts; it lives in
 * sessionStorage only (one tab = one session).
 */

import { ApiRequestError, RegistryClient } from '../api';
import { el, replaceChildrenOf } from '../dom';
import type { Credentials } from '../session';

export function renderLoginScreen(
  container: HTMLElement,
  onLogin: (credentials: Credentials) => void,
  fetchImpl?: typeof fetch,
): void {
  const urlInput = el('input', { id: 'login-url', value: 'http://127.0.0.1:8000' });
  const keyInput = el('input', { id: 'login-key', type: 'password', autocomplete: 'off' });
  const centerInput = el('input', { id: 'login-center', autocomplete: 'off', placeholder: 'PHC-1' });
  const error = el('p', { class: 'field-error', id: 'login-error' });
  const submit = el('button', { type: 'submit', id: 'login-submit' }, ['Start session']);

  const form = el('form', { id: 'login-form' }, [
    el('label', { for: 'login-url' }, ['Service URL']),
    urlInput,
    el('label', { for: 'login-center' }, ['Center ID']),
    centerInput,
    el('label', { for: 'login-key' }, ['Center API key']),
    keyInput,
    error,
    submit,
  ]);

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void handleSubmit();
  });

  async function handleSubmit(): Promise<void> {
    error.textContent = '';
    const baseUrl = urlInput.value.trim();
    const apiKey = keyInput.value;
    const centerId = centerInput.value.trim();
    if (!baseUrl || !apiKey || !centerId) {
      error.textContent = 'Service URL, center ID, and API key are all required.';
      return;
    }
    submit.disabled = true;
    try {
      const client = new RegistryClient({ baseUrl, apiKey, fetchImpl });
      // healthz needs no key; the due-list probe proves the key works for
      // this center before the operator starts a visit.
      await client.healthz();
      await client.dueList(centerId, new Date().toISOString().slice(0, 10));
      onLogin({ baseUrl, apiKey, centerId });
    } catch (err) {
      if (err instanceof ApiRequestError && err.status === 401) {
        error.textContent = 'The service rejected this API key.';
      } else if (err instanceof ApiRequestError && err.code === 'UNKNOWN_CENTER') {
        error.textContent = 'No center with this ID is registered.';
      } else if (err instanceof ApiRequestError && err.status === 0) {
        error.textContent = `Cannot reach the service at ${baseUrl}.`;
      } else {
        error.textContent = err instanceof Error ? err.message : String(err);
      }
    } finally {
      submit.disabled = false;
    }
  }

  replaceChildrenOf(container, el('h2', {}, ['Center sign-in']), form);
}
