/**
 * Application shell: sign-in gate, tab navigation in the desk's working order
 * (Verify → Register → Record → History → Due list), and the shared banner.
 */

import { RegistryClient } from './api';
import { el, replaceChildrenOf } from './dom';
import { loadStoredCredentials, storeCredentials, VisitSession } from './session';
import type { Credentials } from './session';
import type { ScreenContext, ScreenName } from './screens/context';
import { renderDueListScreen } from './screens/duelist';
import { renderHistoryScreen } from './screens/history';
import { renderLoginScreen } from './screens/login';
import { renderRecordScreen } from './screens/record';
import { renderRegisterScreen } from './screens/register';
import { renderVerifyScreen } from './screens/verify';

const SCREENS: Array<{ name: ScreenName; title: string }> = [
  { name: 'verify', title: 'Verify guardian' },
  { name: 'register', title: 'Register infant' },
  { name: 'record', title: 'Record doses' },
  { name: 'history', title: 'History' },
  { name: 'duelist', title: 'Due list' },
];

export interface AppOptions {
  storage?: Storage;
  fetchImpl?: typeof fetch;
}

export interface App {
  session: VisitSession;
  show(screen: ScreenName): void;
}

export function createApp(root: HTMLElement, options: AppOptions = {}): App {
  const storage = options.storage ?? window.sessionStorage;
  const session = new VisitSession();
  let client: RegistryClient | null = null;

  const banner = el('div', { id: 'banner', hidden: true });
  const nav = el('nav', { id: 'tabs' });
  const screenHost = el('main', { id: 'screen-host' });
  const header = el('header', {}, [
    el('h1', {}, ['Immunization desk']),
    el('span', { id: 'session-center', class: 'muted' }),
    el('button', { type: 'button', id: 'logout', hidden: true }, ['End session']),
  ]);
  replaceChildrenOf(root, header, banner, nav, screenHost);

  const logoutButton = header.querySelector<HTMLButtonElement>('#logout')!;
  const centerLabel = header.querySelector<HTMLSpanElement>('#session-center')!;
  logoutButton.addEventListener('click', () => {
    storeCredentials(storage, null);
    client = null;
    session.logOut();
    mountLogin();
  });

  const ctx: ScreenContext = {
    session,
    client(): RegistryClient {
      if (!client) {
        const credentials = session.snapshot.credentials;
        if (!credentials) {
          throw new Error('no active session');
        }
        client = new RegistryClient({
          baseUrl: credentials.baseUrl,
          apiKey: credentials.apiKey,
          fetchImpl: options.fetchImpl,
        });
      }
      return client;
    },
    centerId(): string {
      const credentials = session.snapshot.credentials;
      if (!credentials) {
        throw new Error('no active session');
      }
      return credentials.centerId;
    },
    show(screen: ScreenName): void {
      showScreen(screen);
    },
  };

  session.subscribe((state) => {
    if (state.banner) {
      banner.hidden = false;
      banner.className = `banner-${state.banner.kind}`;
      const retry = state.banner.retry;
      replaceChildrenOf(
        banner,
        el('span', {}, [state.banner.text]),
        ...(retry
          ? [el('button', { type: 'button', id: 'banner-retry', onclick: () => retry() }, ['Retry'])]
          : []),
        el('button', {
          type: 'button',
          id: 'banner-dismiss',
          onclick: () => session.setBanner(null),
        }, ['Dismiss']),
      );
    } else {
      banner.hidden = true;
      replaceChildrenOf(banner);
    }
  });

  const screenContainers = new Map<ScreenName, HTMLElement>();
  const tabButtons = new Map<ScreenName, HTMLButtonElement>();

  function mountTabs(): void {
    replaceChildrenOf(
      nav,
      ...SCREENS.map(({ name, title }) => {
        const button = el('button', { type: 'button', class: 'tab', 'data-screen': name }, [title]);
        button.addEventListener('click', () => showScreen(name));
        tabButtons.set(name, button);
        return button;
      }),
    );
  }

  function mountScreens(): void {
    replaceChildrenOf(screenHost);
    for (const { name } of SCREENS) {
      const container = el('section', { class: 'screen', 'data-screen': name, hidden: true });
      screenContainers.set(name, container);
      screenHost.append(container);
    }
    renderVerifyScreen(screenContainers.get('verify')!, ctx);
    renderRegisterScreen(screenContainers.get('register')!, ctx);
    renderRecordScreen(screenContainers.get('record')!, ctx);
    renderHistoryScreen(screenContainers.get('history')!, ctx);
    renderDueListScreen(screenContainers.get('duelist')!, ctx);
  }

  function showScreen(name: ScreenName): void {
    for (const [screen, container] of screenContainers) {
      container.hidden = screen !== name;
    }
    for (const [screen, button] of tabButtons) {
      button.classList.toggle('active', screen === name);
    }
  }

  function startSession(credentials: Credentials): void {
    client = null;
    session.logIn(credentials);
    centerLabel.textContent = `Center ${credentials.centerId}`;
    logoutButton.hidden = false;
    mountTabs();
    mountScreens();
    showScreen('verify');
  }

  function mountLogin(): void {
    centerLabel.textContent = '';
    logoutButton.hidden = true;
    replaceChildrenOf(nav);
    tabButtons.clear();
    screenContainers.clear();
    replaceChildrenOf(screenHost);
    const container = el('section', { class: 'screen' });
    screenHost.append(container);
    renderLoginScreen(
      container,
      (credentials) => {
        storeCredentials(storage, credentials);
        startSession(credentials);
      },
      options.fetchImpl,
    );
  }

  const stored = loadStoredCredentials(storage);
  if (stored) {
    startSession(stored);
  } else {
    mountLogin();
  }

  return { session, show: showScreen };
}
