/** Entry point: static mode when a bundle is embedded in the page,
 * live mode against the same-origin API (or ?api=<base>) otherwise. */

import { ApiClient } from './api';
import { DashboardApp } from './app';
import { DashboardStore } from './store';
import { Bundle } from './types';

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) return;

  const holder = document.getElementById('iema-data');
  if (holder) {
    const text = holder.textContent ?? '';
    const bundle = JSON.parse(text) as Bundle;
    const store = new DashboardStore(bundle, 'static');
    new DashboardApp(root, store, text).render();
    return;
  }

  const base = new URLSearchParams(window.location.search).get('api') ?? '';
  const client = new ApiClient(base);
  try {
    const sessionId = await client.createSession();
    const bundle = await client.getBundle(sessionId);
    const store = new DashboardStore(bundle, 'live', client, sessionId);
    new DashboardApp(root, store, JSON.stringify(bundle)).render();
  } catch (err) {
    root.textContent = `could not reach the session service: ${String(err)}`;
  }
}

if (document.readyState === 'loading') {
  document.addEventListener('DOMContentLoaded', () => void boot());
} else {
  void boot();
}
