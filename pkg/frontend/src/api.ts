/** Thin client for the session endpoints; fetch is injected for testing. */

import { Bundle, BoundStepDoc, NextStepsDoc } from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface StepAccepted {
  ok: true;
  step: BoundStepDoc;
  nextSteps: NextStepsDoc;
}

export interface StepRejected {
  ok: false;
  status: number;
  code: string;
  message: string;
  permittedSteps?: string[];
}

export type StepOutcome = StepAccepted | StepRejected;

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async json(url: string, init?: RequestInit): Promise<Response> {
    return this.fetchFn(this.base + url, {
      headers: { 'content-type': 'application/json' },
      ...init,
    });
  }

  async createSession(seed?: number): Promise<string> {
    const resp = await this.json('/sessions', {
      method: 'POST',
      body: JSON.stringify(seed === undefined ? {} : { seed }),
    });
    if (!resp.ok) throw new Error(`session creation failed: ${resp.status}`);
    return (await resp.json()).id as string;
  }

  async getBundle(sessionId: string): Promise<Bundle> {
    const resp = await this.json(`/sessions/${sessionId}`);
    if (!resp.ok) throw new Error(`bundle fetch failed: ${resp.status}`);
    return resp.json();
  }

  async getNextSteps(sessionId: string): Promise<NextStepsDoc> {
    const resp = await this.json(`/sessions/${sessionId}/next-steps`);
    if (!resp.ok) throw new Error(`next-steps fetch failed: ${resp.status}`);
    return resp.json();
  }

  async submitStep(
    sessionId: string, symbol: string, params: Record<string, unknown>,
  ): Promise<StepOutcome> {
    const resp = await this.json(`/sessions/${sessionId}/steps`, {
      method: 'POST',
      body: JSON.stringify({ symbol, params }),
    });
    const body = await resp.json();
    if (resp.ok) {
      return { ok: true, step: body.step, nextSteps: body.next_steps };
    }
    return {
      ok: false,
      status: resp.status,
      code: body.code ?? 'error',
      message: body.message ?? `status ${resp.status}`,
      permittedSteps: body.permitted_steps,
    };
  }

  async undo(sessionId: string): Promise<{ ok: boolean; nextSteps?: NextStepsDoc }> {
    const resp = await this.json(`/sessions/${sessionId}/steps/last`, { method: 'DELETE' });
    if (!resp.ok) return { ok: false };
    const body = await resp.json();
    return { ok: true, nextSteps: body.next_steps };
  }
}
