/** Dashboard state and transitions, kept DOM-free so tests drive it directly.
 *
 * Invariants:
 *  - the panel list changes only on an accepted step or a confirmed undo;
 *    any rejection (including a raw 409) leaves it untouched;
 *  - the suggestion model is replaced only by engine responses;
 *  - at most one submission is in flight.
 */

import { ApiClient, StepOutcome } from './api';
import { buildPanels, PanelModel, panelKindFor } from './panels';
import { SuggestionModel, isActionable, suggestionsFromBundle, suggestionsFromDoc } from './suggestions';
import { Bundle } from './types';

export type Mode = 'static' | 'live';

export interface DashboardState {
  mode: Mode;
  bundle: Bundle;
  sessionId?: string;
  panels: PanelModel[];
  suggestions: SuggestionModel;
  pending: boolean;
  lastError?: string;
}

export class DashboardStore {
  state: DashboardState;
  private listeners: (() => void)[] = [];

  constructor(bundle: Bundle, mode: Mode, private client?: ApiClient, sessionId?: string) {
    this.state = {
      mode,
      bundle,
      sessionId,
      panels: buildPanels(bundle.history),
      suggestions: suggestionsFromBundle(bundle),
      pending: false,
    };
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l();
  }

  /** Steps the suggestion bar may offer; rendering anything else is a bug. */
  actionableSteps(): string[] {
    return this.state.suggestions.permitted;
  }

  canSubmit(symbol: string): boolean {
    return (
      this.state.mode === 'live'
      && !this.state.pending
      && isActionable(this.state.suggestions, symbol)
    );
  }

  async submitStep(symbol: string, params: Record<string, unknown>): Promise<StepOutcome | null> {
    if (!this.canSubmit(symbol) || !this.client || !this.state.sessionId) {
      return null; // not actionable: the UI never reaches the engine with it
    }
    this.state.pending = true;
    this.state.lastError = undefined;
    this.emit();
    let outcome: StepOutcome;
    try {
      outcome = await this.client.submitStep(this.state.sessionId, symbol, params);
    } catch (err) {
      // network failure: state untouched, surface a retry affordance
      this.state.pending = false;
      this.state.lastError = `network failure: ${String(err)} — retry`;
      this.emit();
      return null;
    }
    this.state.pending = false;
    if (outcome.ok) {
      this.state.bundle.history.push(outcome.step);
      this.state.panels = [...this.state.panels, {
        stepIndex: this.state.panels.length,
        symbol: outcome.step.symbol,
        kind: panelKindFor(outcome.step.symbol),
        payload: outcome.step.payload,
      }];
      this.state.suggestions = suggestionsFromDoc(outcome.nextSteps);
    } else {
      this.state.lastError = outcome.message;
      if (outcome.permittedSteps) {
        // a stale submission: show the engine's permitted set, panels unchanged
        this.state.suggestions = {
          ...this.state.suggestions,
          permitted: [...outcome.permittedSteps],
        };
      }
    }
    this.emit();
    return outcome;
  }

  async undo(): Promise<boolean> {
    if (this.state.mode !== 'live' || this.state.pending
        || !this.client || !this.state.sessionId) {
      return false;
    }
    this.state.pending = true;
    this.emit();
    let result: { ok: boolean; nextSteps?: { permitted: string[]; end_of_dialogue: boolean } };
    try {
      result = await this.client.undo(this.state.sessionId);
    } catch {
      this.state.pending = false;
      this.state.lastError = 'network failure during undo — retry';
      this.emit();
      return false;
    }
    this.state.pending = false;
    if (result.ok) {
      this.state.bundle.history.pop();
      this.state.panels = this.state.panels.slice(0, -1);
      if (result.nextSteps) {
        this.state.suggestions = suggestionsFromDoc(result.nextSteps);
      }
    }
    this.emit();
    return result.ok;
  }

  async refreshSuggestions(): Promise<void> {
    if (this.state.mode !== 'live' || !this.client || !this.state.sessionId) return;
    const doc = await this.client.getNextSteps(this.state.sessionId);
    this.state.suggestions = suggestionsFromDoc(doc);
    this.emit();
  }
}
