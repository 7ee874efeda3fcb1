/** The suggestion bar's model.
 *
 * Permitted steps come from the engine only — the embedded bundle in static
 * mode, the next-steps endpoint in live mode. The UI never derives them from
 * the grammar itself, so it cannot disagree with the engine.
 */

import { Bundle, NextStepsDoc } from './types';

export interface SuggestionModel {
  permitted: string[];
  endOfDialogue: boolean;
  /** per-terminal parameters still needed after the session context */
  requiredParams: Record<string, string[]>;
  optionalParams: Record<string, string[]>;
}

export function suggestionsFromDoc(doc: NextStepsDoc): SuggestionModel {
  const required: Record<string, string[]> = {};
  const optional: Record<string, string[]> = {};
  for (const symbol of doc.permitted) {
    const spec = doc.parameters?.[symbol];
    required[symbol] = spec ? [...spec.required] : [];
    optional[symbol] = spec ? [...spec.optional] : [];
  }
  return {
    permitted: [...doc.permitted],
    endOfDialogue: doc.end_of_dialogue,
    requiredParams: required,
    optionalParams: optional,
  };
}

export function suggestionsFromBundle(bundle: Bundle): SuggestionModel {
  return suggestionsFromDoc(bundle.next_steps);
}

export function isActionable(model: SuggestionModel, symbol: string): boolean {
  return model.permitted.includes(symbol);
}
