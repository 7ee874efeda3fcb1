/** Derivation-tree side view.
 *
 * A compact backtracking parser over the grammar document exported by the
 * engine. This is display-only: the suggestion bar never uses it (permitted
 * steps always come from the engine), so UI and engine cannot disagree on
 * what a user may do.
 */

import { GrammarDoc } from './types';

export interface TreeNode {
  symbol: string;
  kind: 'nonterminal' | 'terminal' | 'epsilon';
  children: TreeNode[];
}

const EPSILON = 'ε';

export function parseSentence(grammar: GrammarDoc, sentence: string[]): TreeNode | null {
  const rulesByLhs = new Map<string, string[][]>();
  for (const rule of grammar.rules) {
    const list = rulesByLhs.get(rule.lhs) ?? [];
    list.push(rule.rhs);
    rulesByLhs.set(rule.lhs, list);
  }
  const terminals = new Set(grammar.terminals);

  // all (node, end) parses of symbol at pos, canonical (rule order) first;
  // `active` blocks non-consuming recursion cycles
  function* parses(
    symbol: string, pos: number, active: Set<string>,
  ): Generator<[TreeNode, number]> {
    if (terminals.has(symbol)) {
      if (sentence[pos] === symbol) {
        yield [{ symbol, kind: 'terminal', children: [] }, pos + 1];
      }
      return;
    }
    const key = `${symbol}@${pos}`;
    if (active.has(key)) return;
    const nested = new Set(active);
    nested.add(key);
    for (const rhs of rulesByLhs.get(symbol) ?? []) {
      if (rhs.length === 0) {
        yield [{
          symbol,
          kind: 'nonterminal',
          children: [{ symbol: EPSILON, kind: 'epsilon', children: [] }],
        }, pos];
        continue;
      }
      yield* sequence(symbol, rhs, 0, pos, nested);
    }
  }

  function* sequence(
    lhs: string, rhs: string[], idx: number, pos: number, active: Set<string>,
  ): Generator<[TreeNode, number]> {
    if (idx === rhs.length) {
      yield [{ symbol: lhs, kind: 'nonterminal', children: [] }, pos];
      return;
    }
    for (const [child, mid] of parses(rhs[idx]!, pos, active)) {
      const rest = sequence(lhs, rhs, idx + 1, mid, mid === pos ? active : new Set());
      for (const [partial, end] of rest) {
        yield [{
          symbol: lhs,
          kind: 'nonterminal',
          children: [child, ...partial.children],
        }, end];
      }
    }
  }

  for (const [tree, end] of parses(grammar.start, 0, new Set())) {
    if (end === sentence.length) return tree;
  }
  return null;
}

export function frontier(node: TreeNode): string[] {
  if (node.kind === 'terminal') return [node.symbol];
  if (node.kind === 'epsilon') return [];
  return node.children.flatMap(frontier);
}

/** Nested-list HTML; terminal leaves get their own class for styling. */
export function treeHtml(node: TreeNode): string {
  const label = node.kind === 'nonterminal'
    ? `<span class="nt">${node.symbol}</span>`
    : `<span class="${node.kind === 'terminal' ? 'terminal-leaf' : 'epsilon-leaf'}">${node.symbol}</span>`;
  if (node.children.length === 0) return `<li>${label}</li>`;
  const children = node.children.map(treeHtml).join('');
  return `<li>${label}<ul>${children}</ul></li>`;
}

export function renderParseTree(grammar: GrammarDoc, sentence: string[]): string {
  const tree = parseSentence(grammar, sentence);
  if (!tree) return '<p class="note">no derivation for the current history</p>';
  return `<ul class="parse-tree">${treeHtml(tree)}</ul>`;
}
