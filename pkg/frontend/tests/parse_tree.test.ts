import { describe, expect, it } from 'vitest';

import { frontier, parseSentence, renderParseTree, treeHtml } from '../src/parse_tree';
import { d1d6Bundle } from './fixtures';

describe('derivation side view', () => {
  it('parses the walkthrough dialogue and reproduces its frontier', () => {
    const bundle = d1d6Bundle();
    const sentence = bundle.history.map((s) => s.symbol);
    const tree = parseSentence(bundle.grammar, sentence);
    expect(tree).not.toBeNull();
    expect(frontier(tree!)).toEqual(sentence);
    expect(tree!.symbol).toBe('explanation');
  });

  it('parses the empty dialogue through the empty data explanation', () => {
    const tree = parseSentence(d1d6Bundle().grammar, []);
    expect(tree).not.toBeNull();
    expect(frontier(tree!)).toEqual([]);
  });

  it('returns null for impossible histories', () => {
    expect(parseSentence(d1d6Bundle().grammar, ['Ceteris_Paribus'])).toBeNull();
  });

  it('marks terminal leaves distinctly in the rendered tree', () => {
    const bundle = d1d6Bundle();
    const html = renderParseTree(bundle.grammar, bundle.history.map((s) => s.symbol));
    expect(html).toContain('class="terminal-leaf"');
    expect(html).toContain('class="nt"');
    expect((html.match(/terminal-leaf/g) ?? []).length).toBe(7);
  });

  it('tree html nests children under their parents', () => {
    const tree = parseSentence(d1d6Bundle().grammar, ['Pairwise_Correlation']);
    const html = treeHtml(tree!);
    expect(html).toContain('<ul>');
    expect(html).toContain('Pairwise_Correlation');
  });
});
