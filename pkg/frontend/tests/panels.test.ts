import { describe, expect, it } from 'vitest';

import { buildPanels, panelKindFor, renderPanelSvg, PANEL_KIND_BY_SYMBOL } from '../src/panels';
import { d1d6Bundle } from './fixtures';

describe('panel models', () => {
  it('renders seven panels of the correct kinds for the walkthrough bundle', () => {
    const panels = buildPanels(d1d6Bundle().history);
    expect(panels).toHaveLength(7);
    expect(panels.map((p) => p.kind)).toEqual([
      'attribution-bars',
      'selection-marker',
      'profile-line-anchored',
      'histogram',
      'profile-line',
      'scatter-mean-curve',
      'importance-bars',
    ]);
  });

  it('kind is a function of the terminal symbol alone', () => {
    expect(panelKindFor('SHAP_Attribution')).toBe('attribution-bars');
    expect(panelKindFor('BD_Attribution')).toBe('attribution-bars');
    expect(panelKindFor('LOCO_Importance')).toBe('importance-bars');
    expect(panelKindFor('Mosaic_Plot')).toBe('mosaic');
    expect(() => panelKindFor('Unknown_Step')).toThrow();
    expect(Object.keys(PANEL_KIND_BY_SYMBOL)).toHaveLength(18);
  });

  it('every walkthrough payload renders to svg markup', () => {
    for (const panel of buildPanels(d1d6Bundle().history)) {
      const svg = renderPanelSvg(panel.kind, panel.payload);
      expect(svg.startsWith('<svg')).toBe(true);
      expect(svg.endsWith('</svg>')).toBe(true);
    }
  });

  it('rendering is pure: identical payloads draw identical figures', () => {
    const panels = buildPanels(d1d6Bundle().history);
    for (const panel of panels) {
      const once = renderPanelSvg(panel.kind, panel.payload);
      const twice = renderPanelSvg(panel.kind, JSON.parse(JSON.stringify(panel.payload)));
      expect(twice).toBe(once);
    }
  });

  it('attribution panel encodes sign through color', () => {
    const payload = {
      method: 'shap',
      baseline: 1.0,
      prediction: 2.0,
      contributions: [
        { variable: 'up', value: 2.0 },
        { variable: 'down', value: -1.0 },
      ],
    };
    const svg = renderPanelSvg('attribution-bars', payload);
    expect(svg).toContain('#d0544f'); // the negative bar
    expect(svg).toContain('#4878b0');
  });

  it('anchored profile marks the instance point', () => {
    const payload = {
      method: 'ceteris_paribus',
      variable: 'age',
      kind: 'numeric',
      grid: [1, 2, 3],
      values: [0.5, 1.0, 1.5],
      anchor: { x: 2, prediction: 1.0 },
    };
    const svg = renderPanelSvg('profile-line-anchored', payload);
    expect(svg).toContain('<circle');
  });

  it('mosaic renders one block per level pair', () => {
    const payload = {
      var_a: 'p',
      var_b: 'f',
      levels_a: ['x', 'y'],
      levels_b: ['u', 'v'],
      counts: [[2, 1], [1, 3]],
      row_marginals: [3, 4],
      col_marginals: [3, 4],
    };
    const svg = renderPanelSvg('mosaic', payload);
    expect((svg.match(/<rect/g) ?? []).length).toBe(4);
  });
});
