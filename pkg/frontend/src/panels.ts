/** Panel models and pure SVG renderers, one panel kind per taxonomy cell.
 *
 * The kind is a function of the step's terminal symbol alone, and a panel
 * never recomputes numbers: everything drawn comes from the payload JSON.
 */

import {
  AttributionPayload,
  BoundStepDoc,
  DataProfilePayload,
  DependencePayload,
  DistributionPayload,
  ImportancePayload,
  MatrixPayload,
  MosaicPayload,
  NetworkPayload,
  ProfilePayload,
  SelectionPayload,
} from './types';
import {
  BLUE, GREEN, GREY, HEIGHT, PAD, RED, WIDTH,
  axisLabel, esc, extent, linearScale, svgDoc, tag,
} from './svg';

export type PanelKind =
  | 'attribution-bars'
  | 'profile-line-anchored'
  | 'profile-line'
  | 'dependence-scatter'
  | 'importance-bars'
  | 'histogram'
  | 'boxplot'
  | 'barplot'
  | 'correlation-heatmap'
  | 'correlation-network'
  | 'scatter-mean-curve'
  | 'mosaic'
  | 'selection-marker';

export const PANEL_KIND_BY_SYMBOL: Record<string, PanelKind> = {
  SHAP_Attribution: 'attribution-bars',
  BD_Attribution: 'attribution-bars',
  LIME_Attribution: 'attribution-bars',
  Ceteris_Paribus: 'profile-line-anchored',
  Partial_Dependence: 'profile-line',
  Accumulated_Local: 'profile-line',
  SHAP_Dependence: 'dependence-scatter',
  Permutational_Importance: 'importance-bars',
  LOCO_Importance: 'importance-bars',
  SHAP_Importance: 'importance-bars',
  Histogram: 'histogram',
  Boxplot: 'boxplot',
  Barplot: 'barplot',
  Pairwise_Correlation: 'correlation-heatmap',
  Graphical_Networks: 'correlation-network',
  Scatter_Plot: 'scatter-mean-curve',
  Mosaic_Plot: 'mosaic',
  Select_Variable: 'selection-marker',
};

export interface PanelModel {
  stepIndex: number;
  symbol: string;
  kind: PanelKind;
  payload: Record<string, unknown>;
}

export function panelKindFor(symbol: string): PanelKind {
  const kind = PANEL_KIND_BY_SYMBOL[symbol];
  if (!kind) throw new Error(`no panel kind for symbol ${symbol}`);
  return kind;
}

export function buildPanels(history: BoundStepDoc[]): PanelModel[] {
  return history.map((step, i) => ({
    stepIndex: i,
    symbol: step.symbol,
    kind: panelKindFor(step.symbol),
    payload: step.payload,
  }));
}

/* ── renderers ─────────────────────────────────────────────────────────── */

function horizontalBars(
  names: string[], values: number[], color: string, spreads?: number[],
): string {
  const [lo, hi] = extent(values.concat(0));
  const x = linearScale(lo, hi, PAD + 60, WIDTH - PAD);
  const rowH = (HEIGHT - 2 * PAD) / Math.max(1, values.length);
  const parts: string[] = [
    tag('line', { x1: x(0), x2: x(0), y1: PAD, y2: HEIGHT - PAD, stroke: '#888' }),
  ];
  values.forEach((v, i) => {
    const y = PAD + i * rowH;
    parts.push(tag('rect', {
      x: Math.min(x(0), x(v)), y: y + 2,
      width: Math.abs(x(v) - x(0)) || 1, height: Math.max(1, rowH - 4),
      fill: v < 0 ? RED : color,
    }));
    if (spreads && spreads[i]) {
      const s = spreads[i]!;
      parts.push(tag('line', {
        x1: x(v - s), x2: x(v + s), y1: y + rowH / 2, y2: y + rowH / 2,
        stroke: '#333', 'stroke-width': 1.2,
      }));
    }
    parts.push(axisLabel(PAD + 55, y + rowH / 2 + 3, names[i] ?? '', 'end'));
  });
  return svgDoc(parts.join(''));
}

function lineProfile(grid: (number | string)[], values: number[],
                     anchor?: { x: number | string; prediction: number }): string {
  if (typeof grid[0] !== 'number') {
    return verticalBars(grid.map(String), values, BLUE);
  }
  const xs = grid as number[];
  const x = linearScale(xs[0]!, xs[xs.length - 1]!, PAD, WIDTH - PAD);
  const [lo, hi] = extent(values);
  const y = linearScale(lo, hi, HEIGHT - PAD, PAD);
  const d = values.map((v, i) => `${i ? 'L' : 'M'}${x(xs[i]!).toFixed(1)} ${y(v).toFixed(1)}`).join(' ');
  const parts = [tag('path', { d, fill: 'none', stroke: BLUE, 'stroke-width': 2 })];
  if (anchor && typeof anchor.x === 'number') {
    parts.push(tag('circle', { cx: x(anchor.x), cy: y(anchor.prediction), r: 4, fill: RED }));
  }
  parts.push(axisLabel(WIDTH / 2, HEIGHT - 8, `${xs[0]} … ${xs[xs.length - 1]}`));
  return svgDoc(parts.join(''));
}

function verticalBars(labels: string[], values: number[], color: string): string {
  const [lo, hi] = extent(values, true);
  const y = linearScale(lo, hi, HEIGHT - PAD, PAD);
  const bw = (WIDTH - 2 * PAD) / Math.max(1, values.length);
  const parts: string[] = [];
  values.forEach((v, i) => {
    parts.push(tag('rect', {
      x: PAD + i * bw + 2, y: Math.min(y(0), y(v)),
      width: Math.max(1, bw - 4), height: Math.abs(y(v) - y(0)) || 1, fill: color,
    }));
    parts.push(axisLabel(PAD + i * bw + bw / 2, HEIGHT - 8, String(labels[i]).slice(0, 9)));
  });
  return svgDoc(parts.join(''));
}

function scatter(points: [number, number][], color = BLUE, extra = ''): string {
  const x = linearScale(...extent(points.map((p) => p[0])), PAD, WIDTH - PAD);
  const y = linearScale(...extent(points.map((p) => p[1])), HEIGHT - PAD, PAD);
  const dots = points.map(([px, py]) =>
    tag('circle', { cx: x(px), cy: y(py), r: 2.5, fill: color, 'fill-opacity': 0.65 })).join('');
  return svgDoc(dots + extra);
}

function renderAttribution(payload: AttributionPayload): string {
  const names = payload.contributions.map((c) => c.variable);
  const values = payload.contributions.map((c) => c.value);
  const spreads = payload.uncertainty
    ? names.map((n) => payload.uncertainty![n] ?? 0)
    : undefined;
  return horizontalBars(names, values, BLUE, spreads);
}

function renderImportance(payload: ImportancePayload): string {
  return horizontalBars(
    payload.entries.map((e) => e.variable),
    payload.entries.map((e) => e.estimate),
    GREEN,
    payload.entries.map((e) => e.spread ?? 0),
  );
}

function renderDistribution(payload: DistributionPayload): string {
  if (payload.kind === 'barplot') {
    const bins = payload.bins as { level: string; count: number }[];
    return verticalBars(bins.map((b) => b.level), bins.map((b) => b.count), BLUE);
  }
  if (payload.kind === 'histogram') {
    const bins = payload.bins as { lo: number; hi: number; count: number }[];
    return verticalBars(bins.map((b) => b.lo.toFixed(1)), bins.map((b) => b.count), BLUE);
  }
  const st = payload.stats as Record<string, number> | undefined;
  if (!st) return svgDoc(axisLabel(WIDTH / 2, HEIGHT / 2, 'no statistics'));
  const x = linearScale(st.min!, st.max!, PAD, WIDTH - PAD);
  const mid = HEIGHT / 2;
  const box = [
    tag('line', { x1: x(st.whisker_low!), x2: x(st.q1!), y1: mid, y2: mid, stroke: '#333' }),
    tag('line', { x1: x(st.q3!), x2: x(st.whisker_high!), y1: mid, y2: mid, stroke: '#333' }),
    tag('rect', {
      x: x(st.q1!), y: mid - 28, width: Math.max(1, x(st.q3!) - x(st.q1!)), height: 56,
      fill: BLUE, 'fill-opacity': 0.35, stroke: '#333',
    }),
    tag('line', { x1: x(st.median!), x2: x(st.median!), y1: mid - 28, y2: mid + 28, stroke: '#333', 'stroke-width': 2 }),
  ].join('');
  return svgDoc(box);
}

function renderHeatmap(payload: MatrixPayload): string {
  const n = payload.variables.length;
  const cell = (WIDTH - 2 * PAD) / n;
  const parts: string[] = [];
  payload.values.forEach((row, i) => {
    row.forEach((v, j) => {
      let fill = '#eee';
      if (v !== null) {
        const t = Math.max(-1, Math.min(1, v));
        const r = t < 0 ? 208 : Math.round(255 - 183 * t);
        const b = t > 0 ? 208 : Math.round(255 + 175 * t);
        const g = Math.round(255 - 140 * Math.abs(t));
        fill = `rgb(${r},${g},${b})`;
      }
      parts.push(tag('rect', {
        x: PAD + j * cell, y: 10 + i * ((HEIGHT - 20) / n),
        width: cell - 1, height: (HEIGHT - 20) / n - 1, fill,
      }));
    });
    parts.push(axisLabel(PAD - 3, 10 + i * ((HEIGHT - 20) / n) + 10, payload.variables[i]!.slice(0, 8), 'end'));
  });
  return svgDoc(parts.join(''));
}

function renderNetwork(payload: { nodes: string[]; edges: { a: string; b: string; weight: number }[] }): string {
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const r = Math.min(WIDTH, HEIGHT) / 2 - PAD;
  const pos: Record<string, [number, number]> = {};
  payload.nodes.forEach((n, i) => {
    const a = (2 * Math.PI * i) / payload.nodes.length;
    pos[n] = [cx + r * Math.cos(a), cy + r * Math.sin(a)];
  });
  const parts = payload.edges.map((e) => tag('line', {
    x1: pos[e.a]![0], y1: pos[e.a]![1], x2: pos[e.b]![0], y2: pos[e.b]![1],
    stroke: e.weight < 0 ? RED : BLUE, 'stroke-width': 1 + 2 * Math.abs(e.weight),
  }));
  payload.nodes.forEach((n) => {
    parts.push(tag('circle', { cx: pos[n]![0], cy: pos[n]![1], r: 5, fill: '#333' }));
    parts.push(axisLabel(pos[n]![0] + 8, pos[n]![1] + 3, n, 'start'));
  });
  return svgDoc(parts.join(''));
}

function renderDataProfile(payload: DataProfilePayload): string {
  const pts = payload.points;
  if (pts.length && 'level' in pts[0]!) {
    const lv = pts as { level: string; mean: number }[];
    return verticalBars(lv.map((p) => p.level), lv.map((p) => p.mean), BLUE);
  }
  const curve = (pts as { x: number; mean: number }[]).map((p) => [p.x, p.mean] as [number, number]);
  const cloud = payload.scatter
    .filter((p): p is { x: number; y: number } => typeof p.x === 'number')
    .map((p) => [p.x, p.y] as [number, number]);
  const all = cloud.concat(curve);
  const x = linearScale(...extent(all.map((p) => p[0])), PAD, WIDTH - PAD);
  const y = linearScale(...extent(all.map((p) => p[1])), HEIGHT - PAD, PAD);
  const dots = cloud.map(([px, py]) =>
    tag('circle', { cx: x(px), cy: y(py), r: 2, fill: GREY, 'fill-opacity': 0.5 })).join('');
  const d = curve.map(([px, py], i) => `${i ? 'L' : 'M'}${x(px).toFixed(1)} ${y(py).toFixed(1)}`).join(' ');
  const line = tag('path', { d, fill: 'none', stroke: RED, 'stroke-width': 2 });
  return svgDoc(dots + line);
}

function renderMosaic(payload: MosaicPayload): string {
  const total = payload.counts.flat().reduce((a, b) => a + b, 0) || 1;
  const palette = [BLUE, RED, GREEN, '#b07aa1', '#e0a036', '#5b7a8c'];
  let left = PAD;
  const parts: string[] = [];
  payload.levels_a.forEach((levelA, i) => {
    const rowTotal = payload.row_marginals[i]! || 1;
    const width = ((WIDTH - 2 * PAD) * payload.row_marginals[i]!) / total;
    let bottom = HEIGHT - PAD;
    payload.levels_b.forEach((_, j) => {
      const h = ((HEIGHT - 2 * PAD) * payload.counts[i]![j]!) / rowTotal;
      parts.push(tag('rect', {
        x: left, y: bottom - h, width: Math.max(1, width - 2), height: Math.max(0, h - 1),
        fill: palette[j % palette.length]!,
      }));
      bottom -= h;
    });
    parts.push(axisLabel(left + width / 2, HEIGHT - 10, levelA));
    left += width;
  });
  return svgDoc(parts.join(''));
}

export function renderPanelSvg(kind: PanelKind, payload: Record<string, unknown>): string {
  switch (kind) {
    case 'attribution-bars':
      return renderAttribution(payload as unknown as AttributionPayload);
    case 'importance-bars':
      return renderImportance(payload as unknown as ImportancePayload);
    case 'profile-line-anchored':
    case 'profile-line': {
      const p = payload as unknown as ProfilePayload;
      return lineProfile(p.grid, p.values, p.anchor);
    }
    case 'dependence-scatter': {
      const p = payload as unknown as DependencePayload;
      return scatter(p.points
        .filter((pt): pt is { x: number; phi: number } => typeof pt.x === 'number')
        .map((pt) => [pt.x, pt.phi] as [number, number]));
    }
    case 'histogram':
    case 'boxplot':
    case 'barplot':
      return renderDistribution(payload as unknown as DistributionPayload);
    case 'correlation-heatmap':
      return renderHeatmap(payload as unknown as MatrixPayload);
    case 'correlation-network':
      return renderNetwork(payload as unknown as NetworkPayload);
    case 'scatter-mean-curve':
      return renderDataProfile(payload as unknown as DataProfilePayload);
    case 'mosaic':
      return renderMosaic(payload as unknown as MosaicPayload);
    case 'selection-marker': {
      const p = payload as unknown as SelectionPayload;
      return svgDoc(axisLabel(WIDTH / 2, HEIGHT / 2, `variable in focus: ${p.selected}`));
    }
  }
}
