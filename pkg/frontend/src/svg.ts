/** Tiny string-based SVG builders; panels stay pure functions of payloads. */

export const WIDTH = 360;
export const HEIGHT = 210;
export const PAD = 30;

export const BLUE = '#4878b0';
export const RED = '#d0544f';
export const GREEN = '#6a9e58';
export const GREY = '#9aa0a6';

export function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function tag(name: string, attrs: Record<string, string | number>, body = ''): string {
  const rendered = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === 'number' ? round(v) : esc(v)}"`)
    .join(' ');
  return body === '' && name !== 'text'
    ? `<${name} ${rendered}/>`
    : `<${name} ${rendered}>${body}</${name}>`;
}

export function svgDoc(body: string, width = WIDTH, height = HEIGHT): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" width="100%">${body}</svg>`;
}

/** Fixed-precision coordinates keep renders byte-stable across runs. */
export function round(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

export interface Scale {
  (v: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function extent(values: number[], padWithZero = false): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (padWithZero) {
    lo = Math.min(0, lo);
    hi = Math.max(0, hi);
  }
  return [lo, hi];
}

export function axisLabel(x: number, y: number, text: string, anchor = 'middle'): string {
  return tag('text', { x, y, 'font-size': 9, 'text-anchor': anchor, fill: '#444' }, esc(text));
}
