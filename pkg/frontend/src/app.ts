/** DOM wiring: renders the store into the page and forwards interactions.
 *
 * Static mode (opened from an exported HTML file) is read-only apart from
 * grid rearrangement; live mode (served next to the HTTP API) adds step
 * submission and undo.
 */

import { DashboardStore } from './store';
import { GridLayout, bundleHash } from './layout';
import { renderPanelSvg } from './panels';
import { renderParseTree } from './parse_tree';

function h(tagName: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tagName);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class DashboardApp {
  private layout: GridLayout;
  private root: HTMLElement;
  private instancePick = 0;
  private variablePick: string;
  private secondVariablePick: string;

  constructor(root: HTMLElement, private store: DashboardStore, bundleText: string) {
    this.root = root;
    const key = `iema-layout-${bundleHash(bundleText)}`;
    this.layout = new GridLayout(
      store.state.panels.length, key,
      typeof localStorage === 'undefined' ? undefined : localStorage,
    );
    const columns = store.state.bundle.dataset.columns
      .filter((c) => c.id !== store.state.bundle.dataset.target);
    this.variablePick = columns[0]?.id ?? '';
    this.secondVariablePick = columns[1]?.id ?? this.variablePick;
    store.subscribe(() => this.syncLayout());
    store.subscribe(() => this.render());
  }

  private syncLayout(): void {
    while (this.layout.order.length < this.store.state.panels.length) this.layout.append();
    while (this.layout.order.length > this.store.state.panels.length) this.layout.removeLast();
  }

  private paramsFor(symbol: string): Record<string, unknown> {
    const needed = this.store.state.suggestions.requiredParams[symbol] ?? [];
    const params: Record<string, unknown> = {};
    for (const name of needed) {
      if (name === 'instance') params.instance = this.instancePick;
      if (name === 'variable') params.variable = this.variablePick;
      if (name === 'var_a') params.var_a = this.variablePick;
      if (name === 'var_b') params.var_b = this.secondVariablePick;
    }
    return params;
  }

  render(): void {
    const state = this.store.state;
    this.root.replaceChildren();

    const header = h('header');
    header.appendChild(h('h1', '', `Explanation dialogue: ${state.bundle.dataset.name}`));
    header.appendChild(h('p', 'note',
      `model ${state.bundle.model.id} (${state.bundle.model.task}), `
      + `${state.bundle.dataset.n_rows} rows, ${state.mode} mode`));
    this.root.appendChild(header);

    if (state.mode === 'live') this.root.appendChild(this.controls());
    if (state.lastError) {
      const err = h('p', 'error', state.lastError);
      this.root.appendChild(err);
    }

    const grid = h('div', 'grid');
    this.syncLayout();
    this.layout.order.forEach((panelIdx, slot) => {
      const panel = state.panels[panelIdx];
      if (!panel) return;
      const card = h('section', 'panel');
      card.setAttribute('data-kind', panel.kind);
      card.setAttribute('draggable', 'true');
      card.addEventListener('dragstart', (e) => {
        (e as DragEvent).dataTransfer?.setData('text/plain', String(slot));
      });
      card.addEventListener('dragover', (e) => e.preventDefault());
      card.addEventListener('drop', (e) => {
        e.preventDefault();
        const from = Number((e as DragEvent).dataTransfer?.getData('text/plain'));
        if (!Number.isNaN(from)) {
          this.layout.move(from, slot);
          this.render();
        }
      });
      card.appendChild(h('h2', '', `${panel.stepIndex + 1}. ${panel.symbol}`));
      const body = h('div', 'panel-body');
      body.innerHTML = renderPanelSvg(panel.kind, panel.payload);
      card.appendChild(body);
      grid.appendChild(card);
    });
    this.root.appendChild(grid);

    this.root.appendChild(this.suggestionBar());

    const side = h('aside', 'tree-view');
    side.appendChild(h('h2', '', 'Derivation'));
    const treeHolder = h('div');
    treeHolder.innerHTML = renderParseTree(
      state.bundle.grammar, state.bundle.history.map((s) => s.symbol),
    );
    side.appendChild(treeHolder);
    this.root.appendChild(side);
  }

  private controls(): HTMLElement {
    const state = this.store.state;
    const bar = h('div', 'controls');

    const instance = document.createElement('select');
    instance.className = 'instance-pick';
    const rows = Math.min(state.bundle.dataset.n_rows, 200);
    for (let i = 0; i < rows; i++) {
      const opt = document.createElement('option');
      opt.value = String(i);
      opt.textContent = `row ${i}`;
      if (i === this.instancePick) opt.selected = true;
      instance.appendChild(opt);
    }
    instance.addEventListener('change', () => {
      this.instancePick = Number(instance.value);
    });
    bar.appendChild(h('label', '', 'instance '));
    bar.appendChild(instance);

    const makeVariableSelect = (cls: string, value: string, onChange: (v: string) => void) => {
      const select = document.createElement('select');
      select.className = cls;
      for (const col of state.bundle.dataset.columns) {
        if (col.id === state.bundle.dataset.target) continue;
        const opt = document.createElement('option');
        opt.value = col.id;
        opt.textContent = `${col.id} (${col.kind})`;
        if (col.id === value) opt.selected = true;
        select.appendChild(opt);
      }
      select.addEventListener('change', () => onChange(select.value));
      return select;
    };
    bar.appendChild(h('label', '', ' variable '));
    bar.appendChild(makeVariableSelect('variable-pick', this.variablePick,
      (v) => { this.variablePick = v; }));
    bar.appendChild(h('label', '', ' second variable '));
    bar.appendChild(makeVariableSelect('second-variable-pick', this.secondVariablePick,
      (v) => { this.secondVariablePick = v; }));

    const undo = document.createElement('button');
    undo.className = 'undo';
    undo.textContent = 'undo last step';
    undo.disabled = state.pending || state.panels.length === 0;
    undo.addEventListener('click', () => void this.store.undo());
    bar.appendChild(undo);
    return bar;
  }

  private suggestionBar(): HTMLElement {
    const state = this.store.state;
    const footer = h('footer');
    footer.appendChild(h('h2', '', 'Suggested next steps'));
    const list = h('div', 'suggestions');
    // only permitted steps become elements at all: a forbidden step cannot
    // be clicked because it is never rendered
    for (const symbol of this.store.actionableSteps()) {
      if (state.mode === 'live') {
        const button = document.createElement('button');
        button.className = 'suggestion';
        button.textContent = symbol;
        button.disabled = state.pending;
        button.addEventListener('click', () =>
          void this.store.submitStep(symbol, this.paramsFor(symbol)));
        list.appendChild(button);
      } else {
        list.appendChild(h('span', 'suggestion readonly', symbol));
      }
    }
    footer.appendChild(list);
    footer.appendChild(h('p', 'note', state.suggestions.endOfDialogue
      ? 'The dialogue may also stop here.'
      : 'The dialogue is not complete yet.'));
    return footer;
  }
}
