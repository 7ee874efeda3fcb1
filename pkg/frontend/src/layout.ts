/** Grid layout: panel order with persistence keyed by a bundle hash.
 *
 * Rearrangement works in both modes (static exports stay read-only apart
 * from this). Order is stored per bundle so reopening the same export
 * restores the arrangement without any server state.
 */

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function bundleHash(text: string): string {
  // FNV-1a; collisions only cost a stale layout
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, '0');
}

export class GridLayout {
  order: number[];

  constructor(
    private readonly panelCount: number,
    private readonly storageKey: string,
    private readonly storage?: StorageLike,
  ) {
    this.order = Array.from({ length: panelCount }, (_, i) => i);
    const saved = storage?.getItem(storageKey);
    if (saved) {
      try {
        const parsed = JSON.parse(saved) as number[];
        if (this.isValidOrder(parsed)) this.order = parsed;
      } catch {
        /* corrupted entry: keep the default order */
      }
    }
  }

  private isValidOrder(candidate: number[]): boolean {
    return (
      candidate.length === this.panelCount
      && [...candidate].sort((a, b) => a - b).every((v, i) => v === i)
    );
  }

  /** Move the panel currently shown at `fromSlot` to `toSlot`. */
  move(fromSlot: number, toSlot: number): void {
    if (fromSlot === toSlot) return;
    if (fromSlot < 0 || toSlot < 0
        || fromSlot >= this.order.length || toSlot >= this.order.length) return;
    const [panel] = this.order.splice(fromSlot, 1);
    this.order.splice(toSlot, 0, panel!);
    this.persist();
  }

  append(): void {
    this.order.push(this.order.length);
    this.persist();
  }

  removeLast(): void {
    const panel = this.order.length - 1;
    this.order = this.order.filter((p) => p !== panel);
    this.persist();
  }

  private persist(): void {
    this.storage?.setItem(this.storageKey, JSON.stringify(this.order));
  }
}
