import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { Bundle } from '../src/types';

const here = dirname(fileURLToPath(import.meta.url));

export function d1d6BundleText(): string {
  return readFileSync(join(here, 'fixtures', 'd1_d6_bundle.json'), 'utf-8');
}

export function d1d6Bundle(): Bundle {
  return JSON.parse(d1d6BundleText()) as Bundle;
}
