/** Shared shapes of the bundle document and the HTTP API responses. */

export interface ColumnSummary {
  id: string;
  kind: 'numeric' | 'categorical';
  min?: number;
  max?: number;
  mean?: number;
  levels?: string[];
}

export interface DatasetSummary {
  name: string;
  n_rows: number;
  target: string;
  columns: ColumnSummary[];
}

export interface ModelCard {
  id: string;
  task: 'regression' | 'binary_classification';
  refittable: boolean;
  schema: { id: string; kind: string; levels?: string[] }[];
}

export interface GrammarRule {
  lhs: string;
  rhs: string[];
}

export interface GrammarDoc {
  nonterminals: string[];
  terminals: string[];
  start: string;
  rules: GrammarRule[];
}

export interface BoundStepDoc {
  symbol: string;
  params: Record<string, unknown>;
  payload: Record<string, unknown>;
  timestamp: number;
}

export interface NextStepsDoc {
  permitted: string[];
  end_of_dialogue: boolean;
  parameters?: Record<string, { required: string[]; optional: string[] }>;
}

export interface Bundle {
  'iema-bundle': number;
  seed: number;
  dataset: DatasetSummary;
  model: ModelCard;
  grammar: GrammarDoc;
  history: BoundStepDoc[];
  next_steps: NextStepsDoc;
}

/* payload fragments the panels draw from */

export interface ContributionEntry {
  variable: string;
  value: number;
}

export interface AttributionPayload {
  method: string;
  baseline: number;
  prediction: number;
  contributions: ContributionEntry[];
  uncertainty?: Record<string, number>;
}

export interface ProfilePayload {
  method: string;
  variable: string;
  kind: 'numeric' | 'categorical';
  grid: (number | string)[];
  values: number[];
  anchor?: { x: number | string; prediction: number };
}

export interface DependencePayload {
  method: 'shap_dependence';
  variable: string;
  points: { x: number | string; phi: number }[];
}

export interface ImportancePayload {
  method: string;
  entries: { variable: string; estimate: number; spread?: number }[];
  baseline_loss?: number;
  baseline_value?: number;
  loss?: string;
}

export interface DistributionPayload {
  column: string;
  kind: 'histogram' | 'boxplot' | 'barplot';
  bins: ({ lo: number; hi: number; count: number } | { level: string; count: number })[];
  stats?: Record<string, number | number[]>;
}

export interface MatrixPayload {
  variables: string[];
  values: (number | null)[][];
  methods: string[][];
}

export interface NetworkPayload {
  nodes: string[];
  edges: { a: string; b: string; weight: number }[];
  threshold: number;
}

export interface DataProfilePayload {
  variable: string;
  target: string;
  points: ({ x: number; mean: number; count: number } | { level: string; mean: number; count: number })[];
  scatter: { x: number | string; y: number }[];
}

export interface MosaicPayload {
  var_a: string;
  var_b: string;
  levels_a: string[];
  levels_b: string[];
  counts: number[][];
  row_marginals: number[];
  col_marginals: number[];
}

export interface SelectionPayload {
  selected: string;
}
