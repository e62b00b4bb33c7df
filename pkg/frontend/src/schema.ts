/** The metrics JSONL record schema written by the training CLI. */

export const METRIC_KEYS = [
  "iteration", "wall_ms", "loss", "model_loss", "l1_exact", "l1_empirical",
  "modes", "top100_mean", "top100_median", "clamped_terms", "grad_norm",
  "seed", "method", "env",
] as const;

export type MetricKey = (typeof METRIC_KEYS)[number];

export interface MetricsRecord {
  iteration: number;
  wall_ms: number;
  loss: number | null;
  model_loss: number | null;
  l1_exact: number | null;
  l1_empirical: number | null;
  modes: number;
  top100_mean: number | null;
  top100_median: number | null;
  clamped_terms: number;
  grad_norm: number | null;
  seed: number;
  method: string;
  env: string;
}

const NUMBER_KEYS: MetricKey[] = ["iteration", "wall_ms", "modes",
  "clamped_terms", "seed"];
const NULLABLE_NUMBER_KEYS: MetricKey[] = ["loss", "model_loss", "l1_exact",
  "l1_empirical", "top100_mean", "top100_median", "grad_norm"];
const STRING_KEYS: MetricKey[] = ["method", "env"];

/** Numeric fields a curve can be drawn from (y-axis candidates). */
export const PLOTTABLE_KEYS: MetricKey[] = [
  "loss", "model_loss", "l1_exact", "l1_empirical", "modes", "top100_mean",
  "top100_median", "clamped_terms", "grad_norm",
];

/** Short aliases accepted on the command line. */
export const METRIC_ALIASES: Record<string, MetricKey> = {
  l1: "l1_exact",
};

export class SchemaError extends Error {}

/** Parse one JSONL line; `where` is a "file:line" tag for diagnostics. */
export function parseRecord(line: string, where: string): MetricsRecord {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (e) {
    throw new SchemaError(`${where}: not valid JSON: ${(e as Error).message}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new SchemaError(`${where}: expected a JSON object`);
  }
  const obj = raw as Record<string, unknown>;
  for (const key of METRIC_KEYS) {
    if (!(key in obj)) throw new SchemaError(`${where}: missing key "${key}"`);
  }
  for (const key of Object.keys(obj)) {
    if (!(METRIC_KEYS as readonly string[]).includes(key)) {
      throw new SchemaError(`${where}: unknown key "${key}"`);
    }
  }
  for (const key of NUMBER_KEYS) {
    if (typeof obj[key] !== "number" || !Number.isFinite(obj[key] as number)) {
      throw new SchemaError(`${where}: "${key}" must be a finite number`);
    }
  }
  for (const key of NULLABLE_NUMBER_KEYS) {
    const v = obj[key];
    if (v !== null && (typeof v !== "number" || !Number.isFinite(v))) {
      throw new SchemaError(`${where}: "${key}" must be a number or null`);
    }
  }
  for (const key of STRING_KEYS) {
    if (typeof obj[key] !== "string" || (obj[key] as string).length === 0) {
      throw new SchemaError(`${where}: "${key}" must be a non-empty string`);
    }
  }
  return obj as unknown as MetricsRecord;
}

export function resolveMetric(name: string): MetricKey {
  const key = METRIC_ALIASES[name] ?? name;
  if (!PLOTTABLE_KEYS.includes(key as MetricKey)) {
    throw new SchemaError(
      `unknown metric "${name}" (choose from: ` +
      `${[...Object.keys(METRIC_ALIASES), ...PLOTTABLE_KEYS].join(", ")})`);
  }
  return key as MetricKey;
}
