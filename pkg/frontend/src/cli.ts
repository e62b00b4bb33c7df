#!/usr/bin/env node
/** plots --glob '<pattern>' --metric l1 --out dir/  ->  <env>_<metric>.png */

import * as fs from "node:fs";
import * as path from "node:path";

import { aggregate, loadRuns } from "./load.js";
import { renderChart } from "./render.js";
import { MetricKey, SchemaError, resolveMetric } from "./schema.js";

interface Args {
  glob: string;
  metrics: string[];
  out: string;
}

export function parseArgs(argv: string[]): Args {
  let glob: string | undefined;
  const metrics: string[] = [];
  let out = ".";
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new SchemaError(`${a} needs a value`);
      return argv[++i];
    };
    if (a === "--glob") glob = next();
    else if (a === "--metric") metrics.push(next());
    else if (a === "--out") out = next();
    else if (a === "--help" || a === "-h") {
      console.log("usage: plots --glob <pattern> --metric <name> [--metric ...] [--out dir]");
      process.exit(0);
    } else throw new SchemaError(`unknown argument ${a}`);
  }
  if (!glob) throw new SchemaError("--glob is required");
  if (metrics.length === 0) metrics.push("l1");
  return { glob, metrics, out };
}

export function run(args: Args): string[] {
  const keys: MetricKey[] = args.metrics.map(resolveMetric);
  const groups = loadRuns(args.glob);
  fs.mkdirSync(args.out, { recursive: true });
  const written: string[] = [];
  const envs = [...new Set(groups.map((g) => g.env))].sort();
  for (const env of envs) {
    const envGroups = groups.filter((g) => g.env === env);
    for (const key of keys) {
      const curves = envGroups.map((g) => aggregate(g, key));
      const bmp = renderChart(curves, key);
      const file = path.join(args.out, `${env}_${key}.png`);
      fs.writeFileSync(file, bmp.toPng());
      written.push(file);
    }
  }
  return written;
}

export function main(argv: string[]): number {
  try {
    const written = run(parseArgs(argv));
    for (const f of written) console.log(`wrote ${f}`);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`error: ${e.message}`);
      return 2;
    }
    throw e;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
