import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { aggregate, expandGlob, loadFile, loadRuns, sampleStd } from "../src/load.js";
import { SchemaError, parseRecord, resolveMetric } from "../src/schema.js";

let dir: string;

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-test-"));
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

function record(over: Partial<Record<string, unknown>> = {}): string {
  return JSON.stringify({
    iteration: 100, wall_ms: 5, loss: 0.5, model_loss: null, l1_exact: 0.1,
    l1_empirical: 0.2, modes: 2, top100_mean: 1.0, top100_median: 1.0,
    clamped_terms: 0, grad_norm: 0.3, seed: 0, method: "stoch_db",
    env: "hypergrid_H8d2a0.25", ...over,
  });
}

function writeRun(name: string, lines: string[]): string {
  const file = path.join(dir, name);
  fs.writeFileSync(file, lines.join("\n") + "\n");
  return file;
}

describe("parseRecord", () => {
  it("accepts a complete record", () => {
    const r = parseRecord(record(), "f:1");
    expect(r.iteration).toBe(100);
    expect(r.model_loss).toBeNull();
  });

  it("rejects malformed JSON with file and line", () => {
    expect(() => parseRecord("{oops", "run.jsonl:3"))
      .toThrowError(/run.jsonl:3.*not valid JSON/);
  });

  it("rejects missing and unknown keys", () => {
    const obj = JSON.parse(record());
    delete obj.modes;
    expect(() => parseRecord(JSON.stringify(obj), "f:1"))
      .toThrowError(/missing key "modes"/);
    expect(() => parseRecord(record({ extra: 1 }), "f:1"))
      .toThrowError(/unknown key "extra"/);
  });

  it("rejects wrong types", () => {
    expect(() => parseRecord(record({ iteration: "ten" }), "f:1"))
      .toThrowError(/"iteration" must be a finite number/);
    expect(() => parseRecord(record({ loss: "low" }), "f:1"))
      .toThrowError(/"loss" must be a number or null/);
    expect(() => parseRecord(record({ method: "" }), "f:1"))
      .toThrowError(/"method" must be a non-empty string/);
  });
});

describe("resolveMetric", () => {
  it("maps the l1 alias and passes plottable keys through", () => {
    expect(resolveMetric("l1")).toBe("l1_exact");
    expect(resolveMetric("modes")).toBe("modes");
  });

  it("rejects unknown metrics by name", () => {
    expect(() => resolveMetric("accuracy")).toThrowError(/unknown metric "accuracy"/);
    expect(() => resolveMetric("iteration")).toThrowError(SchemaError);
  });
});

describe("loadFile", () => {
  it("reads records in order", () => {
    const f = writeRun("a.jsonl", [record(), record({ iteration: 200 })]);
    expect(loadFile(f).map((r) => r.iteration)).toEqual([100, 200]);
  });

  it("rejects mixed identity within a file", () => {
    const f = writeRun("a.jsonl",
      [record(), record({ iteration: 200, env: "other" })]);
    expect(() => loadFile(f)).toThrowError(/a.jsonl:2.*mixed/);
  });

  it("rejects non-increasing iterations and empty files", () => {
    const f = writeRun("a.jsonl", [record(), record()]);
    expect(() => loadFile(f)).toThrowError(/iterations must increase/);
    const g = writeRun("b.jsonl", [""]);
    expect(() => loadFile(g)).toThrowError(/no records/);
  });
});

describe("loadRuns", () => {
  it("groups three seeds of one method into one group", () => {
    for (const seed of [0, 1, 2]) {
      writeRun(`run_${seed}.jsonl`, [record({ seed })]);
    }
    const groups = loadRuns(path.join(dir, "*.jsonl"));
    expect(groups).toHaveLength(1);
    expect(groups[0].series.map((s) => s.seed)).toEqual([0, 1, 2]);
  });

  it("splits groups by method and env", () => {
    writeRun("a.jsonl", [record()]);
    writeRun("b.jsonl", [record({ method: "db" })]);
    writeRun("c.jsonl", [record({ env: "bitseq_n16k4a0.1" })]);
    const groups = loadRuns(path.join(dir, "*.jsonl"));
    expect(groups.map((g) => [g.method, g.env])).toEqual([
      ["stoch_db", "bitseq_n16k4a0.1"],
      ["db", "hypergrid_H8d2a0.25"],
      ["stoch_db", "hypergrid_H8d2a0.25"],
    ]);
  });

  it("errors on zero matches and duplicate seeds", () => {
    expect(() => loadRuns(path.join(dir, "*.jsonl")))
      .toThrowError(/no runs found/);
    writeRun("a.jsonl", [record()]);
    writeRun("b.jsonl", [record()]);
    expect(() => loadRuns(path.join(dir, "*.jsonl")))
      .toThrowError(/duplicate seed 0/);
  });
});

describe("expandGlob", () => {
  it("matches * and ** patterns", () => {
    fs.mkdirSync(path.join(dir, "sub"));
    writeRun("x.jsonl", [record()]);
    writeRun(path.join("sub", "y.jsonl"), [record()]);
    expect(expandGlob(path.join(dir, "*.jsonl")))
      .toEqual([path.join(dir, "x.jsonl")]);
    expect(expandGlob(path.join(dir, "**", "*.jsonl"))).toEqual([
      path.join(dir, "sub", "y.jsonl"),
      path.join(dir, "x.jsonl"),
    ]);
  });
});

describe("aggregate", () => {
  it("computes the hand-checked mean and sample std", () => {
    // two seeds with values 0.2 and 0.4: mean 0.3, std 0.1414 (n-1)
    writeRun("a.jsonl", [record({ l1_exact: 0.2 })]);
    writeRun("b.jsonl", [record({ l1_exact: 0.4, seed: 1 })]);
    const [group] = loadRuns(path.join(dir, "*.jsonl"));
    const agg = aggregate(group, "l1_exact");
    expect(agg.mean[0]).toBeCloseTo(0.3, 12);
    expect(agg.std[0]).toBeCloseTo(0.1414, 4);
    expect(agg.std[0]).toBeCloseTo(Math.sqrt(0.02), 12);
  });

  it("matches a 3-point spreadsheet check", () => {
    const values = [[0.5, 0.3, 0.2], [0.6, 0.2, 0.1], [0.4, 0.4, 0.15]];
    values.forEach((vals, seed) => {
      writeRun(`s${seed}.jsonl`, vals.map((v, i) =>
        record({ iteration: (i + 1) * 100, l1_exact: v, seed })));
    });
    const [group] = loadRuns(path.join(dir, "*.jsonl"));
    const agg = aggregate(group, "l1_exact");
    expect(agg.iterations).toEqual([100, 200, 300]);
    expect(agg.mean[0]).toBeCloseTo(0.5, 12);
    expect(agg.mean[1]).toBeCloseTo(0.3, 12);
    expect(agg.mean[2]).toBeCloseTo(0.15, 12);
    expect(agg.std[0]).toBeCloseTo(0.1, 12);
    expect(agg.std[1]).toBeCloseTo(0.1, 12);
    expect(agg.std[2]).toBeCloseTo(0.05, 12);
  });

  it("truncates to the common iteration prefix", () => {
    writeRun("a.jsonl",
      [record(), record({ iteration: 200 }), record({ iteration: 300 })]);
    writeRun("b.jsonl", [record({ seed: 1 }), record({ iteration: 200, seed: 1 })]);
    const [group] = loadRuns(path.join(dir, "*.jsonl"));
    expect(aggregate(group, "l1_exact").iterations).toEqual([100, 200]);
  });

  it("single seed yields zero std", () => {
    writeRun("a.jsonl", [record()]);
    const [group] = loadRuns(path.join(dir, "*.jsonl"));
    const agg = aggregate(group, "l1_exact");
    expect(agg.nSeeds).toBe(1);
    expect(agg.std).toEqual([0]);
  });

  it("skips all-null ticks, rejects partial nulls, rejects all-null metric", () => {
    writeRun("a.jsonl", [record({ loss: null }), record({ iteration: 200 })]);
    writeRun("b.jsonl",
      [record({ loss: null, seed: 1 }), record({ iteration: 200, seed: 1 })]);
    const [group] = loadRuns(path.join(dir, "*.jsonl"));
    expect(aggregate(group, "loss").iterations).toEqual([200]);
    expect(() => aggregate(group, "top100_mean").iterations)
      .not.toThrow(); // consistent values present
    writeRun("c.jsonl", [record({ l1_exact: null, seed: 2 })]);
    const [mixed] = loadRuns(path.join(dir, "*.jsonl"));
    expect(() => aggregate(mixed, "l1_exact"))
      .toThrowError(/null in some seeds but not others/);
  });

  it("rejects seeds whose evaluation grids disagree", () => {
    writeRun("a.jsonl", [record()]);
    writeRun("b.jsonl", [record({ iteration: 150, seed: 1 })]);
    const [group] = loadRuns(path.join(dir, "*.jsonl"));
    expect(() => aggregate(group, "l1_exact"))
      .toThrowError(/disagree on evaluation iterations/);
  });
});

describe("sampleStd", () => {
  it("uses the n-1 denominator", () => {
    expect(sampleStd([0.2, 0.4])).toBeCloseTo(0.14142135623730953, 15);
    expect(sampleStd([5])).toBe(0);
    expect(sampleStd([1, 1, 1])).toBe(0);
  });
});
