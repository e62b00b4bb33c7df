/** Chart rendering: mean lines with shaded std bands on a plain axis grid. */

import { AggregatedCurve } from "./load.js";
import { Bitmap } from "./png.js";
import { GLYPH_HEIGHT, GLYPH_WIDTH, glyph } from "./font.js";
import { MetricKey } from "./schema.js";

type RGB = [number, number, number];

export const PALETTE: RGB[] = [
  [31, 119, 180],   // blue
  [255, 127, 14],   // orange
  [44, 160, 44],    // green
  [214, 39, 40],    // red
  [148, 103, 189],  // purple
  [140, 86, 75],    // brown
  [227, 119, 194],  // pink
  [127, 127, 127],  // grey
];

const WIDTH = 800;
const HEIGHT = 500;
const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };
const BAND_ALPHA = 0.25;
/** Series longer than this are thinned uniformly for drawing only. */
export const MAX_RENDER_POINTS = 2000;

export function drawText(bmp: Bitmap, x: number, y: number, text: string,
                         rgb: RGB = [0, 0, 0]): void {
  for (let i = 0; i < text.length; i++) {
    const rows = glyph(text[i]);
    for (let gy = 0; gy < GLYPH_HEIGHT; gy++) {
      for (let gx = 0; gx < GLYPH_WIDTH; gx++) {
        if (rows[gy] & (1 << gx)) {
          bmp.set(x + i * GLYPH_WIDTH + gx, y + gy, rgb);
        }
      }
    }
  }
}

function drawLine(bmp: Bitmap, x0: number, y0: number, x1: number, y1: number,
                  rgb: RGB): void {
  // Bresenham, drawn 2px thick for visibility
  let [ax, ay] = [Math.round(x0), Math.round(y0)];
  const [bx, by] = [Math.round(x1), Math.round(y1)];
  const dx = Math.abs(bx - ax);
  const dy = -Math.abs(by - ay);
  const sx = ax < bx ? 1 : -1;
  const sy = ay < by ? 1 : -1;
  let err = dx + dy;
  for (;;) {
    bmp.set(ax, ay, rgb);
    bmp.set(ax + 1, ay, rgb);
    if (ax === bx && ay === by) break;
    const e2 = 2 * err;
    if (e2 >= dy) { err += dy; ax += sx; }
    if (e2 <= dx) { err += dx; ay += sy; }
  }
}

/** Thin a series to at most `max` points, keeping first and last. */
export function downsampleIndices(n: number, max: number): number[] {
  if (n <= max) return Array.from({ length: n }, (_, i) => i);
  const idx: number[] = [];
  for (let i = 0; i < max; i++) {
    idx.push(Math.round((i * (n - 1)) / (max - 1)));
  }
  return [...new Set(idx)];
}

/** "Nice" tick values covering [lo, hi]. */
export function ticks(lo: number, hi: number, target = 6): number[] {
  // Spans below float resolution at this magnitude cannot be subdivided.
  if (!(hi - lo > Math.max(Math.abs(lo), Math.abs(hi)) * 1e-12)) return [lo];
  const span = hi - lo;
  const step0 = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= step0) { step = m * mag; break; }
  }
  // Index-based loop: with v += step the increment can be a no-op once
  // step drops below one ulp of v, which loops forever.
  const first = Math.ceil(lo / step - 1e-9);
  const last = Math.floor(hi / step + 1e-9);
  const out: number[] = [];
  for (let k = first; k <= last; k++) {
    out.push(k === 0 ? 0 : k * step);
  }
  return out.length > 0 ? out : [lo];
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1);
  if (Number.isInteger(v)) return String(v);
  return String(parseFloat(v.toPrecision(4)));
}

export interface RenderOptions {
  /** Step-style lines and integer y ticks (used for mode counts). */
  step?: boolean;
  title?: string;
  yLabel?: string;
}

export function renderChart(curves: AggregatedCurve[], metric: MetricKey,
                            opts: RenderOptions = {}): Bitmap {
  const step = opts.step ?? metric === "modes";
  const bmp = new Bitmap(WIDTH, HEIGHT);
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  let xMax = 1;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const c of curves) {
    xMax = Math.max(xMax, c.iterations[c.iterations.length - 1]);
    for (let i = 0; i < c.mean.length; i++) {
      yMin = Math.min(yMin, c.mean[i] - c.std[i]);
      yMax = Math.max(yMax, c.mean[i] + c.std[i]);
    }
  }
  if (step) yMin = Math.min(yMin, 0);
  // Widen degenerate ranges, including spans below float resolution at the
  // data's magnitude (e.g. identical values whose sample std is ~1e-17).
  const scale = Math.max(Math.abs(yMin), Math.abs(yMax), 1);
  if (!(yMax - yMin > scale * 1e-9)) {
    yMax += yMax === yMin && yMin === 0 ? 1 : scale * 0.5;
    yMin -= yMin === 0 ? 0 : scale * 0.5;
  }
  const pad = (yMax - yMin) * 0.05;
  yMin -= pad;
  yMax += pad;
  if (step) yMin = Math.max(-0.5, yMin);

  const px = (it: number) => MARGIN.left + (it / xMax) * plotW;
  const py = (v: number) => MARGIN.top + (1 - (v - yMin) / (yMax - yMin)) * plotH;

  // axes and grid
  const axis: RGB = [0, 0, 0];
  const grid: RGB = [225, 225, 225];
  let yTicks = ticks(yMin, yMax);
  if (step) yTicks = yTicks.filter(Number.isInteger);
  for (const t of yTicks) {
    const y = Math.round(py(t));
    for (let x = MARGIN.left; x <= WIDTH - MARGIN.right; x++) bmp.set(x, y, grid);
    const label = fmt(t);
    drawText(bmp, MARGIN.left - 8 - label.length * GLYPH_WIDTH,
             y - Math.floor(GLYPH_HEIGHT / 2), label);
  }
  for (const t of ticks(0, xMax)) {
    const x = Math.round(px(t));
    for (let y = MARGIN.top; y <= HEIGHT - MARGIN.bottom; y++) bmp.set(x, y, grid);
    const label = fmt(t);
    drawText(bmp, x - Math.floor((label.length * GLYPH_WIDTH) / 2),
             HEIGHT - MARGIN.bottom + 8, label);
  }
  for (let x = MARGIN.left; x <= WIDTH - MARGIN.right; x++) {
    bmp.set(x, HEIGHT - MARGIN.bottom, axis);
    bmp.set(x, MARGIN.top, axis);
  }
  for (let y = MARGIN.top; y <= HEIGHT - MARGIN.bottom; y++) {
    bmp.set(MARGIN.left, y, axis);
    bmp.set(WIDTH - MARGIN.right, y, axis);
  }

  // curves
  curves.forEach((c, ci) => {
    const colour = PALETTE[ci % PALETTE.length];
    const idx = downsampleIndices(c.iterations.length, MAX_RENDER_POINTS);
    // std band (skipped when only one seed: std is all zeros)
    if (c.nSeeds > 1) {
      for (let k = 0; k + 1 < idx.length; k++) {
        const [i, j] = [idx[k], idx[k + 1]];
        const x0 = Math.round(px(c.iterations[i]));
        const x1 = Math.round(px(c.iterations[j]));
        for (let x = x0; x <= x1; x++) {
          const f = x1 === x0 ? 0 : (x - x0) / (x1 - x0);
          const li = step ? i : -1;
          const mean = li >= 0 ? c.mean[i]
            : c.mean[i] + f * (c.mean[j] - c.mean[i]);
          const std = li >= 0 ? c.std[i]
            : c.std[i] + f * (c.std[j] - c.std[i]);
          const yTop = Math.round(py(mean + std));
          const yBot = Math.round(py(mean - std));
          for (let y = yTop; y <= yBot; y++) {
            if (y > MARGIN.top && y < HEIGHT - MARGIN.bottom) {
              bmp.blend(x, y, colour, BAND_ALPHA);
            }
          }
        }
      }
    }
    // mean line
    for (let k = 0; k + 1 < idx.length; k++) {
      const [i, j] = [idx[k], idx[k + 1]];
      const x0 = px(c.iterations[i]);
      const x1 = px(c.iterations[j]);
      if (step) {
        drawLine(bmp, x0, py(c.mean[i]), x1, py(c.mean[i]), colour);
        drawLine(bmp, x1, py(c.mean[i]), x1, py(c.mean[j]), colour);
      } else {
        drawLine(bmp, x0, py(c.mean[i]), x1, py(c.mean[j]), colour);
      }
    }
  });

  // legend
  let ly = MARGIN.top + 8;
  curves.forEach((c, ci) => {
    const colour = PALETTE[ci % PALETTE.length];
    const lx = WIDTH - MARGIN.right - 180;
    for (let x = lx; x < lx + 24; x++) {
      bmp.set(x, ly + Math.floor(GLYPH_HEIGHT / 2), colour);
      bmp.set(x, ly + Math.floor(GLYPH_HEIGHT / 2) + 1, colour);
    }
    drawText(bmp, lx + 30, ly, `${c.method} (n=${c.nSeeds})`);
    ly += GLYPH_HEIGHT + 4;
  });

  // titles and axis labels
  drawText(bmp, MARGIN.left, 12, opts.title ?? `${curves[0].env}: ${metric}`);
  drawText(bmp, MARGIN.left, HEIGHT - GLYPH_HEIGHT - 4, "iteration");
  drawText(bmp, 6, MARGIN.top - GLYPH_HEIGHT - 4, opts.yLabel ?? metric);
  return bmp;
}
