/**
 * Static SVG rendering of kernel-study tables.
 *
 * One figure holds one panel per model. Each panel shows the true kernel
 * as a solid line and the first eight kernel estimates as markers, with the
 * j-th estimate drawn at every candidate abscissa t_j + h*delta:
 *
 *   open circle     h = 0 and h = 1
 *   vertical tick   h = 1/2 (mid-point rule)
 *   diamond         matching-rule offsets except the largest
 *   square          largest matching-rule offset
 *
 * so the offset whose markers sit on the curve is the one the sampled
 * process actually realises. Rendering is a pure function of the parsed
 * tables: fixed canvas, no timestamps, no randomness, and no numerical
 * work beyond affine plot transforms, which keeps output bytes identical
 * across runs on identical input.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import {
  CurveTable,
  SchemaError,
  StudyTable,
  parseCurveCsv,
  parseStudyCsv,
} from "./csv.js";

export type MarkerKind = "circle" | "tick" | "diamond" | "square";

export const ALL_MARKERS: readonly MarkerKind[] = ["circle", "tick", "diamond", "square"];

/** Study/curve file pair describing one panel. */
export interface PanelFiles {
  studyPath: string;
  curvePath: string;
}

/** Everything needed to produce one figure file. */
export interface FigureSpec {
  panels: PanelFiles[];
  outPath: string;
  /** Which offset-markers to draw; defaults to all of them. */
  markers?: MarkerKind[];
  /** Figure heading; "{delta}" is replaced by the common sampling step. */
  titleTemplate?: string;
}

export const DEFAULT_TITLE = "Kernel estimates on the sampled grid, delta = {delta}";

interface Panel {
  study: StudyTable;
  curve: CurveTable;
}

// Fixed canvas. Panels are laid out left to right in a single row.
const CANVAS_W = 1240;
const CANVAS_H = 470;
const OUTER = 18;
const PANEL_GAP = 26;
const TITLE_BAND = 44;
const LEGEND_BAND = 42;
const AXIS_L = 52;
const AXIS_R = 10;
const AXIS_T = 26;
const AXIS_B = 38;

const INK = "#1a1a1a";
const CURVE = "#4a4a4a";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Pixel coordinate, fixed to 2 decimals so output bytes are stable. */
function px(v: number): string {
  const r = Math.round(v * 100) / 100;
  return (Object.is(r, -0) ? 0 : r).toFixed(2);
}

/** Short decimal label for an offset value, e.g. 0.789. */
function offsetLabel(h: number): string {
  return h.toFixed(3).replace(/0+$/, "").replace(/\.$/, "");
}

interface Ticks {
  values: number[];
  labels: string[];
}

/** Round tick positions covering [lo, hi], about `target` of them. */
function niceTicks(lo: number, hi: number, target: number): Ticks {
  const span = hi - lo;
  if (!(span > 0)) {
    return { values: [lo], labels: [String(lo)] };
  }
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = mag * (norm < 1.5 ? 1 : norm < 3 ? 2 : norm < 7 ? 5 : 10);
  const decimals = Math.max(0, Math.min(6, -Math.floor(Math.log10(step) + 1e-9)));
  const values: number[] = [];
  const labels: string[] = [];
  for (let v = Math.ceil(lo / step - 1e-9) * step; v <= hi + step * 1e-9; v += step) {
    const clean = Object.is(v, -0) ? 0 : v;
    values.push(clean);
    labels.push(clean.toFixed(decimals));
  }
  return { values, labels };
}

const PANEL_NAMES: Record<string, string> = {
  carma21: "CARMA(2,1)",
  car2: "CAR(2)",
  car3: "CAR(3)",
};

function panelName(tag: string): string {
  return PANEL_NAMES[tag] ?? tag;
}

/** Offsets drawn as circles, ticks, diamonds and squares, in that order. */
interface OffsetPlan {
  kind: MarkerKind;
  h: number;
  /** Index into row.gFixed / row.gCandidates, for tests and tooling. */
  column: string;
}

function planOffsets(study: StudyTable, markers: readonly MarkerKind[]): OffsetPlan[] {
  const plan: OffsetPlan[] = [];
  for (const h of study.meta.hFixed) {
    const kind: MarkerKind = h === 0.5 ? "tick" : "circle";
    if (markers.includes(kind)) {
      plan.push({ kind, h, column: `g_h${h}` });
    }
  }
  const cand = [...study.meta.hCandidates].map((h, i) => ({ h, i }));
  cand.sort((a, b) => a.h - b.h);
  cand.forEach(({ h, i }, rank) => {
    const kind: MarkerKind = rank === cand.length - 1 ? "square" : "diamond";
    if (markers.includes(kind)) {
      plan.push({ kind, h, column: `g_hc${i + 1}` });
    }
  });
  return plan;
}

function markerElement(kind: MarkerKind, cx: number, cy: number, j: number, h: number): string {
  const at = `data-j="${j}" data-h="${offsetLabel(h)}"`;
  switch (kind) {
    case "circle":
      return `<circle class="mk-circle" ${at} cx="${px(cx)}" cy="${px(cy)}" r="3.4" fill="none" stroke="${INK}" stroke-width="1.1"/>`;
    case "tick":
      return `<line class="mk-tick" ${at} x1="${px(cx)}" y1="${px(cy - 5)}" x2="${px(cx)}" y2="${px(cy + 5)}" stroke="${INK}" stroke-width="1.3"/>`;
    case "diamond":
      return `<path class="mk-diamond" ${at} d="M ${px(cx)} ${px(cy - 4.6)} L ${px(cx + 4.6)} ${px(cy)} L ${px(cx)} ${px(cy + 4.6)} L ${px(cx - 4.6)} ${px(cy)} Z" fill="none" stroke="${INK}" stroke-width="1.1"/>`;
    case "square":
      return `<rect class="mk-square" ${at} x="${px(cx - 3.6)}" y="${px(cy - 3.6)}" width="7.20" height="7.20" fill="none" stroke="${INK}" stroke-width="1.1"/>`;
  }
}

function legendSample(kind: MarkerKind, cx: number, cy: number): string {
  switch (kind) {
    case "circle":
      return `<circle cx="${px(cx)}" cy="${px(cy)}" r="3.4" fill="none" stroke="${INK}" stroke-width="1.1"/>`;
    case "tick":
      return `<line x1="${px(cx)}" y1="${px(cy - 5)}" x2="${px(cx)}" y2="${px(cy + 5)}" stroke="${INK}" stroke-width="1.3"/>`;
    case "diamond":
      return `<path d="M ${px(cx)} ${px(cy - 4.6)} L ${px(cx + 4.6)} ${px(cy)} L ${px(cx)} ${px(cy + 4.6)} L ${px(cx - 4.6)} ${px(cy)} Z" fill="none" stroke="${INK}" stroke-width="1.1"/>`;
    case "square":
      return `<rect x="${px(cx - 3.6)}" y="${px(cy - 3.6)}" width="7.20" height="7.20" fill="none" stroke="${INK}" stroke-width="1.1"/>`;
  }
}

const LEGEND_TEXT: Record<MarkerKind, string> = {
  circle: "h = 0 and h = 1",
  tick: "h = 1/2",
  diamond: "matching h (lower)",
  square: "matching h (upper)",
};

function renderPanel(
  panel: Panel,
  markers: readonly MarkerKind[],
  x0: number,
  y0: number,
  w: number,
  h: number,
): string {
  const { study, curve } = panel;
  const delta = study.meta.delta;
  const plan = planOffsets(study, markers);

  // Data ranges. The x axis covers the marker grid with a small pad; the
  // curve is clipped to it so high-frequency studies zoom in near zero.
  const lastT = study.rows[study.rows.length - 1]!.t;
  const maxOffset = plan.length > 0 ? Math.max(...plan.map((p) => p.h)) : 1;
  const xMax = (lastT + maxOffset * delta) * 1.04;
  const inRange = curve.points.filter((p) => p.t <= xMax);
  let yMax = Math.max(
    ...study.rows.map((r) => r.ghat),
    ...inRange.map((p) => p.g),
  );
  let yMin = Math.min(0, ...study.rows.map((r) => r.ghat), ...inRange.map((p) => p.g));
  if (yMax === yMin) {
    yMax = yMin + 1;
  }
  const pad = (yMax - yMin) * 0.06;
  yMax += pad;
  if (yMin < 0) yMin -= pad;

  const bx0 = x0 + AXIS_L;
  const bx1 = x0 + w - AXIS_R;
  const by0 = y0 + AXIS_T;
  const by1 = y0 + h - AXIS_B;
  const sx = (t: number) => bx0 + ((t - 0) / (xMax - 0)) * (bx1 - bx0);
  const sy = (g: number) => by1 - ((g - yMin) / (yMax - yMin)) * (by1 - by0);

  const parts: string[] = [];
  parts.push(`<g class="panel" data-model="${esc(study.meta.modelTag)}">`);

  // Panel heading with the matching offsets spelled out.
  parts.push(
    `<text x="${px((bx0 + bx1) / 2)}" y="${px(y0 + 12)}" font-size="14" font-weight="bold" text-anchor="middle" fill="${INK}">${esc(panelName(study.meta.modelTag))}</text>`,
  );
  const inv = study.meta.hInvertible;
  const note =
    typeof inv === "string"
      ? `every h in ${inv} matches`
      : study.meta.hCandidates.length > 0
        ? `matching h: ${study.meta.hCandidates.map(offsetLabel).join(", ")}`
        : "no matching h";
  parts.push(
    `<text x="${px((bx0 + bx1) / 2)}" y="${px(y0 + 12 + 13)}" font-size="11" text-anchor="middle" fill="#555">${esc(note)}</text>`,
  );

  // Axes and ticks.
  parts.push(
    `<path d="M ${px(bx0)} ${px(by0)} L ${px(bx0)} ${px(by1)} L ${px(bx1)} ${px(by1)}" fill="none" stroke="${INK}" stroke-width="1"/>`,
  );
  const xt = niceTicks(0, xMax, 5);
  xt.values.forEach((v, i) => {
    const X = sx(v);
    parts.push(`<line x1="${px(X)}" y1="${px(by1)}" x2="${px(X)}" y2="${px(by1 + 4)}" stroke="${INK}" stroke-width="1"/>`);
    parts.push(`<text x="${px(X)}" y="${px(by1 + 16)}" font-size="10" text-anchor="middle" fill="${INK}">${xt.labels[i]}</text>`);
  });
  const yt = niceTicks(yMin, yMax, 5);
  yt.values.forEach((v, i) => {
    const Y = sy(v);
    parts.push(`<line x1="${px(bx0 - 4)}" y1="${px(Y)}" x2="${px(bx0)}" y2="${px(Y)}" stroke="${INK}" stroke-width="1"/>`);
    parts.push(`<text x="${px(bx0 - 7)}" y="${px(Y + 3.5)}" font-size="10" text-anchor="end" fill="${INK}">${yt.labels[i]}</text>`);
  });
  parts.push(
    `<text x="${px((bx0 + bx1) / 2)}" y="${px(by1 + 30)}" font-size="11" text-anchor="middle" fill="${INK}">t</text>`,
  );
  parts.push(
    `<text x="${px(x0 + 14)}" y="${px((by0 + by1) / 2)}" font-size="11" text-anchor="middle" fill="${INK}" transform="rotate(-90 ${px(x0 + 14)} ${px((by0 + by1) / 2)})">g(t)</text>`,
  );

  // True kernel, solid line.
  const pts = inRange.map((p) => `${px(sx(p.t))},${px(sy(p.g))}`).join(" ");
  parts.push(`<polyline class="kernel-curve" points="${pts}" fill="none" stroke="${CURVE}" stroke-width="1.4"/>`);

  // Estimates: the j-th value drawn once per offset in the plan.
  for (const row of study.rows) {
    for (const off of plan) {
      parts.push(markerElement(off.kind, sx(row.t + off.h * delta), sy(row.ghat), row.j, off.h));
    }
  }

  parts.push("</g>");
  return parts.join("\n");
}

/** Build the complete SVG document for a set of panels sharing one delta. */
export function buildSvg(
  panels: Panel[],
  markers: readonly MarkerKind[] = ALL_MARKERS,
  titleTemplate: string = DEFAULT_TITLE,
): string {
  if (panels.length === 0) {
    throw new SchemaError("(figure)", "a figure needs at least one panel");
  }
  const delta = panels[0]!.study.meta.delta;
  for (const p of panels) {
    if (p.study.meta.modelTag !== p.curve.meta.modelTag) {
      throw new SchemaError(
        basename(p.curve.file),
        `curve model_tag ${p.curve.meta.modelTag} does not match study model_tag ${p.study.meta.modelTag}`,
      );
    }
    if (p.study.meta.delta !== delta || p.curve.meta.delta !== delta) {
      throw new SchemaError(
        basename(p.study.file),
        `all panels of one figure must share delta ${delta}`,
      );
    }
  }

  const title = titleTemplate.replace("{delta}", String(delta));
  const n = panels.length;
  const panelW = (CANVAS_W - 2 * OUTER - (n - 1) * PANEL_GAP) / n;
  const panelH = CANVAS_H - TITLE_BAND - LEGEND_BAND;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${CANVAS_W}" height="${CANVAS_H}" viewBox="0 0 ${CANVAS_W} ${CANVAS_H}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${CANVAS_W}" height="${CANVAS_H}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${px(CANVAS_W / 2)}" y="27" font-size="16" font-weight="bold" text-anchor="middle" fill="${INK}">${esc(title)}</text>`,
  );

  panels.forEach((panel, i) => {
    const x0 = OUTER + i * (panelW + PANEL_GAP);
    parts.push(renderPanel(panel, markers, x0, TITLE_BAND, panelW, panelH));
  });

  // Legend strip along the bottom edge.
  const ly = CANVAS_H - LEGEND_BAND / 2;
  const entries: string[] = [];
  entries.push(
    `<line x1="0" y1="${px(ly)}" x2="26" y2="${px(ly)}" stroke="${CURVE}" stroke-width="1.4"/>` +
      `<text x="32" y="${px(ly + 3.5)}" font-size="11" fill="${INK}">true kernel g</text>`,
  );
  for (const kind of ALL_MARKERS) {
    if (!markers.includes(kind)) continue;
    entries.push(
      legendSample(kind, 13, ly) +
        `<text x="32" y="${px(ly + 3.5)}" font-size="11" fill="${INK}">${esc(LEGEND_TEXT[kind])}</text>`,
    );
  }
  const legendStep = 196;
  const legendX0 = (CANVAS_W - legendStep * (entries.length - 1) - 32) / 2 - 60;
  entries.forEach((entry, i) => {
    parts.push(`<g class="legend" transform="translate(${px(legendX0 + i * legendStep)} 0)">${entry}</g>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function readTable<T>(path: string, parse: (text: string, file: string) => T): T {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SchemaError(basename(path), `cannot read file: ${(err as Error).message}`);
  }
  return parse(text, basename(path));
}

/**
 * Render one figure from CSV files on disk. All inputs are parsed and
 * validated before anything is written, so a bad input never leaves a
 * partial image behind. Returns the output path.
 */
export function render(spec: FigureSpec): string {
  const panels: Panel[] = spec.panels.map((pf) => ({
    study: readTable(pf.studyPath, parseStudyCsv),
    curve: readTable(pf.curvePath, parseCurveCsv),
  }));
  const svg = buildSvg(panels, spec.markers ?? ALL_MARKERS, spec.titleTemplate ?? DEFAULT_TITLE);
  writeFileSync(spec.outPath, svg, "utf8");
  return spec.outPath;
}
