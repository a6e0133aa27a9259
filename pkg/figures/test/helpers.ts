/** Shared test utilities: fixture access and light SVG scraping. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

export const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

export function studyName(tag: string, delta: string): string {
  return `kernel_study_${tag}_delta${delta}.csv`;
}

export function curveName(tag: string, delta: string): string {
  return `kernel_curve_${tag}_delta${delta}.csv`;
}

/** Split a rendered figure into its panel markups, keyed by model tag. */
export function panelsOf(svg: string): Map<string, string> {
  const out = new Map<string, string>();
  const chunks = svg.split('<g class="panel"').slice(1);
  for (const chunk of chunks) {
    const m = /^ data-model="([^"]+)"/.exec(chunk);
    if (!m) throw new Error("panel without data-model");
    out.set(m[1]!, chunk);
  }
  return out;
}

export interface Pt {
  x: number;
  y: number;
}

/** Center coordinates of every marker of one kind inside a panel markup. */
export function markerCenters(panel: string, kind: string): Pt[] {
  const pts: Pt[] = [];
  switch (kind) {
    case "circle":
      for (const m of panel.matchAll(/<circle class="mk-circle"[^>]*cx="([\d.]+)" cy="([\d.]+)"/g)) {
        pts.push({ x: +m[1]!, y: +m[2]! });
      }
      break;
    case "tick":
      for (const m of panel.matchAll(/<line class="mk-tick"[^>]*x1="([\d.]+)" y1="([\d.]+)"/g)) {
        pts.push({ x: +m[1]!, y: +m[2]! + 5 });
      }
      break;
    case "diamond":
      for (const m of panel.matchAll(/<path class="mk-diamond"[^>]*d="M ([\d.]+) ([\d.]+)/g)) {
        pts.push({ x: +m[1]!, y: +m[2]! + 4.6 });
      }
      break;
    case "square":
      for (const m of panel.matchAll(/<rect class="mk-square"[^>]*x="([\d.]+)" y="([\d.]+)"/g)) {
        pts.push({ x: +m[1]! + 3.6, y: +m[2]! + 3.6 });
      }
      break;
    default:
      throw new Error(`unknown marker kind ${kind}`);
  }
  return pts;
}

/** The solid kernel polyline of a panel, as pixel points. */
export function curveOf(panel: string): Pt[] {
  const m = /class="kernel-curve" points="([^"]+)"/.exec(panel);
  if (!m) throw new Error("panel without kernel-curve");
  return m[1]!.split(" ").map((s) => {
    const [x, y] = s.split(",");
    return { x: +x!, y: +y! };
  });
}

/** Linear interpolation of the polyline at pixel abscissa x. */
export function curveYAt(curve: Pt[], x: number): number {
  for (let i = 1; i < curve.length; i++) {
    const a = curve[i - 1]!;
    const b = curve[i]!;
    if (x >= a.x && x <= b.x) {
      return b.x === a.x ? a.y : a.y + ((b.y - a.y) * (x - a.x)) / (b.x - a.x);
    }
  }
  throw new Error(`x=${x} outside the rendered curve`);
}

/** Worst vertical distance between markers and the curve, in pixels. */
export function maxCurveDeviation(panel: string, kind: string): number {
  const curve = curveOf(panel);
  const centers = markerCenters(panel, kind);
  if (centers.length === 0) throw new Error(`no ${kind} markers in panel`);
  return Math.max(...centers.map((p) => Math.abs(p.y - curveYAt(curve, p.x))));
}
