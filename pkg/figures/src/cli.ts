#!/usr/bin/env node
/**
 * Batch entry point: render every kernel study found in an input
 * directory into one SVG figure per sampling step.
 *
 *   carmahf-figures render --in study_dir --out figure_dir
 *
 * The input directory is expected to hold kernel_study_<tag>_delta<d>.csv
 * together with its kernel_curve_<tag>_delta<d>.csv partner, exactly as
 * `carmahf kernel-study` writes them. Files sharing a sampling step are
 * combined into one figure named kernel_fig_delta<d>.svg.
 *
 * Exit codes: 0 ok, 2 usage, 3 malformed or missing input data, 4 could
 * not write output.
 */

import { existsSync, mkdirSync, readdirSync } from "node:fs";
import { join } from "node:path";
import { parseArgs } from "node:util";

import { SchemaError } from "./csv.js";
import { FigureSpec, PanelFiles, render } from "./figure.js";

const VERSION = "0.1.0";

const USAGE = `usage: carmahf-figures render --in DIR --out DIR

Renders carmahf kernel-study CSV files into static SVG figures,
one figure per sampling step found in the input directory.`;

const STUDY_RE = /^kernel_study_(.+)_delta([0-9.eE+-]+)\.csv$/;

// Panel order within a figure; tags not listed here sort alphabetically
// after the known ones.
const TAG_ORDER = ["carma21", "car2", "car3"];

function tagRank(tag: string): number {
  const i = TAG_ORDER.indexOf(tag);
  return i >= 0 ? i : TAG_ORDER.length;
}

interface Group {
  deltaText: string;
  delta: number;
  panels: { tag: string; files: PanelFiles }[];
}

/** Scan a directory for study/curve pairs, grouped by sampling step. */
export function collectGroups(inDir: string): Group[] {
  let names: string[];
  try {
    names = readdirSync(inDir);
  } catch (err) {
    throw new SchemaError(inDir, `cannot list directory: ${(err as Error).message}`);
  }

  const groups = new Map<string, Group>();
  for (const name of [...names].sort()) {
    const m = STUDY_RE.exec(name);
    if (!m) continue;
    const [, tag, deltaText] = m;
    const curveName = `kernel_curve_${tag}_delta${deltaText}.csv`;
    if (!names.includes(curveName)) {
      throw new SchemaError(name, `missing curve partner ${curveName}`);
    }
    let group = groups.get(deltaText!);
    if (!group) {
      group = { deltaText: deltaText!, delta: Number(deltaText), panels: [] };
      groups.set(deltaText!, group);
    }
    group.panels.push({
      tag: tag!,
      files: { studyPath: join(inDir, name), curvePath: join(inDir, curveName) },
    });
  }
  if (groups.size === 0) {
    throw new SchemaError(inDir, "no kernel_study_*_delta*.csv files found");
  }

  const out = [...groups.values()];
  // Coarsest grid first, panels in the usual model order.
  out.sort((a, b) => b.delta - a.delta);
  for (const g of out) {
    g.panels.sort((a, b) => tagRank(a.tag) - tagRank(b.tag) || a.tag.localeCompare(b.tag));
  }
  return out;
}

class UsageError extends Error {}

function parseCli(argv: string[]): { inDir: string; outDir: string } | "help" | "version" {
  const { values, positionals } = parseArgs({
    args: argv,
    options: {
      in: { type: "string" },
      out: { type: "string" },
      help: { type: "boolean", default: false },
      version: { type: "boolean", default: false },
    },
    allowPositionals: true,
  });
  if (values.help) return "help";
  if (values.version) return "version";
  if (positionals.length !== 1 || positionals[0] !== "render") {
    throw new UsageError(`expected exactly one subcommand "render", got: ${positionals.join(" ") || "(none)"}`);
  }
  if (!values.in || !values.out) {
    throw new UsageError("both --in DIR and --out DIR are required");
  }
  return { inDir: values.in, outDir: values.out };
}

/** Run the tool; returns the process exit code instead of calling exit. */
export function run(argv: string[], log: (s: string) => void = console.log, err: (s: string) => void = console.error): number {
  let parsed: ReturnType<typeof parseCli>;
  try {
    parsed = parseCli(argv);
  } catch (e) {
    err(`error: ${(e as Error).message}`);
    err(USAGE);
    return 2;
  }
  if (parsed === "help") {
    log(USAGE);
    return 0;
  }
  if (parsed === "version") {
    log(VERSION);
    return 0;
  }

  let specs: FigureSpec[];
  try {
    const groups = collectGroups(parsed.inDir);
    specs = groups.map((g) => ({
      panels: g.panels.map((p) => p.files),
      outPath: join(parsed.outDir, `kernel_fig_delta${g.deltaText}.svg`),
    }));
  } catch (e) {
    if (e instanceof SchemaError) {
      err(`error: ${e.message}`);
      return 3;
    }
    throw e;
  }

  try {
    mkdirSync(parsed.outDir, { recursive: true });
  } catch (e) {
    err(`error: cannot create ${parsed.outDir}: ${(e as Error).message}`);
    return 4;
  }

  for (const spec of specs) {
    try {
      log(render(spec));
    } catch (e) {
      if (e instanceof SchemaError) {
        err(`error: ${e.message}`);
        return 3;
      }
      if ((e as NodeJS.ErrnoException).code !== undefined) {
        err(`error: cannot write ${spec.outPath}: ${(e as Error).message}`);
        return 4;
      }
      throw e;
    }
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === `file://${process.argv[1]}`;
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
