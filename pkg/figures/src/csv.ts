/**
 * Reader for the carmahf kernel-study CSV format.
 *
 * Each file starts with a block of metadata comments,
 *
 *     # carmahf: 0.1.0
 *     # config: {...}
 *     # seed: 0
 *     # model: {...}
 *     # model_tag: car2
 *     # delta: 0.25
 *     # h_fixed: [0.0, 0.5, 1.0]
 *     # h_candidates: [0.211..., 0.788...]
 *     # h_invertible: [0.788...]
 *
 * followed by a column header and data rows. Study files carry the first
 * eight kernel estimates with the true kernel sampled at each offset grid
 * (columns j,t,ghat,g_h0,g_h0.5,g_h1 and g_hc1,g_hc2 when matching
 * candidates exist); curve files carry a dense (t, g) sampling of the true
 * kernel. Values are parsed, never recomputed: everything the renderer
 * draws comes out of these tables.
 *
 * Any deviation from the format raises SchemaError with the file name and
 * what was expected, so a bad pipeline fails loudly instead of producing a
 * silently wrong figure.
 */

/** A CSV file does not match the kernel-study format. */
export class SchemaError extends Error {
  constructor(file: string, detail: string) {
    super(`${file}: ${detail}`);
    this.name = "SchemaError";
  }
}

/** Metadata shared by study and curve files. */
export interface StudyMeta {
  /** Version string of the tool that wrote the file. */
  version: string;
  /** Short model label, e.g. "car2"; used for pairing and panel titles. */
  modelTag: string;
  /** Sampling step of the study grid. */
  delta: number;
  /** Offsets always tabulated, in column order (0, 0.5, 1). */
  hFixed: number[];
  /** Matching-rule offsets, ascending; empty when the order has none. */
  hCandidates: number[];
  /** Subset of hCandidates that restores invertibility, or the whole
   *  interval "(0,1)" when every interior offset works. */
  hInvertible: number[] | string;
  /** Seed recorded by the writer (not used for rendering). */
  seed: number;
}

/** One row of a study file: the j-th kernel estimate and the true kernel
 *  at each candidate position for it. */
export interface StudyRow {
  j: number;
  t: number;
  ghat: number;
  /** g(t + h*delta) for each h in meta.hFixed, same order. */
  gFixed: number[];
  /** g(t + h*delta) for each h in meta.hCandidates, same order. */
  gCandidates: number[];
}

export interface StudyTable {
  file: string;
  meta: StudyMeta;
  rows: StudyRow[];
}

export interface CurvePoint {
  t: number;
  g: number;
}

export interface CurveTable {
  file: string;
  meta: StudyMeta;
  points: CurvePoint[];
}

const META_KEYS = [
  "carmahf",
  "model_tag",
  "delta",
  "h_fixed",
  "h_candidates",
  "h_invertible",
  "seed",
] as const;

/** Split raw text into metadata map, header line and data lines. */
function splitSections(
  text: string,
  file: string,
): { meta: Map<string, string>; header: string; data: string[] } {
  const meta = new Map<string, string>();
  const lines = text.split(/\r?\n/);
  let i = 0;
  for (; i < lines.length; i++) {
    const line = lines[i]!;
    if (!line.startsWith("#")) break;
    const body = line.replace(/^#\s*/, "");
    const sep = body.indexOf(": ");
    if (sep < 0) {
      throw new SchemaError(file, `malformed metadata line ${i + 1}: ${JSON.stringify(line)}`);
    }
    meta.set(body.slice(0, sep), body.slice(sep + 2));
  }
  if (i >= lines.length || lines[i]!.trim() === "") {
    throw new SchemaError(file, "missing column header after metadata block");
  }
  const header = lines[i]!;
  const data = lines.slice(i + 1).filter((l) => l.trim() !== "");
  return { meta, header, data };
}

function metaNumber(meta: Map<string, string>, key: string, file: string): number {
  const raw = meta.get(key)!;
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new SchemaError(file, `metadata ${key} is not a number: ${raw}`);
  }
  return v;
}

function metaNumberList(meta: Map<string, string>, key: string, file: string): number[] {
  const raw = meta.get(key)!;
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    throw new SchemaError(file, `metadata ${key} is not valid JSON: ${raw}`);
  }
  if (!Array.isArray(parsed) || !parsed.every((x) => typeof x === "number" && Number.isFinite(x))) {
    throw new SchemaError(file, `metadata ${key} is not a list of numbers: ${raw}`);
  }
  return parsed;
}

function parseMeta(meta: Map<string, string>, file: string): StudyMeta {
  for (const key of META_KEYS) {
    if (!meta.has(key)) {
      throw new SchemaError(file, `missing metadata line "# ${key}: ..."`);
    }
  }
  // h_invertible is either a JSON list of offsets or the JSON string
  // "(0,1)" when the whole interval matches.
  const rawInv = meta.get("h_invertible")!;
  let hInvertible: number[] | string;
  try {
    const parsed: unknown = JSON.parse(rawInv);
    if (typeof parsed === "string") {
      hInvertible = parsed;
    } else if (
      Array.isArray(parsed) &&
      parsed.every((x) => typeof x === "number" && Number.isFinite(x))
    ) {
      hInvertible = parsed;
    } else {
      throw new Error("wrong shape");
    }
  } catch {
    throw new SchemaError(file, `metadata h_invertible is neither an offset list nor an interval: ${rawInv}`);
  }

  const delta = metaNumber(meta, "delta", file);
  if (delta <= 0) {
    throw new SchemaError(file, `metadata delta must be positive, found ${delta}`);
  }
  return {
    version: meta.get("carmahf")!,
    modelTag: meta.get("model_tag")!,
    delta,
    hFixed: metaNumberList(meta, "h_fixed", file),
    hCandidates: metaNumberList(meta, "h_candidates", file),
    hInvertible,
    seed: metaNumber(meta, "seed", file),
  };
}

/** Column name the writer uses for the true kernel at fixed offset h. */
function fixedColumn(h: number): string {
  return `g_h${h}`;
}

function parseCell(raw: string, file: string, line: number, column: string): number {
  const v = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(v)) {
    throw new SchemaError(file, `row ${line}: column ${column} is not a number: ${JSON.stringify(raw)}`);
  }
  return v;
}

/** Parse a kernel_study_*.csv file. */
export function parseStudyCsv(text: string, file: string): StudyTable {
  const { meta: rawMeta, header, data } = splitSections(text, file);
  const meta = parseMeta(rawMeta, file);

  const expected = ["j", "t", "ghat"]
    .concat(meta.hFixed.map(fixedColumn))
    .concat(meta.hCandidates.map((_, i) => `g_hc${i + 1}`));
  if (header !== expected.join(",")) {
    throw new SchemaError(
      file,
      `expected study columns "${expected.join(",")}", found "${header}"`,
    );
  }
  if (data.length === 0) {
    throw new SchemaError(file, "no data rows");
  }

  const nFixed = meta.hFixed.length;
  const rows: StudyRow[] = data.map((line, k) => {
    const cells = line.split(",");
    if (cells.length !== expected.length) {
      throw new SchemaError(
        file,
        `row ${k + 1}: expected ${expected.length} cells, found ${cells.length}`,
      );
    }
    const num = (idx: number) => parseCell(cells[idx]!, file, k + 1, expected[idx]!);
    const row: StudyRow = {
      j: num(0),
      t: num(1),
      ghat: num(2),
      gFixed: meta.hFixed.map((_, i) => num(3 + i)),
      gCandidates: meta.hCandidates.map((_, i) => num(3 + nFixed + i)),
    };
    if (!Number.isInteger(row.j) || row.j !== k) {
      throw new SchemaError(file, `row ${k + 1}: expected estimate index j=${k}, found ${cells[0]}`);
    }
    return row;
  });

  return { file, meta, rows };
}

/** Parse a kernel_curve_*.csv file. */
export function parseCurveCsv(text: string, file: string): CurveTable {
  const { meta: rawMeta, header, data } = splitSections(text, file);
  const meta = parseMeta(rawMeta, file);

  if (header !== "t,g") {
    throw new SchemaError(file, `expected curve columns "t,g", found "${header}"`);
  }
  if (data.length < 2) {
    throw new SchemaError(file, `a kernel curve needs at least 2 points, found ${data.length}`);
  }

  const points: CurvePoint[] = data.map((line, k) => {
    const cells = line.split(",");
    if (cells.length !== 2) {
      throw new SchemaError(file, `row ${k + 1}: expected 2 cells, found ${cells.length}`);
    }
    return {
      t: parseCell(cells[0]!, file, k + 1, "t"),
      g: parseCell(cells[1]!, file, k + 1, "g"),
    };
  });
  for (let k = 1; k < points.length; k++) {
    if (points[k]!.t <= points[k - 1]!.t) {
      throw new SchemaError(file, `row ${k + 1}: curve abscissae must be strictly increasing`);
    }
  }

  return { file, meta, points };
}
