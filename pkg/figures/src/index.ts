export {
  SchemaError,
  parseStudyCsv,
  parseCurveCsv,
} from "./csv.js";
export type { StudyMeta, StudyRow, StudyTable, CurvePoint, CurveTable } from "./csv.js";

export { ALL_MARKERS, DEFAULT_TITLE, buildSvg, render } from "./figure.js";
export type { FigureSpec, MarkerKind, PanelFiles } from "./figure.js";

export { collectGroups, run } from "./cli.js";
