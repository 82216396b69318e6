/**
 * The onboarding preference editor's model: schema-driven rows that compile
 * into the documented Profile JSON.
 *
 * A row is submittable only when dimension, attribute, operator, and value
 * are all set; ticking "all" forces the operator to "=" and needs no value.
 * Row order is priority order (1 = most important) and rows can be dragged
 * into a new order.
 */

import type {
  AttributeKind,
  DimensionInfo,
  Operator,
  SchemaInfo,
  WirePreference,
} from "./types.js";

export interface PreferenceFormRow {
  dimension: string | null;
  attribute: string | null;
  valueKind: AttributeKind | null;
  operator: Operator | null;
  valueText: string;
  allChecked: boolean;
}

export function emptyRow(): PreferenceFormRow {
  return {
    dimension: null,
    attribute: null,
    valueKind: null,
    operator: null,
    valueText: "",
    allChecked: false,
  };
}

export function dimensionInfo(schema: SchemaInfo, name: string): DimensionInfo {
  const dim = schema.dimensions.find((d) => d.name === name);
  if (!dim) throw new Error(`unknown dimension ${name}`);
  return dim;
}

export function setDimension(
  row: PreferenceFormRow,
  schema: SchemaInfo,
  name: string,
): PreferenceFormRow {
  dimensionInfo(schema, name);
  return { ...row, dimension: name, attribute: null, valueKind: null };
}

export function setAttribute(
  row: PreferenceFormRow,
  schema: SchemaInfo,
  name: string,
): PreferenceFormRow {
  if (!row.dimension) throw new Error("pick a dimension first");
  const attr = dimensionInfo(schema, row.dimension).attributes.find(
    (a) => a.name === name,
  );
  if (!attr) throw new Error(`unknown attribute ${name}`);
  return { ...row, attribute: name, valueKind: attr.kind };
}

export function setOperator(row: PreferenceFormRow, op: Operator): PreferenceFormRow {
  if (row.allChecked && op !== "=") {
    throw new Error("'all' preferences can only use '='");
  }
  return { ...row, operator: op };
}

/** Ticking the "all" checkbox forces the operator to '='. */
export function setAllChecked(row: PreferenceFormRow, checked: boolean): PreferenceFormRow {
  return checked
    ? { ...row, allChecked: true, operator: "=", valueText: "" }
    : { ...row, allChecked: false };
}

export function setValueText(row: PreferenceFormRow, text: string): PreferenceFormRow {
  return { ...row, valueText: text };
}

/** Submit gating: everything must be chosen (value may be the "all" tick). */
export function rowComplete(row: PreferenceFormRow): boolean {
  if (!row.dimension || !row.attribute || !row.operator) return false;
  if (row.allChecked) return true;
  return row.valueText.trim() !== "" && rowValueError(row) === null;
}

export function formComplete(rows: PreferenceFormRow[]): boolean {
  return rows.length > 0 && rows.every(rowComplete);
}

const DATE_RE = /^\d{4}-\d{2}-\d{2}$/;
const INT_RE = /^[+-]?\d+$/;

export function rowValueError(row: PreferenceFormRow): string | null {
  if (row.allChecked || row.valueKind === null) return null;
  const text = row.valueText.trim();
  if (text === "") return "value is required";
  switch (row.valueKind) {
    case "integer":
      return INT_RE.test(text) ? null : "expected a whole number";
    case "decimal":
      return Number.isFinite(Number(text)) ? null : "expected a number";
    case "date":
      return DATE_RE.test(text) ? null : "expected YYYY-MM-DD";
    default:
      return null;
  }
}

/** Drag-reorder: move the row at `from` so it lands at index `to`. */
export function moveRow(
  rows: PreferenceFormRow[],
  from: number,
  to: number,
): PreferenceFormRow[] {
  if (from < 0 || from >= rows.length || to < 0 || to >= rows.length) {
    throw new Error("row index out of range");
  }
  const next = rows.slice();
  const [row] = next.splice(from, 1);
  next.splice(to, 0, row!);
  return next;
}

export function toWirePreference(row: PreferenceFormRow, priority: number): WirePreference {
  if (!rowComplete(row)) throw new Error("row is incomplete");
  const base = {
    dimension: row.dimension!,
    attribute: row.attribute!,
    operator: row.operator!,
  };
  if (row.allChecked) {
    return { ...base, value: "all", priority };
  }
  const text = row.valueText.trim();
  switch (row.valueKind) {
    case "integer":
      return { ...base, value: parseInt(text, 10), priority };
    case "decimal":
      return { ...base, value: Number(text), priority };
    case "date":
      return { ...base, value: text, kind: "date", priority };
    default:
      // a text value spelled "all" must not be mistaken for the catch-all
      return text === "all"
        ? { ...base, value: text, kind: "text", priority }
        : { ...base, value: text, priority };
  }
}

/** Compile the whole form: row order becomes priority 1..k. */
export function toWirePreferences(rows: PreferenceFormRow[]): WirePreference[] {
  return rows.map((row, i) => toWirePreference(row, i + 1));
}
