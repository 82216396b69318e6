/**
 * Wire types for the /api/v1 surface. These mirror the documented JSON
 * schemas exactly; the contract tests compare serialized bytes against
 * recorded fixtures.
 */

export type Operator = "=" | "!=" | "<" | "<=" | ">" | ">=";

export const OPERATORS: Operator[] = ["=", "!=", "<", "<=", ">", ">="];

export type AttributeKind = "integer" | "decimal" | "text" | "date";

export interface AttributeInfo {
  name: string;
  kind: AttributeKind;
  role: "key" | "attribute";
}

export interface DimensionInfo {
  name: string;
  attributes: AttributeInfo[];
}

export interface SchemaInfo {
  fact: {
    name: string;
    foreign_keys: { dimension: string; column: string }[];
    measures: { name: string; kind: AttributeKind }[];
  };
  dimensions: DimensionInfo[];
}

/** One preference as it travels over the wire. */
export interface WirePreference {
  dimension: string;
  attribute: string;
  operator: Operator;
  value: number | string;
  kind?: "date" | "text";
  priority?: number;
}

export interface PersonalizationSetting {
  enabled: boolean;
  degree: number;
}

export type AnsweredFrom = "FULL_WAREHOUSE" | "USER_VIEW" | "GROUP_VIEW";

export type Cell = number | string | null;

export interface QueryResultDoc {
  columns: string[];
  rows: Cell[][];
  answered_from: AnsweredFrom;
}

export interface ViewStatsDoc {
  mode: "full" | "ids";
  fact_rows_view: number;
  fact_rows_total: number;
  dimensions: Record<string, { kept: number; total: number }>;
  build_seconds: number;
  profile_hash: string;
  stale: boolean;
}

export interface ApiErrorDoc {
  code:
    | "BAD_REQUEST"
    | "UNAUTHENTICATED"
    | "NOT_FOUND"
    | "CONFLICT"
    | "STALE_VIEW"
    | "KIND_MISMATCH"
    | "SYNTAX_ERROR";
  message: string;
  detail: Record<string, unknown>;
}

export interface SessionDoc {
  token: string;
  needs_onboarding: boolean;
}

export interface ProfileSavedDoc {
  profile_hash: string;
  rebuild_enqueued: boolean;
  warnings: string[];
}

export interface ViewSummaryDoc {
  owner: string;
  mode: "full" | "ids";
  profile_hash: string;
  fact_rows: number;
  built_generation: number;
  stale: boolean;
}

export interface PersonalizationAppliedDoc {
  enabled: boolean;
  degree: number;
  view: ViewSummaryDoc | null;
}

export interface RebuildTicketDoc {
  ticket: string;
  coalesced: boolean;
  profile_hash: string;
}
