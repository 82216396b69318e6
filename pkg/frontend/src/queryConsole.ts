/**
 * Query console rendering: result tables, the answered-from badge, syntax
 * errors with a caret at the reported offset, and the stale-view notice
 * whose button is the rebuild call-to-action.
 *
 * Everything renders to HTML strings so behavior is testable without a DOM.
 */

import type { AnsweredFrom, ApiErrorDoc, Cell, QueryResultDoc } from "./types.js";

export const REBUILD_ACTION = "rebuild-view";

const AGGREGATE_RE = /^(sum|avg|count|min|max)\(.*\)$/;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderCell(cell: Cell): string {
  if (cell === null) return "<td class=\"null\">null</td>";
  return `<td>${escapeHtml(String(cell))}</td>`;
}

/** Grouped results show their group keys before the aggregate columns. */
export function groupKeysFirst(result: QueryResultDoc): QueryResultDoc {
  const aggregate = result.columns.map((c) => AGGREGATE_RE.test(c));
  if (!aggregate.some(Boolean) || aggregate.every(Boolean)) return result;
  const order = [
    ...result.columns.map((_, i) => i).filter((i) => !aggregate[i]),
    ...result.columns.map((_, i) => i).filter((i) => aggregate[i]),
  ];
  return {
    columns: order.map((i) => result.columns[i]!),
    rows: result.rows.map((row) => order.map((i) => row[i]!)),
    answered_from: result.answered_from,
  };
}

export function answeredFromBadge(source: AnsweredFrom): string {
  const label = {
    FULL_WAREHOUSE: "full warehouse",
    USER_VIEW: "your view",
    GROUP_VIEW: "group view",
  }[source];
  return `<span class="badge badge-${source.toLowerCase()}">${label}</span>`;
}

export function renderResultTable(result: QueryResultDoc): string {
  const shown = groupKeysFirst(result);
  const head = shown.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
  const body = shown.rows
    .map((row) => `<tr>${row.map(renderCell).join("")}</tr>`)
    .join("");
  return (
    `${answeredFromBadge(shown.answered_from)}` +
    `<table class="results"><thead><tr>${head}</tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    `<p class="rowcount">${shown.rows.length} row${shown.rows.length === 1 ? "" : "s"}</p>`
  );
}

/** Syntax errors render the query with a caret under the failing offset. */
export function renderSyntaxError(queryText: string, error: ApiErrorDoc): string {
  const position = typeof error.detail.position === "number" ? error.detail.position : 0;
  const caretLine = " ".repeat(Math.max(0, position)) + "^";
  return (
    `<pre class="syntax-error">${escapeHtml(queryText)}\n` +
    `${caretLine}\n${escapeHtml(error.message)}</pre>`
  );
}

/** The stale notice is the rebuild call-to-action. */
export function renderStaleNotice(error: ApiErrorDoc): string {
  return (
    `<div class="stale-banner">` +
    `<p>${escapeHtml(error.message)}</p>` +
    `<button data-action="${REBUILD_ACTION}">Rebuild view</button>` +
    `</div>`
  );
}

export function renderError(queryText: string, error: ApiErrorDoc): string {
  if (error.code === "SYNTAX_ERROR") return renderSyntaxError(queryText, error);
  if (error.code === "STALE_VIEW") return renderStaleNotice(error);
  return `<p class="error">${escapeHtml(error.code)}: ${escapeHtml(error.message)}</p>`;
}
