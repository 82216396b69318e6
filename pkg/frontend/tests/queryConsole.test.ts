/**
 * Console rendering against recorded service responses: result tables, the
 * stale-view rebuild call-to-action, and syntax-error carets.
 */
import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  REBUILD_ACTION,
  answeredFromBadge,
  groupKeysFirst,
  renderError,
  renderResultTable,
  renderStaleNotice,
  renderSyntaxError,
} from "../src/queryConsole.js";
import type { ApiErrorDoc, QueryResultDoc } from "../src/types.js";

const fixture = <T>(name: string): T =>
  JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8"));

describe("result table", () => {
  const wide = fixture<QueryResultDoc>("query_result_wide.json");

  it("renders every recorded row with column headers", () => {
    const html = renderResultTable(wide);
    for (const column of wide.columns) expect(html).toContain(`<th>${column}</th>`);
    expect(html).toContain("<td>BMW</td>");
    expect(html).toContain("<td>Renault</td>");
    expect(html).toContain("4 rows");
  });

  it("shows the answered-from badge", () => {
    expect(renderResultTable(wide)).toContain("your view");
    expect(answeredFromBadge("FULL_WAREHOUSE")).toContain("full warehouse");
    expect(answeredFromBadge("GROUP_VIEW")).toContain("group view");
  });

  it("renders nulls distinctly and escapes markup in cells", () => {
    const result: QueryResultDoc = {
      columns: ["Car.model"],
      rows: [[null], ["<script>alert(1)</script>"]],
      answered_from: "FULL_WAREHOUSE",
    };
    const html = renderResultTable(result);
    expect(html).toContain('<td class="null">null</td>');
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
  });

  it("grouped results put group keys before aggregates", () => {
    const grouped: QueryResultDoc = {
      columns: ["sum(euro_sold)", "Car.color"],
      rows: [
        [191180.0, "black"],
        [4500.0, "gray"],
      ],
      answered_from: "USER_VIEW",
    };
    const reordered = groupKeysFirst(grouped);
    expect(reordered.columns).toEqual(["Car.color", "sum(euro_sold)"]);
    expect(reordered.rows[0]).toEqual(["black", 191180.0]);
  });
});

describe("stale view call-to-action", () => {
  const stale = fixture<ApiErrorDoc>("stale_view_response.json");

  it("renders the recorded STALE_VIEW response as a rebuild button", () => {
    const html = renderStaleNotice(stale);
    expect(html).toContain(`data-action="${REBUILD_ACTION}"`);
    expect(html).toContain("Rebuild view");
    expect(html).toContain(stale.message);
  });

  it("renderError dispatches STALE_VIEW to the notice", () => {
    expect(renderError("Select * From Car", stale)).toContain(
      `data-action="${REBUILD_ACTION}"`,
    );
  });
});

describe("syntax errors", () => {
  const syntax = fixture<ApiErrorDoc>("syntax_error_response.json");

  it("puts the caret at the reported position", () => {
    const html = renderSyntaxError("SELECT * FORM Car", syntax);
    const lines = html.split("\n");
    expect(lines[1]).toBe(" ".repeat(9) + "^");
    expect(html).toContain("expected FROM");
  });

  it("renderError dispatches SYNTAX_ERROR to the caret view", () => {
    expect(renderError("SELECT * FORM Car", syntax)).toContain("^");
  });

  it("other errors render as plain messages", () => {
    const err: ApiErrorDoc = { code: "KIND_MISMATCH", message: "boom", detail: {} };
    const html = renderError("q", err);
    expect(html).toContain("KIND_MISMATCH");
    expect(html).not.toContain("data-action");
  });
});
