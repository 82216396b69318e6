/**
 * View-vs-warehouse stats panel: kept/total bars per dimension plus the fact
 * row counts. Numbers come solely from /view/stats; nothing is recomputed
 * client-side.
 */

import { escapeHtml } from "./queryConsole.js";
import type { ViewStatsDoc } from "./types.js";

export function barWidthPercent(kept: number, total: number): number {
  if (total <= 0) return 0;
  return Math.round((kept / total) * 1000) / 10;
}

export function renderStatsBars(stats: ViewStatsDoc): string {
  const rows = Object.entries(stats.dimensions)
    .map(([name, { kept, total }]) => {
      const width = barWidthPercent(kept, total);
      return (
        `<div class="stat-row">` +
        `<span class="stat-name">${escapeHtml(name)}</span>` +
        `<span class="stat-count">${kept}/${total}</span>` +
        `<div class="stat-bar"><div class="stat-fill" style="width:${width}%"></div></div>` +
        `</div>`
      );
    })
    .join("");
  const staleNote = stats.stale ? `<p class="stale-note">view is stale</p>` : "";
  return (
    `<div class="stats-panel" data-mode="${stats.mode}">` +
    `<p class="stat-fact">fact rows: ${stats.fact_rows_view}/${stats.fact_rows_total}</p>` +
    rows +
    staleNote +
    `</div>`
  );
}
