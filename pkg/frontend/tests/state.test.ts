/** Store transitions, most importantly the stale-banner invariant. */
import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  initialState,
  profileSaved,
  queryFailed,
  querySucceeded,
  rebuildRequested,
  sessionOpened,
  settingApplied,
  statsUpdated,
} from "../src/state.js";
import type { ApiErrorDoc, QueryResultDoc, ViewStatsDoc } from "../src/types.js";

const fixture = <T>(name: string): T =>
  JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8"));

const staleError = fixture<ApiErrorDoc>("stale_view_response.json");
const wideResult = fixture<QueryResultDoc>("query_result_wide.json");
const stats = fixture<ViewStatsDoc>("view_stats.json");

describe("stale banner invariant", () => {
  it("shows exactly when the last query returned STALE_VIEW", () => {
    let s = sessionOpened(initialState(), "ana", false);
    expect(s.staleBanner).toBe(false);

    s = queryFailed(s, "Select * From Car", staleError);
    expect(s.staleBanner).toBe(true);

    s = querySucceeded(s, "Select * From Car", wideResult);
    expect(s.staleBanner).toBe(false);

    const syntax: ApiErrorDoc = { code: "SYNTAX_ERROR", message: "x", detail: {} };
    s = queryFailed(s, "SELEC", syntax);
    expect(s.staleBanner).toBe(false);
  });
});

describe("session and build lifecycle", () => {
  it("a new session resets everything", () => {
    let s = queryFailed(initialState(), "q", staleError);
    s = sessionOpened(s, "bob", true);
    expect(s).toMatchObject({
      userId: "bob",
      needsOnboarding: true,
      staleBanner: false,
      lastResult: null,
    });
  });

  it("saving a profile starts the building phase when a rebuild was enqueued", () => {
    let s = sessionOpened(initialState(), "ana", true);
    s = profileSaved(s, true);
    expect(s.building).toBe(true);
    expect(s.needsOnboarding).toBe(false);
    s = statsUpdated(s, stats);
    expect(s.building).toBe(false);
    expect(s.lastStats).toEqual(stats);
  });

  it("an identical resave does not re-enter the building phase", () => {
    let s = sessionOpened(initialState(), "ana", false);
    s = profileSaved(s, false);
    expect(s.building).toBe(false);
  });

  it("personalization with no cached view waits for the build", () => {
    let s = sessionOpened(initialState(), "ana", false);
    s = settingApplied(s, { enabled: true, degree: 0.5 }, false);
    expect(s.building).toBe(true);
    s = settingApplied(s, { enabled: true, degree: 1 }, true);
    expect(s.building).toBe(false);
    s = settingApplied(s, { enabled: false, degree: 1 }, false);
    expect(s.building).toBe(false);
  });

  it("rebuild requests enter the building phase until fresh stats land", () => {
    let s = sessionOpened(initialState(), "ana", false);
    s = rebuildRequested(s);
    expect(s.building).toBe(true);
    s = statsUpdated(s, { ...stats, stale: true });
    expect(s.building).toBe(true); // stale stats do not end the build
    s = statsUpdated(s, stats);
    expect(s.building).toBe(false);
  });
});
