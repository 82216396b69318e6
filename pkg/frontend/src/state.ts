/**
 * The one workbench store. Transitions are pure functions so every state
 * the UI can reach is constructible in a test; the invariant that the stale
 * banner shows exactly when the last query came back STALE_VIEW lives here
 * and nowhere else.
 */

import type {
  ApiErrorDoc,
  PersonalizationSetting,
  QueryResultDoc,
  ViewStatsDoc,
} from "./types.js";

export interface WorkbenchState {
  userId: string | null;
  needsOnboarding: boolean;
  personalization: PersonalizationSetting;
  lastQueryText: string;
  lastResult: QueryResultDoc | null;
  lastError: ApiErrorDoc | null;
  lastStats: ViewStatsDoc | null;
  staleBanner: boolean;
  building: boolean;
}

export function initialState(): WorkbenchState {
  return {
    userId: null,
    needsOnboarding: false,
    personalization: { enabled: true, degree: 1 },
    lastQueryText: "",
    lastResult: null,
    lastError: null,
    lastStats: null,
    staleBanner: false,
    building: false,
  };
}

export function sessionOpened(
  state: WorkbenchState,
  userId: string,
  needsOnboarding: boolean,
): WorkbenchState {
  return { ...initialState(), userId, needsOnboarding };
}

export function profileSaved(
  state: WorkbenchState,
  rebuildEnqueued: boolean,
): WorkbenchState {
  return {
    ...state,
    needsOnboarding: false,
    building: rebuildEnqueued,
    lastStats: rebuildEnqueued ? null : state.lastStats,
  };
}

export function settingApplied(
  state: WorkbenchState,
  setting: PersonalizationSetting,
  viewReady: boolean,
): WorkbenchState {
  return {
    ...state,
    personalization: setting,
    building: setting.enabled && !viewReady,
  };
}

export function querySucceeded(
  state: WorkbenchState,
  text: string,
  result: QueryResultDoc,
): WorkbenchState {
  return {
    ...state,
    lastQueryText: text,
    lastResult: result,
    lastError: null,
    staleBanner: false,
  };
}

export function queryFailed(
  state: WorkbenchState,
  text: string,
  error: ApiErrorDoc,
): WorkbenchState {
  return {
    ...state,
    lastQueryText: text,
    lastResult: null,
    lastError: error,
    staleBanner: error.code === "STALE_VIEW",
  };
}

export function rebuildRequested(state: WorkbenchState): WorkbenchState {
  return { ...state, building: true };
}

export function statsUpdated(state: WorkbenchState, stats: ViewStatsDoc): WorkbenchState {
  return { ...state, lastStats: stats, building: stats.stale ? state.building : false };
}
