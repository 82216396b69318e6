/**
 * Personalization controls: the on/off toggle and the degree slider.
 *
 * The slider snaps to k/n detents (n = preference count) so every position
 * corresponds to a concrete preference prefix; the checked-list mirror of
 * the server's ceil(degree * n) rule makes the effective profile visible.
 */

import type { PersonalizationSetting } from "./types.js";

/** Snap a raw slider position in [0, 1] to the nearest k/n detent. */
export function snapDegree(position: number, prefCount: number): number {
  if (prefCount <= 0) return position <= 0 ? 0 : 1;
  const clamped = Math.min(1, Math.max(0, position));
  return Math.round(clamped * prefCount) / prefCount;
}

export function detents(prefCount: number): number[] {
  if (prefCount <= 0) return [0, 1];
  return Array.from({ length: prefCount + 1 }, (_, k) => k / prefCount);
}

/** Mirror of the server's prefix rule, for display only. */
export function effectiveCount(degree: number, prefCount: number): number {
  return Math.ceil(degree * prefCount);
}

/** Which preferences are active at this degree, by priority order. */
export function checkedList(prefCount: number, degree: number): boolean[] {
  const active = effectiveCount(degree, prefCount);
  return Array.from({ length: prefCount }, (_, i) => i < active);
}

export function setting(enabled: boolean, degree: number): PersonalizationSetting {
  if (degree < 0 || degree > 1) throw new Error("degree must be within [0, 1]");
  return { enabled, degree };
}
