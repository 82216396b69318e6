/**
 * Canonical request-body serialization.
 *
 * The server accepts any valid JSON, but the workbench commits to one byte
 * form per body so the contract can be tested against recorded fixtures.
 * Key order is fixed by construction order below; never serialize these
 * bodies any other way.
 */

import type { PersonalizationSetting, WirePreference } from "./types.js";

export function profileBody(userId: string, preferences: WirePreference[]): string {
  const docs = preferences.map((p) => {
    const doc: Record<string, unknown> = {
      dimension: p.dimension,
      attribute: p.attribute,
      operator: p.operator,
      value: p.value,
    };
    if (p.kind !== undefined) doc.kind = p.kind;
    if (p.priority !== undefined) doc.priority = p.priority;
    return doc;
  });
  return JSON.stringify({ user_id: userId, preferences: docs });
}

export function personalizationBody(setting: PersonalizationSetting): string {
  return JSON.stringify({ enabled: setting.enabled, degree: setting.degree });
}

export function queryBody(text: string): string {
  return JSON.stringify({ text });
}

export function credentialsBody(userId: string, passphrase: string): string {
  return JSON.stringify({ user_id: userId, passphrase });
}

export function ingestBody(table: string, csv: string): string {
  return JSON.stringify({ table, csv });
}
