/**
 * Typed client for the /api/v1 surface.
 *
 * Every method performs exactly one HTTP request. Non-2xx responses raise
 * ApiRequestError carrying the server's ApiError document, so callers can
 * branch on the documented code (STALE_VIEW, SYNTAX_ERROR, ...).
 */

import {
  credentialsBody,
  ingestBody,
  personalizationBody,
  profileBody,
  queryBody,
} from "./serialize.js";
import type {
  ApiErrorDoc,
  PersonalizationAppliedDoc,
  PersonalizationSetting,
  ProfileSavedDoc,
  QueryResultDoc,
  RebuildTicketDoc,
  SchemaInfo,
  SessionDoc,
  ViewStatsDoc,
  WirePreference,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  readonly error: ApiErrorDoc;
  readonly status: number;

  constructor(status: number, error: ApiErrorDoc) {
    super(error.message);
    this.status = status;
    this.error = error;
  }
}

export class ApiClient {
  private token: string | null = null;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: string): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, {
      method,
      headers,
      body,
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, payload as ApiErrorDoc);
    }
    return payload as T;
  }

  async register(userId: string, passphrase: string): Promise<void> {
    await this.request("POST", "/users", credentialsBody(userId, passphrase));
  }

  async openSession(userId: string, passphrase: string): Promise<SessionDoc> {
    const session = await this.request<SessionDoc>(
      "POST",
      "/sessions",
      credentialsBody(userId, passphrase),
    );
    this.token = session.token;
    return session;
  }

  schema(): Promise<SchemaInfo> {
    return this.request("GET", "/schema");
  }

  saveProfile(userId: string, preferences: WirePreference[]): Promise<ProfileSavedDoc> {
    return this.request(
      "PUT",
      `/users/${userId}/profile`,
      profileBody(userId, preferences),
    );
  }

  setPersonalization(
    userId: string,
    setting: PersonalizationSetting,
  ): Promise<PersonalizationAppliedDoc> {
    return this.request(
      "PUT",
      `/users/${userId}/personalization`,
      personalizationBody(setting),
    );
  }

  rebuildView(userId: string): Promise<RebuildTicketDoc> {
    return this.request("POST", `/users/${userId}/view/rebuild`);
  }

  viewStats(userId: string): Promise<ViewStatsDoc> {
    return this.request("GET", `/users/${userId}/view/stats`);
  }

  query(text: string): Promise<QueryResultDoc> {
    return this.request("POST", "/query", queryBody(text));
  }

  ingest(table: string, csv: string): Promise<{ rows_ingested: number }> {
    return this.request("POST", "/admin/ingest", ingestBody(table, csv));
  }
}
