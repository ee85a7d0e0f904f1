/**
 * Thin JSON client for the annotation service.
 *
 * Every non-2xx response carries {"error": {"code", "message", ...}}; that
 * body is surfaced as an ApiFailure so callers can branch on the code
 * (type_violation, revision_conflict, ...) and show the server's message.
 */

import type { EditEnvelope } from "./commands.js";
import type { CheckpointWire, SessionStub, SessionWire } from "./types.js";

export interface ApiErrorBody {
  code: string;
  message: string;
  [extra: string]: unknown;
}

export class ApiFailure extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(body.message);
    this.name = "ApiFailure";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

interface LintEntryWire {
  severity: string;
  code: string;
  variant: string;
  message: string;
}

export interface LintWire {
  ok: boolean;
  entries: LintEntryWire[];
}

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const payload = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const error = (payload["error"] ?? {
        code: "unknown",
        message: `request failed with status ${response.status}`,
      }) as ApiErrorBody;
      throw new ApiFailure(response.status, error);
    }
    return payload as T;
  }

  async listSessions(): Promise<SessionStub[]> {
    const body = await this.request<{ sessions: SessionStub[] }>("GET", "/api/sessions");
    return body.sessions;
  }

  getSession(id: string): Promise<SessionWire> {
    return this.request<SessionWire>("GET", `/api/sessions/${id}`);
  }

  /** Apply one edit; resolves to the updated session, rejects with ApiFailure. */
  postEdit(
    id: string,
    envelope: EditEnvelope,
    expectedRevision?: number,
  ): Promise<SessionWire> {
    const body =
      expectedRevision === undefined
        ? envelope
        : { ...envelope, expected_revision: expectedRevision };
    return this.request<SessionWire>("POST", `/api/sessions/${id}/edits`, body);
  }

  async saveCheckpoint(id: string, note = ""): Promise<number> {
    const body = await this.request<{ checkpoint: number }>(
      "POST",
      `/api/sessions/${id}/checkpoints`,
      { note },
    );
    return body.checkpoint;
  }

  async listCheckpoints(id: string): Promise<CheckpointWire[]> {
    const body = await this.request<{ checkpoints: CheckpointWire[] }>(
      "GET",
      `/api/sessions/${id}/checkpoints`,
    );
    return body.checkpoints;
  }

  /** Rewind live state to checkpoint `number`; resolves to the restored session. */
  async restore(id: string, number: number): Promise<SessionWire> {
    const body = await this.request<{ checkpoint: number; session: SessionWire }>(
      "POST",
      `/api/sessions/${id}/restore/${number}`,
    );
    return body.session;
  }

  lint(id: string): Promise<LintWire> {
    return this.request<LintWire>("GET", `/api/sessions/${id}/lint`);
  }
}
