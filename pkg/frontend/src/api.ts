/** Thin typed client for the session service HTTP API.
 *
 * Every method maps to exactly one endpoint; the UI never touches the
 * filesystem or computes anything the service did not send.
 */

export interface FileEntry {
  file_id: string;
  path: string;
  description: string;
  kind: string;
  missing: boolean;
}

export interface SessionInfo {
  session_id: string;
  summary: string;
  parent_run: string | null;
}

export interface SummaryInfo {
  summary: string;
  run_id: string | null;
  status: string;
}

export class ApiError extends Error {
  status: number;
  detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

async function failure(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export class ApiClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  async createSession(body?: {
    checkpoint_root?: string;
    run_id?: string;
  }): Promise<SessionInfo> {
    const response = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
    if (!response.ok) throw await failure(response);
    return (await response.json()) as SessionInfo;
  }

  async postMessage(
    sessionId: string,
    text: string,
  ): Promise<{ status: string; cursor: number }> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/messages`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ text }),
      },
    );
    if (!response.ok) throw await failure(response);
    return await response.json();
  }

  async listFiles(sessionId: string): Promise<FileEntry[]> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/files`);
    if (!response.ok) throw await failure(response);
    const body = await response.json();
    return body.files as FileEntry[];
  }

  async fetchFile(
    sessionId: string,
    fileId: string,
  ): Promise<{ bytes: Uint8Array; contentType: string }> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/files/${fileId}`,
    );
    if (!response.ok) throw await failure(response);
    const buffer = await response.arrayBuffer();
    return {
      bytes: new Uint8Array(buffer),
      contentType: response.headers.get("content-type") ?? "application/octet-stream",
    };
  }

  async getSummary(sessionId: string): Promise<SummaryInfo> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/summary`,
    );
    if (!response.ok) throw await failure(response);
    return await response.json();
  }

  eventsUrl(sessionId: string, cursor: number): string {
    return `${this.baseUrl}/sessions/${sessionId}/events?cursor=${cursor}`;
  }
}
