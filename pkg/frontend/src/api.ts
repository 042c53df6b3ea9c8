/**
 * Typed client for the annotation service. The UI owns no state of its
 * own: every view renders from a fresh response, and 409s simply mean
 * "refetch and redraw".
 */

export type TaskStatus = "pending" | "claimed" | "edited" | "peer_verified";

export interface SpanEditWire {
  start: number;
  end: number;
  replacement: string;
}

export interface Task {
  task_id: string;
  image_uri: string;
  image_id: string;
  caption: string;
  context: string;
  source_record_id: string;
  status: TaskStatus;
  claimant: string | null;
  editor: string | null;
  edit: SpanEditWire | null;
  resulting_caption: string | null;
  verifier: string | null;
  rejections: number;
}

export interface TaskRowIn {
  caption: string;
  context: string;
  image_uri?: string;
  image_id?: string;
  source_record_id?: string;
}

export interface CreateResult {
  created: number;
  skipped: number;
  task_ids: string[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }

  /** Stale view of the task's state; refetch and redraw. */
  get isConflict(): boolean {
    return this.status === 409;
  }
}

export class AnnotationApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  health(): Promise<{ status: string; version: string }> {
    return this.request("GET", "/health");
  }

  listTasks(filter?: { status?: TaskStatus; reviewer?: string }): Promise<Task[]> {
    const params = new URLSearchParams();
    if (filter?.status) params.set("status", filter.status);
    if (filter?.reviewer) params.set("reviewer", filter.reviewer);
    const query = params.toString();
    return this.request("GET", `/tasks${query ? `?${query}` : ""}`);
  }

  createTasks(rows: TaskRowIn[]): Promise<CreateResult> {
    return this.request("POST", "/tasks", { instances: rows });
  }

  getTask(taskId: string): Promise<Task> {
    return this.request("GET", `/tasks/${taskId}`);
  }

  claim(taskId: string, annotatorId: string): Promise<Task> {
    return this.request("POST", `/tasks/${taskId}/claim`, { annotator_id: annotatorId });
  }

  submitEdit(
    taskId: string,
    annotatorId: string,
    start: number,
    end: number,
    replacement: string,
  ): Promise<Task> {
    return this.request("POST", `/tasks/${taskId}/edit`, {
      annotator_id: annotatorId,
      start,
      end,
      replacement,
    });
  }

  verify(taskId: string, annotatorId: string, verdict: "accept" | "reject"): Promise<Task> {
    return this.request("POST", `/tasks/${taskId}/verify`, {
      annotator_id: annotatorId,
      verdict,
    });
  }

  async exportNdjson(pairPositives = false): Promise<string> {
    const suffix = pairPositives ? "?pair_positives=true" : "";
    const res = await this.fetchFn(`${this.baseUrl}/export${suffix}`);
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return res.text();
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const parsed = (await res.json()) as { detail?: unknown };
        if (parsed && parsed.detail !== undefined) detail = JSON.stringify(parsed.detail);
        if (typeof parsed?.detail === "string") detail = parsed.detail;
      } catch {
        /* non-JSON error body; keep statusText */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }
}
