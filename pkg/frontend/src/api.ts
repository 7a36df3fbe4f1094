/** Typed client for the review server HTTP API.
 *
 * The base URL and fetch implementation are injectable so tests can run
 * against a live server on an arbitrary port or a stub.
 */

export type Label = "yes" | "no" | "ambiguous";

export interface Progress {
  labeled: number;
  total: number;
}

export interface NextItem {
  done: boolean;
  edit_id?: string;
  image_url?: string;
  question?: string;
  expected_answer?: string;
  progress: Progress;
}

export interface AgreementPayload {
  empty?: boolean;
  n_items?: number;
  per_user?: Record<string, Record<Label, number>>;
  intersection?: Record<Label, number>;
  union?: Record<Label, number>;
  missing?: Record<string, number>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ReviewApi {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get(path: string): Promise<unknown> {
    const res = await this.fetchImpl(this.baseUrl + path);
    if (!res.ok) {
      throw new ApiError(res.status, `GET ${path} failed (${res.status})`);
    }
    return res.json();
  }

  async next(user: string): Promise<NextItem> {
    const raw = (await this.get(
      `/api/next?user=${encodeURIComponent(user)}`,
    )) as Record<string, unknown>;
    return {
      done: Boolean(raw.done),
      edit_id: raw.edit_id as string | undefined,
      image_url: raw.image_url as string | undefined,
      question: raw.question as string | undefined,
      expected_answer: raw.expected_answer as string | undefined,
      progress: raw.progress as Progress,
    };
  }

  /** Submit one label.  A 409 (already labeled) resolves to "conflict" so
   * callers can advance without treating a double send as fatal. */
  async label(
    user: string,
    editId: string,
    label: Label,
  ): Promise<"ok" | "conflict"> {
    const res = await this.fetchImpl(this.baseUrl + "/api/label", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ user, edit_id: editId, label }),
    });
    if (res.status === 409) {
      return "conflict";
    }
    if (!res.ok) {
      throw new ApiError(res.status, `POST /api/label failed (${res.status})`);
    }
    return "ok";
  }

  async agreement(): Promise<AgreementPayload> {
    return (await this.get("/api/agreement")) as AgreementPayload;
  }

  async item(editId: string): Promise<Record<string, unknown>> {
    return (await this.get(
      `/api/item/${encodeURIComponent(editId)}`,
    )) as Record<string, unknown>;
  }
}
