import { describe, expect, it } from "vitest";

import { ApiError, FetchLike, ReviewApi } from "../src/api.js";

interface Recorded {
  input: string;
  init?: { method?: string; headers?: Record<string, string>; body?: string };
}

function recordingFetch(
  responses: Array<{ status: number; body: unknown }>,
): { calls: Recorded[]; fetch: FetchLike } {
  const calls: Recorded[] = [];
  let i = 0;
  const fetch: FetchLike = async (input, init) => {
    calls.push({ input, init });
    const res = responses[Math.min(i, responses.length - 1)];
    i += 1;
    return {
      ok: res.status >= 200 && res.status < 300,
      status: res.status,
      json: async () => res.body,
    };
  };
  return { calls, fetch };
}

describe("ReviewApi", () => {
  it("encodes the user id in /api/next", async () => {
    const { calls, fetch } = recordingFetch([
      { status: 200, body: { done: false, edit_id: "e1", progress: { labeled: 0, total: 3 } } },
    ]);
    const api = new ReviewApi("http://x", fetch);
    const item = await api.next("a b");
    expect(calls[0].input).toBe("http://x/api/next?user=a%20b");
    expect(item.edit_id).toBe("e1");
    expect(item.done).toBe(false);
    expect(item.progress).toEqual({ labeled: 0, total: 3 });
  });

  it("posts labels as documented JSON", async () => {
    const { calls, fetch } = recordingFetch([{ status: 200, body: { ok: true } }]);
    const api = new ReviewApi("", fetch);
    const result = await api.label("u", "e1", "ambiguous");
    expect(result).toBe("ok");
    expect(calls[0].input).toBe("/api/label");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(calls[0].init?.body ?? "")).toEqual({
      user: "u",
      edit_id: "e1",
      label: "ambiguous",
    });
  });

  it("maps 409 to a conflict result, not an exception", async () => {
    const { fetch } = recordingFetch([{ status: 409, body: { detail: "dup" } }]);
    const api = new ReviewApi("", fetch);
    await expect(api.label("u", "e1", "yes")).resolves.toBe("conflict");
  });

  it("raises ApiError on other failures", async () => {
    const { fetch } = recordingFetch([{ status: 500, body: {} }]);
    const api = new ReviewApi("", fetch);
    await expect(api.next("u")).rejects.toBeInstanceOf(ApiError);
    await expect(api.label("u", "e", "no")).rejects.toBeInstanceOf(ApiError);
  });

  it("fetches agreement and single items", async () => {
    const { calls, fetch } = recordingFetch([{ status: 200, body: { empty: true } }]);
    const api = new ReviewApi("", fetch);
    await api.agreement();
    await api.item("e/1");
    expect(calls[0].input).toBe("/api/agreement");
    expect(calls[1].input).toBe("/api/item/e%2F1");
  });
});
