/** Integration: a scripted 3-item session against the real review server.
 *
 * Requires the Python package to be installed (python3 -c "import vqaedit").
 * The suite skips itself when it is not.
 */
import { ChildProcess, spawn, spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";

const HELPER = join(
  dirname(fileURLToPath(import.meta.url)),
  "helpers",
  "serve_fixture.py",
);
const PORT = 8765 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

const havePython =
  spawnSync("python3", ["-c", "import vqaedit"]).status === 0;

let proc: ChildProcess | null = null;
let workdir = "";
let labelsPath = "";

async function startServer(): Promise<void> {
  proc = spawn("python3", [HELPER, String(PORT), labelsPath], {
    stdio: "ignore",
  });
  for (let i = 0; i < 100; i += 1) {
    try {
      const res = await fetch(`${BASE}/api/agreement`);
      if (res.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("review server did not come up");
}

function stopServer(): Promise<void> {
  return new Promise((resolve) => {
    if (!proc) {
      resolve();
      return;
    }
    proc.once("exit", () => resolve());
    proc.kill("SIGTERM");
    proc = null;
  });
}

describe.skipIf(!havePython)("live review session", () => {
  beforeAll(async () => {
    workdir = mkdtempSync(join(tmpdir(), "review-ui-"));
    labelsPath = join(workdir, "labels.jsonl");
    await startServer();
  }, 30000);

  afterAll(async () => {
    await stopServer();
    rmSync(workdir, { recursive: true, force: true });
  });

  it("labels three items and the agreement endpoint reflects them exactly", async () => {
    const api = new ReviewApi(BASE);
    const sent: Array<[string, string]> = [];
    const labels = ["yes", "no", "ambiguous"] as const;
    for (const label of labels) {
      const item = await api.next("annotator");
      expect(item.done).toBe(false);
      expect(item.question).toMatch(/^Question e00/);
      await api.label("annotator", item.edit_id!, label);
      sent.push([item.edit_id!, label]);
    }
    const finished = await api.next("annotator");
    expect(finished.done).toBe(true);
    expect(finished.progress).toEqual({ labeled: 3, total: 3 });

    // the three items are distinct and all got stored
    expect(new Set(sent.map(([id]) => id)).size).toBe(3);

    const agreement = await api.agreement();
    expect(agreement.n_items).toBe(3);
    const row = agreement.per_user!.annotator;
    const third = 100 / 3;
    expect(row.yes).toBeCloseTo(third, 10);
    expect(row.no).toBeCloseTo(third, 10);
    expect(row.ambiguous).toBeCloseTo(third, 10);
    // single user: intersection == union == per-user
    expect(agreement.intersection).toEqual(row);
    expect(agreement.union).toEqual(row);
  }, 30000);

  it("double submission returns conflict and stores nothing new", async () => {
    const api = new ReviewApi(BASE);
    const before = await api.agreement();
    const result = await api.label("annotator", "e001", "no");
    expect(result).toBe("conflict");
    expect(await api.agreement()).toEqual(before);
  });

  it("restart loses no labels", async () => {
    const api = new ReviewApi(BASE);
    const before = await api.agreement();
    await stopServer();
    await startServer();
    const after = await api.agreement();
    expect(after).toEqual(before);
    const finished = await api.next("annotator");
    expect(finished.done).toBe(true);
  }, 30000);
});
