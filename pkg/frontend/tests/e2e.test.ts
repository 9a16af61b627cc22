// @vitest-environment jsdom
//
// End-to-end acceptance: a scripted browser session completes a 50-tuple
// audit against a real local service. Asserts, via the exported log, that
// every accepted click produced exactly one judgment record, that the live
// report refreshed at every refit cadence point, and that a mid-session
// reload resumed at the server's cursor without losing or re-serving rows.
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import fs from "node:fs";
import net from "node:net";
import os from "node:os";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import type { Value } from "../src/api";
import { AuditConsole } from "../src/controller";

let tmpDir: string;
let proc: ChildProcess | null = null;
let base: string;
let stderrBuf = "";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.once("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const { port } = srv.address() as net.AddressInfo;
      srv.close((err) => (err ? reject(err) : resolve(port)));
    });
  });
}

async function waitForHealth(timeoutMs = 90_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastErr: unknown = null;
  while (Date.now() < deadline) {
    if (proc?.exitCode !== null && proc?.exitCode !== undefined) {
      throw new Error(`service exited with ${proc.exitCode}:\n${stderrBuf}`);
    }
    try {
      const res = await fetch(`${base}/health`);
      if (res.ok) return;
    } catch (err) {
      lastErr = err;
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error(`service never became healthy: ${String(lastErr)}\n${stderrBuf}`);
}

beforeAll(async () => {
  tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "fairaudit-console-e2e-"));
  const csv = path.join(tmpDir, "compas.csv");
  const sample = spawnSync(
    "python3",
    ["-m", "fairaudit.cli", "sample", "--dataset", "compas", "--rows", "1000", "--out", csv],
    { encoding: "utf-8" },
  );
  if (sample.status !== 0) {
    throw new Error(`sample generation failed: ${sample.stderr}`);
  }

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  proc = spawn(
    "python3",
    [
      "-m",
      "fairaudit.cli",
      "serve",
      "--data",
      csv,
      "--recipe",
      "compas-binary",
      "--system-column",
      "compas_pred",
      "--log",
      path.join(tmpDir, "audit.jsonl"),
      "--port",
      String(port),
    ],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  proc.stderr!.on("data", (chunk: Buffer) => {
    stderrBuf += chunk.toString();
  });
  await waitForHealth();
});

afterAll(async () => {
  if (proc !== null && proc.exitCode === null) {
    proc.kill("SIGTERM");
    await new Promise((resolve) => proc!.once("exit", resolve));
  }
  fs.rmSync(tmpDir, { recursive: true, force: true });
});

function memoryStorage(): Storage {
  const map = new Map<string, string>();
  return {
    get length() {
      return map.size;
    },
    clear: () => map.clear(),
    getItem: (k: string) => map.get(k) ?? null,
    key: (i: number) => Array.from(map.keys())[i] ?? null,
    removeItem: (k: string) => void map.delete(k),
    setItem: (k: string, v: string) => void map.set(k, v),
  };
}

function mount(): HTMLElement {
  const node = document.createElement("div");
  document.body.append(node);
  return node;
}

function build(storage: Storage) {
  const root = mount();
  const console_ = new AuditConsole({ baseUrl: base, root, storage });
  return { root, console_ };
}

/** The scripted auditor's own rule: flag repeat felons and habitual
 *  misdemeanants, computed from the visible card features. */
function intrinsicLabel(features: Record<string, Value>): 0 | 1 {
  const priors = Number(features.priors_count);
  const charge = String(features.c_charge_degree);
  if (priors >= 1 && priors <= 3 && charge === "F") return 1;
  if (priors > 3 && charge === "M") return 1;
  return 0;
}

interface LogRecord {
  kind: string;
  session_id?: string;
  row_id?: number;
  verdict?: number;
}

describe("console against a live service", () => {
  it("completes a scripted 50-tuple audit with a mid-session reload", async () => {
    const storage = memoryStorage();
    let { root, console_ } = build(storage);
    console_.boot();
    await console_.settled();
    expect(root.querySelector(".start-screen")).not.toBeNull();

    console_.dispatch({ kind: "start_requested", auditorId: "e2e-auditor" });
    await console_.settled();
    expect(console_.state.screen).toBe("card");
    expect(root.querySelector(".progress")?.textContent).toBe("1 of 50");
    const sessionId = console_.state.sessionId!;

    const clickedVerdicts: number[] = [];
    // fitted_at observed in the DOM after each acked judgment
    const fittedTrail: number[] = [];
    let reloaded = false;

    while (console_.state.screen === "card") {
      const card = console_.state.card!;
      const verdict =
        intrinsicLabel(card.features) !== Number(card.system_label) ? 1 : 0;
      const button = root.querySelector<HTMLButtonElement>(
        verdict === 1 ? "#verdict-unfair" : "#verdict-fair",
      )!;
      button.click();
      if (card.progress.served === 10) {
        // a real double-click mid-session: the guard must swallow it
        button.click();
      }
      clickedVerdicts.push(verdict);
      await console_.settled();
      expect(console_.state.banner).toBeNull();

      const judged = console_.state.judged;
      expect(judged).toBe(clickedVerdicts.length);
      const fittedNode = root.querySelector("[data-fitted-at]");
      const fitted =
        fittedNode === null ? 0 : Number(fittedNode.getAttribute("data-fitted-at"));
      fittedTrail.push(fitted);
      if (judged < 10) {
        expect(root.querySelector("[data-insufficient]")).not.toBeNull();
      }

      if (judged === 17 && !reloaded) {
        // reload: fresh DOM and controller over the same storage
        reloaded = true;
        const pendingRow = console_.state.card?.row_id;
        console_.stop();
        root.remove();
        ({ root, console_ } = build(storage));
        console_.boot();
        await console_.settled();
        expect(console_.state.screen).toBe("card");
        expect(console_.state.judged).toBe(17);
        // the served-but-unjudged tuple comes back, not a new one
        expect(console_.state.card?.row_id).toBe(pendingRow);
        expect(root.querySelector(".progress")?.textContent).toBe("18 of 50");
      }
    }

    expect(console_.state.screen).toBe("complete");
    expect(root.querySelector(".completion-screen")).not.toBeNull();
    expect(clickedVerdicts).toHaveLength(50);

    // the report refreshed after every ack and advanced exactly at the
    // refit cadence: fitted_at == floor(judged / 10) * 10 throughout
    const expectedTrail = Array.from({ length: 50 }, (_, i) =>
      Math.floor((i + 1) / 10) * 10,
    );
    expect(fittedTrail).toEqual(expectedTrail);
    expect(root.querySelector("[data-fitted-at]")?.getAttribute("data-fitted-at")).toBe("50");
    expect(console_.state.report?.status).toBe("complete");
    expect(console_.state.report?.judged).toBe(50);

    // the exported log is the source of truth: exactly one judgment per
    // accepted click, no tuple served twice despite the reload
    const text = await (await fetch(`${base}/export`)).text();
    const records: LogRecord[] = text
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line) as LogRecord);
    const mine = records.filter((r) => r.session_id === sessionId);
    const judgments = mine.filter((r) => r.kind === "judgment");
    const served = mine.filter((r) => r.kind === "tuple_served");

    expect(judgments).toHaveLength(50);
    expect(new Set(judgments.map((r) => r.row_id)).size).toBe(50);
    expect(judgments.map((r) => r.verdict)).toEqual(clickedVerdicts);

    expect(served).toHaveLength(50);
    const serveCounts = new Map<number, number>();
    for (const r of served) {
      serveCounts.set(r.row_id!, (serveCounts.get(r.row_id!) ?? 0) + 1);
    }
    expect(Math.max(...serveCounts.values())).toBe(1);
  });

  it("a stale stored session shows the error screen, not a card", async () => {
    const storage = memoryStorage();
    storage.setItem("fairaudit.session", "no-such-session");
    const { root, console_ } = build(storage);
    console_.boot();
    await console_.settled();
    expect(root.querySelector(".error-screen")).not.toBeNull();
    expect(root.querySelector(".tuple-card")).toBeNull();
    expect(storage.getItem("fairaudit.session")).toBeNull();
  });

  it("reports liveness over /health", async () => {
    const res = await fetch(`${base}/health`);
    expect(res.ok).toBe(true);
    const body = (await res.json()) as { status: string; dataset: string };
    expect(body.status).toBe("ok");
    expect(body.dataset).toBe("compas-binary");
  });
});
