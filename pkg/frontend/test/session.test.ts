// @vitest-environment jsdom
//
// Scripted end-to-end session against the real annotation service: two
// annotators work through the same five-pair overlap queue in the
// browser app, one submit is rejected server-side for a facet rule,
// and afterwards the on-disk store and the agreement endpoint are
// checked exactly.
import { ChildProcess, spawn, spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotateApp } from "../src/app.js";

// vitest runs with the package root as cwd; under the jsdom environment
// import.meta.url is http-scheme, so the path comes from cwd instead.
const FRONTEND = process.cwd();
const PORT = 8700 + (process.pid % 800);
const BASE = `http://127.0.0.1:${PORT}`;

const PAIRS = [
  { pair_id: "p1", image_ref: "http://img.example/1.jpg", caption: "a dog on the beach" },
  { pair_id: "p2", image_ref: "http://img.example/2.jpg", caption: "took this at sunrise" },
  { pair_id: "p3", image_ref: "http://img.example/3.jpg", caption: "grandpa loved this lake" },
  { pair_id: "p4", image_ref: "http://img.example/4.jpg", caption: "buy one get one free" },
  { pair_id: "p5", image_ref: "http://img.example/5.jpg", caption: "he is mid jump here" },
];

let workDir: string;
let storePath: string;
let server: ChildProcess | null = null;

function buildDistIfMissing(): void {
  if (existsSync(join(FRONTEND, "dist", "index.html"))) return;
  const tsc = join(FRONTEND, "node_modules", ".bin", "tsc");
  const compiled = spawnSync(tsc, ["-p", "tsconfig.build.json"], { cwd: FRONTEND });
  if (compiled.status !== 0) {
    throw new Error(`tsc failed: ${compiled.stderr}`);
  }
  const copied = spawnSync("node", ["scripts/copy-static.mjs"], { cwd: FRONTEND });
  if (copied.status !== 0) {
    throw new Error(`asset copy failed: ${copied.stderr}`);
  }
}

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 30000;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/progress`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("annotation service did not come up");
}

beforeAll(async () => {
  buildDistIfMissing();
  workDir = mkdtempSync(join(tmpdir(), "annotate-ui-"));
  const pairsPath = join(workDir, "pairs.jsonl");
  storePath = join(workDir, "store.jsonl");
  writeFileSync(
    pairsPath,
    PAIRS.map((p) =>
      JSON.stringify({ ...p, source_domain: "img.example", origin: "GroundTruth" }),
    ).join("\n") + "\n",
  );
  server = spawn(
    "python3",
    [
      "-m", "cohcap.cli", "serve",
      "--pairs", pairsPath,
      "--annotators", "ann-a,ann-b",
      "--overlap", "5",
      "--seed", "0",
      "--store", storePath,
      "--static-dir", join(FRONTEND, "dist"),
      "--port", String(PORT),
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  await waitForServer();
});

afterAll(async () => {
  if (server) {
    server.kill("SIGTERM");
    await new Promise((r) => server!.once("exit", r));
  }
  rmSync(workDir, { recursive: true, force: true });
});

interface SessionStep {
  relations: string[];
  facets?: string[];
  comment?: string;
}

function mountApp(annotator: string, clock: () => number) {
  document.body.innerHTML = '<main id="app"></main>';
  const root = document.getElementById("app")!;
  const app = new AnnotateApp(root, new ApiClient(BASE, annotator), { clock });
  return { app, root };
}

async function annotateStep(app: AnnotateApp, root: HTMLElement, step: SessionStep) {
  for (const rel of step.relations) app.toggleRelation(rel);
  for (const facet of step.facets ?? []) app.toggleFacet(facet);
  if (step.comment) {
    root.querySelector<HTMLTextAreaElement>("textarea.comment")!.value = step.comment;
  }
  await app.submit();
}

const SCRIPT: SessionStep[] = [
  { relations: ["Visible"] },
  { relations: ["Meta"], facets: ["When"] },
  { relations: ["Subjective", "Story"], comment: "reads like a memory" },
  { relations: ["Irrelevant"] },
  { relations: ["Visible", "Action"] },
];

describe("scripted two-annotator session", () => {
  it("serves the built interface shell", async () => {
    const res = await fetch(`${BASE}/ui/`);
    expect(res.status).toBe(200);
    expect(await res.text()).toContain('<main id="app">');
    const js = await fetch(`${BASE}/ui/main.js`);
    expect(js.status).toBe(200);
  });

  it("walks annotator a through the queue, including a server-side facet rejection", async () => {
    let ts = 0;
    const { app, root } = mountApp("ann-a", () => ts);
    await app.start();
    expect(root.querySelector(".position")?.textContent).toBe("pair 1 of 5");

    ts = 101;
    await annotateStep(app, root, SCRIPT[0]);

    // pair 2: check Visible and Meta plus a facet, then uncheck Meta.
    // Visible keeps the selection non-empty and the stale facet is kept
    // client-side, so the submit goes out and the server refuses it.
    ts = 102;
    app.toggleRelation("Visible");
    app.toggleRelation("Meta");
    app.toggleFacet("When");
    app.toggleRelation("Meta");
    await app.submit();
    expect(root.querySelector(".messages .violation")?.textContent).toBe("facet without Meta");
    expect(root.querySelector(".position")?.textContent).toBe("pair 2 of 5");
    const staleFacet = root.querySelector<HTMLInputElement>('input[data-facet="When"]');
    expect(staleFacet?.checked).toBe(true);

    app.toggleRelation("Meta");
    app.toggleRelation("Visible");
    await app.submit();
    expect(root.querySelector(".position")?.textContent).toBe("pair 3 of 5");

    for (const [i, step] of SCRIPT.slice(2).entries()) {
      ts = 103 + i;
      await annotateStep(app, root, step);
    }
    expect(root.querySelector(".done-screen")).not.toBeNull();
    expect(root.querySelector(".progress-summary")?.textContent).toContain("5 of 5");
    app.stop();
  });

  it("walks annotator b through the same labels", async () => {
    let ts = 0;
    const { app, root } = mountApp("ann-b", () => ts);
    await app.start();
    for (const [i, step] of SCRIPT.entries()) {
      ts = 201 + i;
      await annotateStep(app, root, { ...step, comment: undefined });
    }
    expect(root.querySelector(".done-screen")).not.toBeNull();
    app.stop();
  });

  it("persisted exactly the scripted records, field by field", () => {
    const lines = readFileSync(storePath, "utf-8").trim().split("\n");
    const records = lines.map((l) => JSON.parse(l));
    const expected = [
      { pair_id: "p1", annotator_id: "ann-a", relations: ["Visible"], facets: [], comment: null, timestamp: 101 },
      { pair_id: "p2", annotator_id: "ann-a", relations: ["Meta"], facets: ["When"], comment: null, timestamp: 102 },
      { pair_id: "p3", annotator_id: "ann-a", relations: ["Subjective", "Story"], facets: [], comment: "reads like a memory", timestamp: 103 },
      { pair_id: "p4", annotator_id: "ann-a", relations: ["Irrelevant"], facets: [], comment: null, timestamp: 104 },
      { pair_id: "p5", annotator_id: "ann-a", relations: ["Visible", "Action"], facets: [], comment: null, timestamp: 105 },
      { pair_id: "p1", annotator_id: "ann-b", relations: ["Visible"], facets: [], comment: null, timestamp: 201 },
      { pair_id: "p2", annotator_id: "ann-b", relations: ["Meta"], facets: ["When"], comment: null, timestamp: 202 },
      { pair_id: "p3", annotator_id: "ann-b", relations: ["Subjective", "Story"], facets: [], comment: null, timestamp: 203 },
      { pair_id: "p4", annotator_id: "ann-b", relations: ["Irrelevant"], facets: [], comment: null, timestamp: 204 },
      { pair_id: "p5", annotator_id: "ann-b", relations: ["Visible", "Action"], facets: [], comment: null, timestamp: 205 },
    ];
    expect(records).toEqual(expected);
  });

  it("reports full progress and perfect agreement on the overlap", async () => {
    const progress = await (await fetch(`${BASE}/progress`)).json();
    expect(progress.total_completed).toBe(10);
    expect(progress.overlap_completed_both).toBe(5);

    const agreement = await (await fetch(`${BASE}/agreement`)).json();
    expect(agreement.defined).toBe(true);
    expect(agreement.n_pairs).toBe(5);
    expect(agreement.mean_kappa).toBe(1.0);
    for (const [label, report] of Object.entries<any>(agreement.per_label)) {
      if (report.kappa !== null) {
        expect(report.kappa, `kappa for ${label}`).toBe(1.0);
      }
    }
  });
});
