// @vitest-environment jsdom
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotateApp } from "../src/app.js";
import type { NextPairResponse, ServiceSchema, SubmitPayload } from "../src/types.js";

const SCHEMA: ServiceSchema = {
  relations: [
    { label: "Visible", help: "restates what the image shows", exclusive: false },
    { label: "Subjective", help: "reacts to the image", exclusive: false },
    { label: "Action", help: "elaborates a depicted process", exclusive: false },
    { label: "Story", help: "free-standing story", exclusive: false },
    { label: "Meta", help: "about the photo itself", exclusive: false },
    { label: "Irrelevant", help: "unrelated", exclusive: true },
    { label: "Other-Text", help: "text about text", exclusive: true },
    { label: "Other-Gibberish", help: "not language", exclusive: true },
  ],
  facets: ["When", "How", "Where"],
  facet_requires: "Meta",
};

function pairPayload(id: string, position: number, total: number): NextPairResponse {
  return {
    status: "pair",
    pair: { pair_id: id, caption: `caption for ${id}`, image_url: `http://x/${id}.jpg` },
    position,
    total,
    schema: SCHEMA,
  };
}

type Handler = (path: string, init: RequestInit) => { status: number; body: unknown };

let submissions: SubmitPayload[];
let handler: Handler;

function installFetch() {
  vi.stubGlobal("fetch", async (url: string, init: RequestInit = {}) => {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    if (path === "/submit" && typeof init.body === "string") {
      submissions.push(JSON.parse(init.body));
    }
    const { status, body } = handler(path, init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  });
}

/** Serves a fixed queue, accepting every valid submit. */
function queueHandler(queue: NextPairResponse[]): Handler {
  let served = 0;
  return (path) => {
    if (path === "/next") {
      if (served < queue.length) {
        return { status: 200, body: queue[served] };
      }
      return { status: 200, body: { status: "done", completed: queue.length, total: queue.length } };
    }
    if (path === "/submit") {
      served += 1;
      return { status: 200, body: { status: "ok", duplicate: false } };
    }
    throw new Error(`unexpected request ${path}`);
  };
}

function mount(): { app: AnnotateApp; root: HTMLElement } {
  document.body.innerHTML = '<main id="app"></main>';
  const root = document.getElementById("app")!;
  const app = new AnnotateApp(root, new ApiClient("", "ann-test"), { clock: () => 42 });
  return { app, root };
}

beforeEach(() => {
  submissions = [];
  installFetch();
});

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("pair rendering", () => {
  it("mirrors the schema descriptor without hardcoded labels", async () => {
    handler = queueHandler([pairPayload("p1", 1, 3)]);
    const { app, root } = mount();
    await app.start();

    const boxes = root.querySelectorAll("input[data-label]");
    expect(boxes.length).toBe(SCHEMA.relations.length);
    const labels = [...boxes].map((b) => (b as HTMLInputElement).dataset.label);
    expect(labels).toEqual(SCHEMA.relations.map((r) => r.label));
    const facetBoxes = root.querySelectorAll<HTMLInputElement>("input[data-facet]");
    expect(facetBoxes.length).toBe(3);
    expect([...facetBoxes].every((b) => b.disabled)).toBe(true);
    expect(root.querySelector(".position")?.textContent).toBe("pair 1 of 3");
    app.stop();
  });

  it("shows guideline help on hover via the title attribute", async () => {
    handler = queueHandler([pairPayload("p1", 1, 1)]);
    const { app, root } = mount();
    await app.start();
    const visible = root.querySelector<HTMLInputElement>('input[data-label="Visible"]');
    expect(visible?.closest("label")?.title).toBe("restates what the image shows");
    app.stop();
  });

  it("enables facets only while the carrier label is checked", async () => {
    handler = queueHandler([pairPayload("p1", 1, 1)]);
    const { app, root } = mount();
    await app.start();

    app.toggleRelation("Meta");
    const when = root.querySelector<HTMLInputElement>('input[data-facet="When"]')!;
    expect(when.disabled).toBe(false);
    app.toggleFacet("When");
    expect(app.selection().facets).toEqual(["When"]);

    app.toggleRelation("Meta");
    expect(when.disabled).toBe(true);
    // the stale facet is kept on purpose; the server adjudicates it
    expect(app.selection().facets).toEqual(["When"]);
    app.stop();
  });

  it("renders the completion screen for a done payload", async () => {
    handler = queueHandler([]);
    const { app, root } = mount();
    await app.start();
    expect(root.querySelector(".done-screen")).not.toBeNull();
    expect(root.querySelector(".progress-summary")?.textContent).toContain("0 of 0");
    app.stop();
  });

  it("falls back to a placeholder when the image cannot load", async () => {
    handler = queueHandler([pairPayload("p1", 1, 1)]);
    const { app, root } = mount();
    await app.start();

    root.querySelector("figure img")!.dispatchEvent(new Event("error"));
    expect(root.querySelector(".image-placeholder")).not.toBeNull();
    expect(root.querySelector(".image-warning")).not.toBeNull();

    app.toggleRelation("Story");
    await app.submit();
    expect(submissions[0].comment).toBe("[image-load-failed]");
    app.stop();
  });
});

describe("selection rules in the controls", () => {
  it("checking an exclusive label clears the rest, and vice versa", async () => {
    handler = queueHandler([pairPayload("p1", 1, 1)]);
    const { app } = mount();
    await app.start();

    app.toggleRelation("Visible");
    app.toggleRelation("Subjective");
    app.toggleRelation("Irrelevant");
    expect(app.selection().relations).toEqual(["Irrelevant"]);

    app.toggleRelation("Story");
    expect(app.selection().relations).toEqual(["Story"]);
    app.stop();
  });

  it("digit shortcuts toggle labels and Enter submits", async () => {
    handler = queueHandler([pairPayload("p1", 1, 2), pairPayload("p2", 2, 2)]);
    const { app, root } = mount();
    await app.start();

    document.dispatchEvent(new KeyboardEvent("keydown", { key: "1" }));
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "4" }));
    expect(app.selection().relations).toEqual(["Visible", "Story"]);

    document.dispatchEvent(new KeyboardEvent("keydown", { key: "Enter" }));
    await vi.waitFor(() => {
      expect(root.querySelector(".position")?.textContent).toBe("pair 2 of 2");
    });
    expect(submissions[0].relations).toEqual(["Visible", "Story"]);
    expect(submissions[0].timestamp).toBe(42);
    app.stop();
  });

  it("blocks an empty submit client-side", async () => {
    handler = queueHandler([pairPayload("p1", 1, 1)]);
    const { app, root } = mount();
    await app.start();

    await app.submit();
    expect(submissions.length).toBe(0);
    expect(root.querySelector(".messages .violation")?.textContent).toBe(
      "select at least one label",
    );
    app.stop();
  });
});

describe("submit flow", () => {
  it("moves to the next pair after a valid multi-label submit", async () => {
    handler = queueHandler([pairPayload("p1", 1, 2), pairPayload("p2", 2, 2)]);
    const { app, root } = mount();
    await app.start();

    app.toggleRelation("Visible");
    app.toggleRelation("Action");
    await app.submit();
    expect(root.querySelector(".position")?.textContent).toBe("pair 2 of 2");
    expect(submissions[0]).toMatchObject({
      pair_id: "p1",
      relations: ["Visible", "Action"],
      facets: [],
    });
    app.stop();
  });

  it("renders a server-side rule rejection inline and keeps the state", async () => {
    const base = queueHandler([pairPayload("p1", 1, 1)]);
    let rejectNext = true;
    handler = (path, init) => {
      if (path === "/submit" && rejectNext) {
        rejectNext = false;
        return {
          status: 422,
          body: { detail: { violations: ["facet without Meta"] } },
        };
      }
      return base(path, init);
    };
    const { app, root } = mount();
    await app.start();

    app.toggleRelation("Visible");
    app.toggleRelation("Meta");
    app.toggleFacet("How");
    app.toggleRelation("Meta"); // stale facet survives, server will refuse
    await app.submit();

    expect(root.querySelector(".messages .violation")?.textContent).toBe(
      "facet without Meta",
    );
    // nothing was cleared by the rejection
    expect(app.selection().facets).toEqual(["How"]);
    const checked = root.querySelectorAll("input[data-facet]:checked");
    expect(checked.length).toBe(1);

    // correcting the selection goes through
    app.toggleRelation("Meta");
    await app.submit();
    expect(root.querySelector(".done-screen")).not.toBeNull();
    app.stop();
  });

  it("offers a retry on network failure without losing the selection", async () => {
    const base = queueHandler([pairPayload("p1", 1, 1)]);
    let failures = 1;
    const realFetch = globalThis.fetch;
    vi.stubGlobal("fetch", async (url: string, init: RequestInit = {}) => {
      const path = url.replace(/^https?:\/\/[^/]+/, "");
      if (path === "/submit" && failures > 0) {
        failures -= 1;
        throw new TypeError("network down");
      }
      return realFetch(url, init);
    });
    handler = base;

    const { app, root } = mount();
    await app.start();
    app.toggleRelation("Subjective");
    const comment = root.querySelector<HTMLTextAreaElement>("textarea.comment")!;
    comment.value = "quite a view";
    await app.submit();

    const banner = root.querySelector(".retry-banner");
    expect(banner).not.toBeNull();
    expect(app.selection().relations).toEqual(["Subjective"]);

    banner!.querySelector("button")!.click();
    await vi.waitFor(() => {
      expect(root.querySelector(".done-screen")).not.toBeNull();
    });
    expect(submissions.length).toBe(1);
    expect(submissions[0]).toMatchObject({
      pair_id: "p1",
      relations: ["Subjective"],
      comment: "quite a view",
    });
    app.stop();
  });
});
