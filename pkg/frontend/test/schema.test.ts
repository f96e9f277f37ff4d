import { describe, expect, it } from "vitest";

import { buildUiSchema, shortcutFor } from "../src/schema.js";
import type { ServiceSchema } from "../src/types.js";

function descriptor(labels: string[]): ServiceSchema {
  return {
    relations: labels.map((label) => ({ label, help: `about ${label}`, exclusive: false })),
    facets: ["When", "How"],
    facet_requires: "Meta",
  };
}

describe("buildUiSchema", () => {
  it("assigns digit shortcuts in descriptor order", () => {
    const ui = buildUiSchema(descriptor(["A", "B", "C"]));
    expect(ui.shortcuts.get("1")).toBe("A");
    expect(ui.shortcuts.get("2")).toBe("B");
    expect(ui.shortcuts.get("3")).toBe("C");
    expect(shortcutFor(ui, "C")).toBe("3");
  });

  it("caps shortcuts at nine labels", () => {
    const many = descriptor("abcdefghijk".split("").map((c) => c.toUpperCase()));
    const ui = buildUiSchema(many);
    expect(ui.shortcuts.size).toBe(9);
    expect(ui.shortcuts.get("9")).toBe("I");
    expect(shortcutFor(ui, "K")).toBeNull();
  });

  it("carries the taxonomy through without renaming anything", () => {
    const schema = descriptor(["Visible", "Story"]);
    const ui = buildUiSchema(schema);
    expect(ui.relations).toEqual(schema.relations);
    expect(ui.facets).toEqual(schema.facets);
    expect(ui.facetRequires).toBe("Meta");
  });
});
