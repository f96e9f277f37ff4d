import { describe, expect, it } from "vitest";

import { validateSelection } from "../src/validate.js";
import type { ServiceSchema } from "../src/types.js";

const schema: ServiceSchema = {
  relations: [
    { label: "Visible", help: "", exclusive: false },
    { label: "Subjective", help: "", exclusive: false },
    { label: "Meta", help: "", exclusive: false },
    { label: "Irrelevant", help: "", exclusive: true },
    { label: "Other-Text", help: "", exclusive: true },
  ],
  facets: ["When", "How", "Where"],
  facet_requires: "Meta",
};

describe("validateSelection", () => {
  it("accepts a plain multi-label selection", () => {
    expect(validateSelection(schema, new Set(["Visible", "Subjective"]), new Set())).toEqual([]);
  });

  it("accepts facets when the carrier label is selected", () => {
    expect(
      validateSelection(schema, new Set(["Meta"]), new Set(["When", "How"])),
    ).toEqual([]);
  });

  it("rejects an empty selection", () => {
    expect(validateSelection(schema, new Set(), new Set())).toContain(
      "select at least one label",
    );
  });

  it("rejects exclusive labels mixed with others", () => {
    const violations = validateSelection(
      schema,
      new Set(["Irrelevant", "Visible"]),
      new Set(),
    );
    expect(violations).toContain("Irrelevant cannot combine with other labels");
  });

  it("rejects facets without the carrier label", () => {
    const violations = validateSelection(schema, new Set(["Visible"]), new Set(["When"]));
    expect(violations).toContain("facet labels require Meta");
  });

  it("an exclusive label alone is fine", () => {
    expect(validateSelection(schema, new Set(["Other-Text"]), new Set())).toEqual([]);
  });
});
