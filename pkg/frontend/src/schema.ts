/** UI view of the server's label taxonomy.
 *
 * Everything rendered (label names, help text, exclusivity, facets,
 * shortcut keys) derives from the schema descriptor the service sends
 * with each queue item. Nothing about the taxonomy is hardcoded here,
 * so a service configured with a different flat label set renders the
 * same way.
 */

import type { RelationDescriptor, ServiceSchema } from "./types.js";

export interface UiSchema {
  relations: RelationDescriptor[];
  facets: string[];
  facetRequires: string;
  /** key -> relation label, digits assigned in descriptor order */
  shortcuts: Map<string, string>;
}

export function buildUiSchema(schema: ServiceSchema): UiSchema {
  const shortcuts = new Map<string, string>();
  schema.relations.slice(0, 9).forEach((rel, i) => {
    shortcuts.set(String(i + 1), rel.label);
  });
  return {
    relations: schema.relations,
    facets: schema.facets,
    facetRequires: schema.facet_requires,
    shortcuts,
  };
}

export function shortcutFor(ui: UiSchema, label: string): string | null {
  for (const [key, l] of ui.shortcuts) {
    if (l === label) return key;
  }
  return null;
}
