/** Client-side mirror of the server's selection rules.
 *
 * The mirror is advisory: it drives control gating and inline warnings
 * so annotators rarely hit a server rejection, but the server stays
 * authoritative and every submission is validated there again.
 */

import type { ServiceSchema } from "./types.js";

export function validateSelection(
  schema: ServiceSchema,
  relations: ReadonlySet<string>,
  facets: ReadonlySet<string>,
): string[] {
  const violations: string[] = [];
  if (relations.size === 0) {
    violations.push("select at least one label");
  }
  for (const rel of schema.relations) {
    if (rel.exclusive && relations.has(rel.label) && relations.size > 1) {
      violations.push(`${rel.label} cannot combine with other labels`);
    }
  }
  if (facets.size > 0 && !relations.has(schema.facet_requires)) {
    violations.push(`facet labels require ${schema.facet_requires}`);
  }
  return violations;
}
