import type { ModelDoc, RelationshipDoc, Status } from "./types";

export interface TreeNode {
  /** Element id for reviewable nodes; null for grouping rows and literals. */
  id: string | null;
  label: string;
  status: Status | null;
  lowConfidence: boolean;
  children: TreeNode[];
}

function node(
  id: string | null,
  label: string,
  status: Status | null,
  children: TreeNode[] = [],
  lowConfidence = false,
): TreeNode {
  return { id, label, status, children, lowConfidence };
}

function relationshipLabel(rel: RelationshipDoc): string {
  if (rel.kind === "inheritance") return `${rel.source} extends ${rel.target}`;
  const verb = rel.kind === "aggregation" ? "contains" : "associates";
  return `${rel.source_mult ?? ""} ${rel.source} ${verb} ${rel.target_mult ?? ""} ${rel.target}`.trim();
}

const KIND_HEADINGS: [RelationshipDoc["kind"], string][] = [
  ["association", "Associations"],
  ["aggregation", "Aggregations"],
  ["inheritance", "Inheritances"],
];

/**
 * The review tree: Classes -> attributes, Enumerations -> literals,
 * Relationships grouped by kind. Literal rows carry no badge (they are not
 * individually reviewable); every other leaf maps to a PATCHable element id.
 */
export function buildTree(model: ModelDoc, lowConfidence: Set<string> = new Set()): TreeNode[] {
  const classGroup = node(
    null,
    "Classes",
    null,
    model.classes.map((cls) =>
      node(
        cls.id,
        cls.name,
        cls.status,
        cls.attributes.map((attr) =>
          node(attr.id, `${attr.name}: ${attr.type}`, attr.status),
        ),
        lowConfidence.has(cls.name),
      ),
    ),
  );
  const enumGroup = node(
    null,
    "Enumerations",
    null,
    model.enums.map((en) =>
      node(
        en.id,
        en.name,
        en.status,
        en.literals.map((lit) => node(null, lit, null)),
        lowConfidence.has(en.name),
      ),
    ),
  );
  const relGroup = node(
    null,
    "Relationships",
    null,
    KIND_HEADINGS.map(([kind, heading]) =>
      node(
        null,
        heading,
        null,
        model.relationships
          .filter((rel) => rel.kind === kind)
          .map((rel) => node(rel.id, relationshipLabel(rel), rel.status)),
      ),
    ),
  );
  return [classGroup, enumGroup, relGroup];
}

/**
 * Local mirror of the service's status rules, used to paint badges without a
 * reload; the server response remains the source of truth and replaces this.
 * Rejecting a class cascades to its attributes and incident relationships;
 * re-accepting resurrects nothing.
 */
export function applyStatus(model: ModelDoc, elementId: string, status: Status): ModelDoc {
  const next: ModelDoc = structuredClone(model);
  for (const cls of next.classes) {
    if (cls.id === elementId) {
      cls.status = status;
      if (status === "rejected") {
        for (const attr of cls.attributes) attr.status = "rejected";
        for (const rel of next.relationships) {
          if (rel.source === cls.name || rel.target === cls.name) rel.status = "rejected";
        }
      }
      return next;
    }
    for (const attr of cls.attributes) {
      if (attr.id === elementId) {
        attr.status = status;
        return next;
      }
    }
  }
  for (const en of next.enums) {
    if (en.id === elementId) {
      en.status = status;
      return next;
    }
  }
  for (const rel of next.relationships) {
    if (rel.id === elementId) {
      rel.status = status;
      return next;
    }
  }
  return next;
}

/** Client-side preview of the accepted-only export filter. */
export function acceptedOnly(model: ModelDoc): ModelDoc {
  const classes = model.classes
    .filter((cls) => cls.status === "accepted")
    .map((cls) => ({
      ...cls,
      attributes: cls.attributes.filter((attr) => attr.status === "accepted"),
    }));
  const kept = new Set(classes.map((cls) => cls.name));
  return {
    classes,
    enums: model.enums.filter((en) => en.status === "accepted"),
    relationships: model.relationships.filter(
      (rel) => rel.status === "accepted" && kept.has(rel.source) && kept.has(rel.target),
    ),
  };
}

export function statusCounts(model: ModelDoc): Record<Status, number> {
  const counts: Record<Status, number> = { proposed: 0, accepted: 0, rejected: 0 };
  for (const cls of model.classes) {
    counts[cls.status] += 1;
    for (const attr of cls.attributes) counts[attr.status] += 1;
  }
  for (const en of model.enums) counts[en.status] += 1;
  for (const rel of model.relationships) counts[rel.status] += 1;
  return counts;
}
