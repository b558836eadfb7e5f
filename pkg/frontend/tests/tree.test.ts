import { describe, expect, it } from "vitest";

import { acceptedOnly, applyStatus, buildTree, statusCounts } from "../src/tree";
import { libraryModel } from "./fixtures";

describe("buildTree", () => {
  it("groups classes, enumerations, and relationships by kind", () => {
    const [classes, enums, rels] = buildTree(libraryModel());
    expect(classes.label).toBe("Classes");
    expect(classes.children.map((node) => node.label)).toEqual([
      "Book",
      "Member",
      "Librarian",
    ]);
    expect(classes.children[0].children.map((node) => node.label)).toEqual([
      "title: String",
      "isbn: String",
    ]);
    expect(enums.children[0].children.map((node) => node.label)).toEqual([
      "basic",
      "premium",
    ]);
    const headings = rels.children.map((node) => node.label);
    expect(headings).toEqual(["Associations", "Aggregations", "Inheritances"]);
    expect(rels.children[0].children[0].label).toBe("1 Member associates 0..* Book");
    expect(rels.children[2].children[0].label).toBe("Librarian extends Member");
  });

  it("gives literals no badge and no element id", () => {
    const [, enums] = buildTree(libraryModel());
    for (const literal of enums.children[0].children) {
      expect(literal.id).toBeNull();
      expect(literal.status).toBeNull();
    }
  });

  it("flags low-confidence class pairings", () => {
    const [classes] = buildTree(libraryModel(), new Set(["Book"]));
    expect(classes.children[0].lowConfidence).toBe(true);
    expect(classes.children[1].lowConfidence).toBe(false);
  });
});

describe("applyStatus", () => {
  it("rejecting a class cascades to attributes and incident relationships", () => {
    const next = applyStatus(libraryModel(), "c-member", "rejected");
    const member = next.classes.find((cls) => cls.name === "Member")!;
    expect(member.status).toBe("rejected");
    expect(member.attributes.every((attr) => attr.status === "rejected")).toBe(true);
    // both relationships touch Member
    expect(next.relationships.every((rel) => rel.status === "rejected")).toBe(true);
    // unrelated elements untouched
    expect(next.classes.find((cls) => cls.name === "Book")!.status).toBe("proposed");
  });

  it("re-accepting a class does not resurrect cascaded rejections", () => {
    const rejected = applyStatus(libraryModel(), "c-member", "rejected");
    const reaccepted = applyStatus(rejected, "c-member", "accepted");
    const member = reaccepted.classes.find((cls) => cls.name === "Member")!;
    expect(member.status).toBe("accepted");
    expect(member.attributes.every((attr) => attr.status === "rejected")).toBe(true);
    expect(reaccepted.relationships.every((rel) => rel.status === "rejected")).toBe(true);
  });

  it("updates attribute, enum, and relationship statuses individually", () => {
    let doc = applyStatus(libraryModel(), "a-book-title", "accepted");
    expect(doc.classes[0].attributes[0].status).toBe("accepted");
    doc = applyStatus(doc, "e-level", "rejected");
    expect(doc.enums[0].status).toBe("rejected");
    doc = applyStatus(doc, "r-borrow", "accepted");
    expect(doc.relationships[0].status).toBe("accepted");
  });

  it("never mutates its input", () => {
    const original = libraryModel();
    const snapshot = JSON.stringify(original);
    applyStatus(original, "c-member", "rejected");
    expect(JSON.stringify(original)).toBe(snapshot);
  });
});

describe("acceptedOnly", () => {
  it("keeps exactly the accepted elements", () => {
    let doc = applyStatus(libraryModel(), "c-book", "accepted");
    doc = applyStatus(doc, "a-book-title", "accepted");
    const view = acceptedOnly(doc);
    expect(view.classes.map((cls) => cls.name)).toEqual(["Book"]);
    expect(view.classes[0].attributes.map((attr) => attr.name)).toEqual(["title"]);
    expect(view.enums).toEqual([]);
    expect(view.relationships).toEqual([]);
  });

  it("drops relationships whose end class is not accepted", () => {
    let doc = libraryModel();
    for (const id of ["c-book", "c-member", "r-borrow"]) {
      doc = applyStatus(doc, id, "accepted");
    }
    expect(acceptedOnly(doc).relationships.map((rel) => rel.id)).toEqual(["r-borrow"]);

    // now reject Member again: the accepted relationship must disappear too
    doc = applyStatus(doc, "c-member", "rejected");
    const withoutMember = acceptedOnly(doc);
    expect(withoutMember.classes.map((cls) => cls.name)).toEqual(["Book"]);
    expect(withoutMember.relationships).toEqual([]);
  });
});

describe("statusCounts", () => {
  it("counts every reviewable element", () => {
    const counts = statusCounts(libraryModel());
    // 3 classes + 3 attributes + 1 enum + 2 relationships
    expect(counts.proposed).toBe(9);
    expect(counts.accepted).toBe(0);
    expect(counts.rejected).toBe(0);
  });
});
