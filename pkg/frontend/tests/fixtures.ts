import type { ModelDoc } from "../src/types";

/** A small reviewed model in the shape the service returns. */
export function libraryModel(): ModelDoc {
  return {
    classes: [
      {
        id: "c-book",
        name: "Book",
        status: "proposed",
        attributes: [
          { id: "a-book-title", name: "title", type: "String", status: "proposed" },
          { id: "a-book-isbn", name: "isbn", type: "String", status: "proposed" },
        ],
      },
      {
        id: "c-member",
        name: "Member",
        status: "proposed",
        attributes: [
          { id: "a-member-name", name: "name", type: "String", status: "proposed" },
        ],
      },
      {
        id: "c-librarian",
        name: "Librarian",
        status: "proposed",
        attributes: [],
      },
    ],
    enums: [
      {
        id: "e-level",
        name: "MembershipLevel",
        literals: ["basic", "premium"],
        status: "proposed",
      },
    ],
    relationships: [
      {
        id: "r-borrow",
        kind: "association",
        source: "Member",
        target: "Book",
        name: "memberBook",
        source_mult: "1",
        target_mult: "0..*",
        status: "proposed",
      },
      {
        id: "r-staff",
        kind: "inheritance",
        source: "Librarian",
        target: "Member",
        name: "librarianMember",
        source_mult: null,
        target_mult: null,
        status: "proposed",
      },
    ],
  };
}
