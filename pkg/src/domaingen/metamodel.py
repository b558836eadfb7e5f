"""In-memory representation of object-oriented domain models plus well-formedness checks.

A model holds classes (with typed attributes), enumerations, and relationships
(associations, aggregations, inheritances). Every element carries a review
status and, when it was produced by a generation run, provenance pointing back
at the raw text line it was parsed from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

DATA_TYPES = ("String", "Integer", "Real", "Boolean", "Date")

_UPPER_CAMEL_RE = re.compile(r"^[A-Z][A-Za-z0-9]*$")
_LOWER_CAMEL_RE = re.compile(r"^[a-z][A-Za-z0-9]*$")
_ALL_CAPS_RE = re.compile(r"^[A-Z][A-Z0-9_]*$")

# Camel-ish token scanner: acronym runs, Capitalized words, bare lower/digit runs.
_TOKEN_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z0-9]*|[a-z0-9]+")


class EmptyName(ValueError):
    """Raised when a name contains no usable characters."""


class TaskKind(str, Enum):
    """Which generation sub-task produced a piece of output."""

    CLASS_TURN1 = "class_turn1"
    CLASS_TURN2 = "class_turn2"
    CLASS_SINGLE_TURN = "class_single_turn"
    ASSOC_AGG = "assoc_agg"
    INHERITANCE = "inheritance"
    REL_COMBINED = "rel_combined"
    BASELINE_ZERO_SHOT = "baseline_zero_shot"


class ReviewStatus(str, Enum):
    PROPOSED = "proposed"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class RelationshipKind(str, Enum):
    ASSOCIATION = "association"
    AGGREGATION = "aggregation"
    INHERITANCE = "inheritance"


@dataclass(frozen=True)
class Multiplicity:
    """Cardinality of a relationship end; ``upper is None`` means unbounded."""

    lower: int
    upper: int | None = None

    def is_valid(self) -> bool:
        if self.lower < 0:
            return False
        if self.upper is None:
            return True
        return self.upper >= 1 and self.lower <= self.upper

    def __str__(self) -> str:
        if self.upper is None:
            return f"{self.lower}..*"
        if self.lower == self.upper:
            return str(self.lower)
        return f"{self.lower}..{self.upper}"


DEFAULT_MULTIPLICITY = Multiplicity(1, 1)

_MULT_RE = re.compile(r"^(?:\*|(\d+)(?:\s*\.\.\s*(\d+|\*))?)$")


def parse_multiplicity(text: str) -> Multiplicity | None:
    """Parse ``1``, ``0..1``, ``1..*`` or ``*``; returns None when malformed."""
    m = _MULT_RE.match(text.strip())
    if not m:
        return None
    if m.group(1) is None:  # bare "*"
        return Multiplicity(0, None)
    lower = int(m.group(1))
    if m.group(2) is None:
        return Multiplicity(lower, lower)
    if m.group(2) == "*":
        return Multiplicity(lower, None)
    return Multiplicity(lower, int(m.group(2)))


@dataclass(frozen=True)
class ElementProvenance:
    """Where a model element came from: sub-task, run id, and original text line.

    ``raw_line`` is empty only for elements synthesized by fixing rules.
    """

    task: TaskKind
    run_id: str = ""
    raw_line: str = ""


@dataclass
class AttributeDef:
    name: str
    type_name: str = "String"
    status: ReviewStatus = ReviewStatus.PROPOSED


@dataclass
class ClassDef:
    name: str
    attributes: list[AttributeDef] = field(default_factory=list)
    provenance: ElementProvenance | None = field(default=None, compare=False)
    status: ReviewStatus = ReviewStatus.PROPOSED


@dataclass
class EnumDef:
    name: str
    literals: list[str] = field(default_factory=list)
    provenance: ElementProvenance | None = field(default=None, compare=False)
    status: ReviewStatus = ReviewStatus.PROPOSED


@dataclass
class RelationshipDef:
    """A relationship edge; for INHERITANCE, source is the child and target the parent."""

    kind: RelationshipKind
    source: str
    target: str
    name: str = ""
    source_mult: Multiplicity | None = None
    target_mult: Multiplicity | None = None
    provenance: ElementProvenance | None = field(default=None, compare=False)
    status: ReviewStatus = ReviewStatus.PROPOSED


@dataclass
class DomainModel:
    classes: list[ClassDef] = field(default_factory=list)
    enums: list[EnumDef] = field(default_factory=list)
    relationships: list[RelationshipDef] = field(default_factory=list)

    def class_names(self) -> set[str]:
        return {c.name for c in self.classes}

    def enum_names(self) -> set[str]:
        return {e.name for e in self.enums}

    def find_class(self, name: str) -> ClassDef | None:
        for c in self.classes:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class Violation:
    """One broken well-formedness rule: a rule id, the offending element, and why."""

    rule: str
    element: str
    message: str


def is_upper_camel(name: str) -> bool:
    return bool(_UPPER_CAMEL_RE.match(name))


def is_lower_camel(name: str) -> bool:
    return bool(_LOWER_CAMEL_RE.match(name))


def is_all_caps(name: str) -> bool:
    return bool(_ALL_CAPS_RE.match(name))


def _normalize_once(raw: str, first_lower: bool) -> str:
    tokens = _TOKEN_RE.findall(raw)
    if not tokens:
        raise EmptyName(f"no usable characters in name: {raw!r}")
    parts = [t[:1].upper() + t[1:].lower() for t in tokens]
    if first_lower:
        parts[0] = parts[0].lower()
    return "".join(parts)


def _normalize(raw: str, first_lower: bool) -> str:
    # Re-normalizing may reveal new token boundaries (e.g. two adjacent
    # single-letter tokens fuse into an acronym run), so iterate to a fixpoint;
    # three passes always suffice.
    current = raw
    for _ in range(4):
        nxt = _normalize_once(current, first_lower)
        if nxt == current:
            return current
        current = nxt
    return current


def to_upper_camel(raw: str) -> str:
    """Normalize a raw name to UpperCamelCase: ``"bus driver"`` -> ``"BusDriver"``.

    Splits on non-alphanumeric characters and case boundaries; acronym runs
    collapse to a single Title-case token (``"BTMS"`` -> ``"Btms"``). Idempotent.
    """
    return _normalize(raw, first_lower=False)


def to_lower_camel(raw: str) -> str:
    """Like :func:`to_upper_camel` but the first token is lowercased."""
    return _normalize(raw, first_lower=True)


def _valid_type_names(model: DomainModel) -> set[str]:
    return set(DATA_TYPES) | model.enum_names()


def _inheritance_cycles(edges: list[tuple[str, str]]) -> list[list[str]]:
    """Return the node cycles in the child->parent edge set, in deterministic order."""
    parents: dict[str, list[str]] = {}
    for child, parent in edges:
        parents.setdefault(child, []).append(parent)
    cycles: list[list[str]] = []
    visited: set[str] = set()
    stack: list[str] = []
    on_stack: set[str] = set()

    def visit(node: str) -> None:
        visited.add(node)
        stack.append(node)
        on_stack.add(node)
        for nxt in sorted(parents.get(node, [])):
            if nxt in on_stack:
                cycles.append(stack[stack.index(nxt):] + [nxt])
            elif nxt not in visited:
                visit(nxt)
        stack.pop()
        on_stack.discard(node)

    for node in sorted({c for c, _ in edges} | {p for _, p in edges}):
        if node not in visited:
            visit(node)
    return cycles


def validate_model(model: DomainModel) -> list[Violation]:
    """Check every well-formedness invariant; empty result iff the model is clean.

    Total function: never raises, one Violation per broken rule.
    """
    out: list[Violation] = []
    seen_names: set[str] = set()

    for cls in model.classes:
        if not is_upper_camel(cls.name):
            out.append(Violation("naming", cls.name, "class name is not UpperCamelCase"))
        if cls.name in seen_names:
            out.append(Violation("duplicate-name", cls.name, "class/enum name declared twice"))
        seen_names.add(cls.name)

    for enum in model.enums:
        if not is_upper_camel(enum.name):
            out.append(Violation("naming", enum.name, "enumeration name is not UpperCamelCase"))
        if enum.name in seen_names:
            out.append(Violation("duplicate-name", enum.name, "class/enum name declared twice"))
        seen_names.add(enum.name)
        if not enum.literals:
            out.append(Violation("empty-enum", enum.name, "enumeration has no literals"))
        lit_seen: set[str] = set()
        for lit in enum.literals:
            if not (is_lower_camel(lit) or is_all_caps(lit)):
                out.append(Violation("naming", f"{enum.name}.{lit}", "literal is not lowerCamelCase or ALL_CAPS"))
            if lit in lit_seen:
                out.append(Violation("duplicate-literal", f"{enum.name}.{lit}", "literal declared twice"))
            lit_seen.add(lit)

    classes = model.class_names()
    type_names = _valid_type_names(model)
    for cls in model.classes:
        attr_seen: set[str] = set()
        for attr in cls.attributes:
            ref = f"{cls.name}.{attr.name}"
            if not is_lower_camel(attr.name):
                out.append(Violation("naming", ref, "attribute name is not lowerCamelCase"))
            if attr.name in attr_seen:
                out.append(Violation("duplicate-attribute", ref, "attribute declared twice"))
            attr_seen.add(attr.name)
            if attr.type_name in classes:
                out.append(Violation("type-correctness", ref, f"attribute typed by class {attr.type_name}"))
            elif attr.type_name not in type_names:
                out.append(Violation("type-correctness", ref, f"unknown data type {attr.type_name}"))

    inherit_edges: list[tuple[str, str]] = []
    rel_seen: set[tuple[RelationshipKind, str, str]] = set()
    for rel in model.relationships:
        ref = f"{rel.kind.value}:{rel.source}->{rel.target}"
        for end in (rel.source, rel.target):
            if end not in classes:
                out.append(Violation("unknown-end", ref, f"relationship end {end} is not a declared class"))
        key = (rel.kind, rel.source, rel.target)
        if key in rel_seen:
            out.append(Violation("duplicate-relationship", ref, "relationship declared twice"))
        rel_seen.add(key)
        if rel.name and not is_lower_camel(rel.name):
            out.append(Violation("naming", ref, "relationship name is not lowerCamelCase"))
        if rel.kind is RelationshipKind.INHERITANCE:
            if rel.source_mult is not None or rel.target_mult is not None:
                out.append(Violation("inheritance-multiplicity", ref, "inheritance carries multiplicities"))
            if rel.source == rel.target:
                out.append(Violation("self-inheritance", ref, "class inherits from itself"))
            else:
                inherit_edges.append((rel.source, rel.target))
        else:
            for label, mult in (("source", rel.source_mult), ("target", rel.target_mult)):
                if mult is None:
                    out.append(Violation("multiplicity", ref, f"{label} multiplicity missing"))
                elif not mult.is_valid():
                    out.append(Violation("multiplicity", ref, f"{label} multiplicity {mult} is invalid"))

    for cycle in _inheritance_cycles(inherit_edges):
        out.append(Violation("inheritance-cycle", "->".join(cycle), "inheritance cycle"))

    return out
