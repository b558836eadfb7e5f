"""Turn parsed elements into a well-formed model by applying the fixing rules.

The five rules, applied in this order so later rules see normalized names:

1. naming convention (camel case for classes, attributes, literals; relationship
   names are the joined end names),
2. attribute type correctness (default and fallback type is String),
3. association ends must be classes (convert a data-type end to an attribute,
   otherwise drop),
4. default multiplicity 1 for missing or invalid multiplicities,
5. inheritance ends (append an unknown parent required by several children,
   otherwise drop the inheritance).

Deduplication and inheritance-cycle breaking run last; they are bookkeeping
around the rules, recorded as notes rather than rule applications.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lineparse import AssocLine, ClassLine, EnumLine, InheritLine, ParsedElement
from .metamodel import (
    DATA_TYPES,
    DEFAULT_MULTIPLICITY,
    AttributeDef,
    ClassDef,
    DomainModel,
    ElementProvenance,
    EmptyName,
    EnumDef,
    RelationshipDef,
    RelationshipKind,
    TaskKind,
    is_upper_camel,
    to_lower_camel,
    to_upper_camel,
)

DROPPED = "DROPPED"
APPENDED = "APPENDED"

_TYPE_SYNONYMS = {
    "string": "String", "str": "String", "text": "String", "char": "String",
    "integer": "Integer", "int": "Integer", "long": "Integer",
    "real": "Real", "float": "Real", "double": "Real", "decimal": "Real", "number": "Real",
    "boolean": "Boolean", "bool": "Boolean",
    "date": "Date", "datetime": "Date", "time": "Date",
}


@dataclass
class FixEntry:
    """One rule application: which rule, on what, and what changed."""

    rule: int
    element: str
    before: str
    after: str


@dataclass
class FixReport:
    applied: list[FixEntry] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, rule: int, element: str, before: str, after: str) -> None:
        self.applied.append(FixEntry(rule, element, before, after))

    def note(self, text: str) -> None:
        self.notes.append(text)


@dataclass
class Keep:
    rel: AssocLine


@dataclass
class ToAttribute:
    owner: str
    attribute: AttributeDef


@dataclass
class Drop:
    reason: str


def _default_task(element: ParsedElement) -> TaskKind:
    if element.task is not None:
        return element.task
    if isinstance(element, (ClassLine, EnumLine)):
        return TaskKind.CLASS_TURN2
    if isinstance(element, InheritLine):
        return TaskKind.INHERITANCE
    return TaskKind.ASSOC_AGG


def _provenance(element: ParsedElement, run_id: str) -> ElementProvenance:
    return ElementProvenance(task=_default_task(element), run_id=run_id, raw_line=element.raw_line)


def _safe_upper(raw: str) -> str | None:
    try:
        name = to_upper_camel(raw)
    except EmptyName:
        return None
    return name if is_upper_camel(name) else None


def _safe_lower(raw: str) -> str | None:
    try:
        name = to_lower_camel(raw)
    except EmptyName:
        return None
    return name if name[:1].isalpha() else None


def _normalize_type(raw: str, enum_names: set[str]) -> str | None:
    """Map a raw type mention onto the data-type vocabulary; None when unknown."""
    candidate = _TYPE_SYNONYMS.get(raw.strip().lower())
    if candidate:
        return candidate
    upper = _safe_upper(raw)
    if upper in DATA_TYPES or (upper is not None and upper in enum_names):
        return upper
    return None


def fix_association_ends(
    rel: AssocLine, known_classes: set[str], enum_names: set[str] | None = None
) -> Keep | ToAttribute | Drop:
    """Rule 3: both ends classes -> keep; one data-type end -> attribute; else drop.

    End names are expected to be normalized already. Enumeration names count as
    data types, so an association against an enum becomes an attribute too.
    """
    enum_names = enum_names or set()
    source_known = rel.source in known_classes
    target_known = rel.target in known_classes
    if source_known and target_known:
        return Keep(rel)

    def as_data_type(name: str) -> str | None:
        if name in DATA_TYPES or name in enum_names:
            return name
        return _TYPE_SYNONYMS.get(name.lower())

    if source_known != target_known:
        owner = rel.source if source_known else rel.target
        other = rel.target if source_known else rel.source
        data_type = as_data_type(other)
        if data_type is not None:
            attr_name = _safe_lower(data_type)
            if attr_name is not None:
                return ToAttribute(owner, AttributeDef(attr_name, data_type))
        return Drop(f"end {other} is neither a class nor a data type")
    return Drop(f"neither {rel.source} nor {rel.target} is a known class")


def fix_inheritance_ends(
    inherits: list[InheritLine], known_classes: set[str], reserved_names: set[str] | None = None
) -> tuple[list[InheritLine], list[str], list[InheritLine]]:
    """Rule 5: keep known parents; append a new parent only when >= 2 distinct
    known children need it; otherwise drop. Returns (kept, appended parent
    names, dropped)."""
    reserved = reserved_names or set()
    children_of: dict[str, set[str]] = {}
    for line in inherits:
        if line.child in known_classes and line.parent not in known_classes:
            children_of.setdefault(line.parent, set()).add(line.child)

    appended: list[str] = []
    kept: list[InheritLine] = []
    dropped: list[InheritLine] = []
    known = set(known_classes)
    for parent, children in sorted(children_of.items()):
        if len(children) >= 2 and parent not in reserved and is_upper_camel(parent):
            appended.append(parent)
            known.add(parent)

    for line in inherits:
        if line.child in known_classes and line.parent in known:
            kept.append(line)
        else:
            dropped.append(line)
    return kept, appended, dropped


def _merge_class(target: ClassDef, extra: ClassDef, report: FixReport) -> None:
    existing = {a.name for a in target.attributes}
    for attr in extra.attributes:
        if attr.name in existing:
            report.note(f"dropped duplicate attribute {target.name}.{attr.name}")
        else:
            target.attributes.append(attr)
            existing.add(attr.name)


def _break_inheritance_cycles(rels: list[RelationshipDef], report: FixReport) -> list[RelationshipDef]:
    """Drop the lexicographically-last edge of every inheritance cycle."""
    while True:
        edges = [
            (r.source, r.target) for r in rels if r.kind is RelationshipKind.INHERITANCE
        ]
        cycle = _find_cycle(edges)
        if cycle is None:
            return rels
        worst = max(cycle)
        report.note(f"dropped inheritance {worst[0]} -> {worst[1]} to break a cycle")
        rels = [
            r for r in rels
            if not (
                r.kind is RelationshipKind.INHERITANCE
                and (r.source, r.target) == worst
            )
        ]


def _find_cycle(edges: list[tuple[str, str]]) -> list[tuple[str, str]] | None:
    parents: dict[str, list[str]] = {}
    for child, parent in edges:
        if child == parent:
            return [(child, parent)]
        parents.setdefault(child, []).append(parent)

    visited: set[str] = set()
    path: list[str] = []
    on_path: set[str] = set()

    def visit(node: str) -> list[tuple[str, str]] | None:
        visited.add(node)
        path.append(node)
        on_path.add(node)
        for nxt in sorted(parents.get(node, [])):
            if nxt in on_path:
                nodes = path[path.index(nxt):] + [nxt]
                return list(zip(nodes, nodes[1:]))
            if nxt not in visited:
                found = visit(nxt)
                if found is not None:
                    return found
        path.pop()
        on_path.discard(node)
        return None

    for node in sorted(parents):
        if node not in visited:
            found = visit(node)
            if found is not None:
                return found
    return None


def assemble(
    classes_block: list[ParsedElement],
    rels: list[ParsedElement],
    run_id: str = "",
) -> tuple[DomainModel, FixReport]:
    """Validate and fix parsed elements, then build a well-formed DomainModel.

    Never raises: pathological input yields a small or empty model and the
    FixReport explains every drop and synthesis.
    """
    report = FixReport()

    classes: dict[str, ClassDef] = {}
    enums: dict[str, EnumDef] = {}

    # Rules 1 + 2 on classes and enums, merging duplicates as they appear.
    for element in classes_block:
        if isinstance(element, ClassLine):
            name = _safe_upper(element.name)
            if name is None:
                report.note(f"dropped class with unusable name {element.name!r}")
                continue
            if name != element.name:
                report.add(1, name, element.name, name)
            if name in DATA_TYPES:
                report.note(f"dropped class {name}: reserved data-type name")
                continue
            cls = ClassDef(name, [], provenance=_provenance(element, run_id))
            seen_attrs: set[str] = set()
            for raw_attr, raw_type in element.attrs:
                attr_name = _safe_lower(raw_attr)
                if attr_name is None:
                    report.note(f"dropped attribute with unusable name {raw_attr!r} in {name}")
                    continue
                if attr_name != raw_attr:
                    report.add(1, f"{name}.{attr_name}", raw_attr, attr_name)
                if attr_name in seen_attrs:
                    report.note(f"dropped duplicate attribute {name}.{attr_name}")
                    continue
                seen_attrs.add(attr_name)
                cls.attributes.append(AttributeDef(attr_name, raw_type or ""))
            if name in classes:
                report.note(f"merged duplicate class {name}")
                _merge_class(classes[name], cls, report)
            elif name in enums:
                report.note(f"dropped class {name}: name already declared as an enumeration")
            else:
                classes[name] = cls
        elif isinstance(element, EnumLine):
            name = _safe_upper(element.name)
            if name is None:
                report.note(f"dropped enumeration with unusable name {element.name!r}")
                continue
            if name != element.name:
                report.add(1, name, element.name, name)
            literals: list[str] = []
            for raw_lit in element.literals:
                lit = _safe_lower(raw_lit)
                if lit is None:
                    report.note(f"dropped literal with unusable name {raw_lit!r} in {name}")
                    continue
                if lit != raw_lit:
                    report.add(1, f"{name}.{lit}", raw_lit, lit)
                if lit in literals:
                    report.note(f"dropped duplicate literal {name}.{lit}")
                    continue
                literals.append(lit)
            if not literals:
                report.note(f"dropped enumeration {name}: no usable literals")
                continue
            enum = EnumDef(name, literals, provenance=_provenance(element, run_id))
            if name in enums:
                report.note(f"merged duplicate enumeration {name}")
                for lit in enum.literals:
                    if lit not in enums[name].literals:
                        enums[name].literals.append(lit)
            elif name in classes:
                report.note(f"dropped enumeration {name}: name already declared as a class")
            else:
                enums[name] = enum

    enum_names = set(enums)

    # Rule 2: attribute types onto the data-type vocabulary.
    for cls in classes.values():
        for attr in cls.attributes:
            ref = f"{cls.name}.{attr.name}"
            if not attr.type_name:
                attr.type_name = "String"
                report.add(2, ref, "(no type)", "String")
                continue
            raw = attr.type_name
            normalized = _normalize_type(raw, enum_names)
            upper = _safe_upper(raw)
            if upper is not None and upper in classes:
                attr.type_name = "String"
                report.add(2, ref, raw, "String")
            elif normalized is not None:
                if normalized != raw:
                    report.add(2, ref, raw, normalized)
                attr.type_name = normalized
            else:
                attr.type_name = "String"
                report.add(2, ref, raw, "String")

    known_classes = set(classes)

    # Rules 3 + 4 on associations/aggregations, rule 5 on inheritances.
    assoc_lines: list[AssocLine] = []
    inherit_lines: list[InheritLine] = []
    for element in rels:
        if isinstance(element, AssocLine):
            source = _safe_upper(element.source)
            target = _safe_upper(element.target)
            if source is None or target is None:
                report.add(3, f"{element.source} - {element.target}", element.raw_line or "(no line)", DROPPED)
                continue
            assoc_lines.append(
                AssocLine(source, element.source_mult, target, element.target_mult,
                          element.kind, raw_line=element.raw_line, task=element.task)
            )
        elif isinstance(element, InheritLine):
            child = _safe_upper(element.child)
            parent = _safe_upper(element.parent)
            if child is None or parent is None:
                report.add(5, f"{element.child} extends {element.parent}", element.raw_line or "(no line)", DROPPED)
                continue
            inherit_lines.append(
                InheritLine(child, parent, raw_line=element.raw_line, task=element.task)
            )

    relationships: list[RelationshipDef] = []
    for line in assoc_lines:
        outcome = fix_association_ends(line, known_classes, enum_names)
        ref = f"{line.source} - {line.target}"
        if isinstance(outcome, Drop):
            report.add(3, ref, line.raw_line or ref, DROPPED)
            continue
        if isinstance(outcome, ToAttribute):
            owner = classes[outcome.owner]
            if any(a.name == outcome.attribute.name for a in owner.attributes):
                report.note(
                    f"dropped {ref}: attribute {outcome.owner}.{outcome.attribute.name} already exists"
                )
            else:
                owner.attributes.append(outcome.attribute)
                report.add(3, ref, line.raw_line or ref,
                           f"attribute {outcome.owner}.{outcome.attribute.name}")
            continue
        source_mult, target_mult = line.source_mult, line.target_mult
        if source_mult is None or not source_mult.is_valid():
            before = str(source_mult) if source_mult else "(none)"
            source_mult = DEFAULT_MULTIPLICITY
            report.add(4, ref, before, str(DEFAULT_MULTIPLICITY))
        if target_mult is None or not target_mult.is_valid():
            before = str(target_mult) if target_mult else "(none)"
            target_mult = DEFAULT_MULTIPLICITY
            report.add(4, ref, before, str(DEFAULT_MULTIPLICITY))
        relationships.append(
            RelationshipDef(
                kind=line.kind,
                source=line.source,
                target=line.target,
                name=to_lower_camel(line.source + line.target),
                source_mult=source_mult,
                target_mult=target_mult,
                provenance=_provenance(line, run_id),
            )
        )

    kept, appended_parents, dropped = fix_inheritance_ends(
        inherit_lines, known_classes, reserved_names=enum_names | set(DATA_TYPES)
    )
    for parent in appended_parents:
        classes[parent] = ClassDef(
            parent, [],
            provenance=ElementProvenance(task=TaskKind.INHERITANCE, run_id=run_id, raw_line=""),
        )
        report.add(5, parent, "(missing parent)", APPENDED)
    for line in dropped:
        report.add(5, f"{line.child} extends {line.parent}", line.raw_line or "(no line)", DROPPED)
    for line in kept:
        relationships.append(
            RelationshipDef(
                kind=RelationshipKind.INHERITANCE,
                source=line.child,
                target=line.parent,
                name=to_lower_camel(line.child + line.parent),
                provenance=_provenance(line, run_id),
            )
        )

    model = DomainModel(
        classes=list(classes.values()),
        enums=list(enums.values()),
        relationships=relationships,
    )
    model = dedupe(model, report)
    model.relationships = _break_inheritance_cycles(model.relationships, report)
    return model, report


def dedupe(model: DomainModel, report: FixReport | None = None) -> DomainModel:
    """Collapse duplicate classes (attribute union), enums, and relationships.

    First occurrence wins everywhere; a later duplicate relationship with
    different multiplicities is dropped with a note.
    """
    report = report if report is not None else FixReport()
    classes: dict[str, ClassDef] = {}
    enums: dict[str, EnumDef] = {}
    for cls in model.classes:
        if cls.name in classes:
            report.note(f"merged duplicate class {cls.name}")
            _merge_class(classes[cls.name], cls, report)
        elif cls.name in enums:
            report.note(f"dropped class {cls.name}: name already declared as an enumeration")
        else:
            classes[cls.name] = cls
    for enum in model.enums:
        if enum.name in enums:
            report.note(f"merged duplicate enumeration {enum.name}")
            for lit in enum.literals:
                if lit not in enums[enum.name].literals:
                    enums[enum.name].literals.append(lit)
        elif enum.name in classes:
            report.note(f"dropped enumeration {enum.name}: name already declared as a class")
        else:
            enums[enum.name] = enum

    known = set(classes)
    seen_rels: dict[tuple[RelationshipKind, str, str], RelationshipDef] = {}
    rels: list[RelationshipDef] = []
    for rel in model.relationships:
        if rel.source not in known or rel.target not in known:
            report.note(f"dropped {rel.kind.value} {rel.source} - {rel.target}: missing end class")
            continue
        key = (rel.kind, rel.source, rel.target)
        if key in seen_rels:
            first = seen_rels[key]
            if (first.source_mult, first.target_mult) != (rel.source_mult, rel.target_mult):
                report.note(
                    f"kept first multiplicities for duplicate {rel.kind.value} "
                    f"{rel.source} - {rel.target}"
                )
            else:
                report.note(f"dropped duplicate {rel.kind.value} {rel.source} - {rel.target}")
            continue
        seen_rels[key] = rel
        rels.append(rel)

    # A dropped duplicate enum can leave attribute types dangling; retype them.
    valid_types = set(DATA_TYPES) | set(enums)
    for cls in classes.values():
        for attr in cls.attributes:
            if attr.type_name not in valid_types or attr.type_name in known:
                report.add(2, f"{cls.name}.{attr.name}", attr.type_name, "String")
                attr.type_name = "String"

    return DomainModel(classes=list(classes.values()), enums=list(enums.values()), relationships=rels)
