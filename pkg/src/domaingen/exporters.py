"""Model serialization: the canonical ``.model.json`` format and PlantUML text.

The canonical format is deterministic: sorted keys, sorted element order
(classes and enums by name, relationships by kind/source/target), newline
terminated. Equal models always serialize to identical bytes, which is what
makes replayed runs byte-comparable.
"""

from __future__ import annotations

import json
from typing import Any

from .metamodel import (
    DATA_TYPES,
    AttributeDef,
    ClassDef,
    DomainModel,
    ElementProvenance,
    EnumDef,
    Multiplicity,
    RelationshipDef,
    RelationshipKind,
    ReviewStatus,
    TaskKind,
    Violation,
    parse_multiplicity,
    validate_model,
)


class FormatError(ValueError):
    """The document is not syntactically valid."""


class SchemaError(ValueError):
    """The document parses but does not have the expected shape."""


class ValidationError(ValueError):
    """The document describes a model that breaks well-formedness rules."""

    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(f"{v.rule}: {v.element}" for v in violations))
        self.violations = violations


def _prov_dict(prov: ElementProvenance | None) -> dict[str, str] | None:
    if prov is None:
        return None
    return {"task": prov.task.value, "run_id": prov.run_id, "raw_line": prov.raw_line}


def _mult_str(mult: Multiplicity | None) -> str | None:
    return None if mult is None else str(mult)


def canonical_order(model: DomainModel) -> DomainModel:
    """A copy of the model in canonical element order."""
    return DomainModel(
        classes=sorted(model.classes, key=lambda c: c.name),
        enums=sorted(model.enums, key=lambda e: e.name),
        relationships=sorted(
            model.relationships, key=lambda r: (r.kind.value, r.source, r.target)
        ),
    )


def model_to_dict(model: DomainModel) -> dict[str, Any]:
    ordered = canonical_order(model)
    return {
        "classes": [
            {
                "name": c.name,
                "attributes": [
                    {"name": a.name, "type": a.type_name, "status": a.status.value}
                    for a in c.attributes
                ],
                "provenance": _prov_dict(c.provenance),
                "status": c.status.value,
            }
            for c in ordered.classes
        ],
        "enums": [
            {
                "name": e.name,
                "literals": list(e.literals),
                "provenance": _prov_dict(e.provenance),
                "status": e.status.value,
            }
            for e in ordered.enums
        ],
        "relationships": [
            {
                "kind": r.kind.value,
                "source": r.source,
                "target": r.target,
                "name": r.name,
                "source_mult": _mult_str(r.source_mult),
                "target_mult": _mult_str(r.target_mult),
                "provenance": _prov_dict(r.provenance),
                "status": r.status.value,
            }
            for r in ordered.relationships
        ],
    }


def export_canonical(model: DomainModel) -> str:
    """Serialize a well-formed model; byte-deterministic for equal models."""
    return json.dumps(model_to_dict(model), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _require(data: dict[str, Any], key: str, where: str) -> Any:
    if key not in data:
        raise SchemaError(f"missing field {key!r} in {where}")
    return data[key]


def _parse_prov(data: dict[str, Any] | None, where: str) -> ElementProvenance | None:
    if data is None:
        return None
    try:
        task = TaskKind(_require(data, "task", where))
    except ValueError as exc:
        raise SchemaError(f"unknown task in {where}: {exc}") from exc
    return ElementProvenance(
        task=task,
        run_id=data.get("run_id", ""),
        raw_line=data.get("raw_line", ""),
    )


def _parse_status(value: Any, where: str) -> ReviewStatus:
    try:
        return ReviewStatus(value)
    except ValueError as exc:
        raise SchemaError(f"unknown status in {where}: {value!r}") from exc


def _parse_mult(value: Any, where: str) -> Multiplicity | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise SchemaError(f"multiplicity in {where} must be a string")
    mult = parse_multiplicity(value)
    if mult is None:
        raise SchemaError(f"malformed multiplicity {value!r} in {where}")
    return mult


def import_canonical(text: str) -> DomainModel:
    """Parse and validate a canonical document; raises Format/Schema/ValidationError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("top level must be an object")

    model = DomainModel()
    for cdata in _require(data, "classes", "document"):
        name = _require(cdata, "name", "class")
        attrs = [
            AttributeDef(
                name=_require(adata, "name", f"attribute of {name}"),
                type_name=_require(adata, "type", f"attribute of {name}"),
                status=_parse_status(adata.get("status", "proposed"), f"attribute of {name}"),
            )
            for adata in cdata.get("attributes", [])
        ]
        model.classes.append(
            ClassDef(
                name=name,
                attributes=attrs,
                provenance=_parse_prov(cdata.get("provenance"), f"class {name}"),
                status=_parse_status(cdata.get("status", "proposed"), f"class {name}"),
            )
        )
    for edata in _require(data, "enums", "document"):
        name = _require(edata, "name", "enum")
        model.enums.append(
            EnumDef(
                name=name,
                literals=list(_require(edata, "literals", f"enum {name}")),
                provenance=_parse_prov(edata.get("provenance"), f"enum {name}"),
                status=_parse_status(edata.get("status", "proposed"), f"enum {name}"),
            )
        )
    for rdata in _require(data, "relationships", "document"):
        where = "relationship"
        try:
            kind = RelationshipKind(_require(rdata, "kind", where))
        except ValueError as exc:
            raise SchemaError(f"unknown relationship kind: {exc}") from exc
        model.relationships.append(
            RelationshipDef(
                kind=kind,
                source=_require(rdata, "source", where),
                target=_require(rdata, "target", where),
                name=rdata.get("name", ""),
                source_mult=_parse_mult(rdata.get("source_mult"), where),
                target_mult=_parse_mult(rdata.get("target_mult"), where),
                provenance=_parse_prov(rdata.get("provenance"), where),
                status=_parse_status(rdata.get("status", "proposed"), where),
            )
        )

    violations = validate_model(model)
    if violations:
        raise ValidationError(violations)
    return model


def filter_accepted(model: DomainModel) -> DomainModel:
    """The accepted-only view: keeps ACCEPTED elements and drops relationships
    whose end classes were not themselves accepted.

    An accepted attribute typed by a filtered-out enumeration falls back to
    String so the view stays well-formed.
    """
    classes = [
        ClassDef(
            name=c.name,
            attributes=[
                AttributeDef(a.name, a.type_name, a.status)
                for a in c.attributes
                if a.status is ReviewStatus.ACCEPTED
            ],
            provenance=c.provenance,
            status=c.status,
        )
        for c in model.classes
        if c.status is ReviewStatus.ACCEPTED
    ]
    enums = [e for e in model.enums if e.status is ReviewStatus.ACCEPTED]
    kept_classes = {c.name for c in classes}
    kept_types = set(DATA_TYPES) | {e.name for e in enums}
    for cls in classes:
        for attr in cls.attributes:
            if attr.type_name not in kept_types:
                attr.type_name = "String"
    relationships = [
        r
        for r in model.relationships
        if r.status is ReviewStatus.ACCEPTED
        and r.source in kept_classes
        and r.target in kept_classes
    ]
    return DomainModel(classes=classes, enums=enums, relationships=relationships)


def to_plantuml(model: DomainModel, accepted_only: bool = False) -> str:
    """Render the model as PlantUML class-diagram text."""
    view = canonical_order(filter_accepted(model) if accepted_only else model)
    lines = ["@startuml"]
    for cls in view.classes:
        if cls.attributes:
            lines.append(f"class {cls.name} {{")
            lines.extend(f"  {a.name}: {a.type_name}" for a in cls.attributes)
            lines.append("}")
        else:
            lines.append(f"class {cls.name}")
    for enum in view.enums:
        lines.append(f"enum {enum.name} {{")
        lines.extend(f"  {lit}" for lit in enum.literals)
        lines.append("}")
    for rel in view.relationships:
        if rel.kind is RelationshipKind.INHERITANCE:
            lines.append(f"{rel.target} <|-- {rel.source}")
        else:
            arrow = "o--" if rel.kind is RelationshipKind.AGGREGATION else "-->"
            lines.append(
                f'{rel.source} "{rel.source_mult}" {arrow} "{rel.target_mult}" {rel.target}'
            )
    lines.append("@enduml")
    return "\n".join(lines) + "\n"
