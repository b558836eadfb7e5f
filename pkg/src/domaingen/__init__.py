"""LLM-assisted object-oriented domain modeling.

Generation is decomposed into focused sub-tasks (classes, associations and
aggregations, parent-child relationships), each with its own prompt and
temperature; the formatted answers are parsed, validated, repaired, and
assembled into a well-formed domain model a human can review element by
element. The evaluation harness scores generated models against hand-built
oracle models with precision/recall/F1 per element category.
"""

from .metamodel import (
    AttributeDef,
    ClassDef,
    DomainModel,
    EnumDef,
    Multiplicity,
    RelationshipDef,
    RelationshipKind,
    ReviewStatus,
    TaskKind,
    validate_model,
)
from .pipeline import ClassMode, OverallMode, PipelineConfig, RelMode, run

__all__ = [
    "AttributeDef",
    "ClassDef",
    "ClassMode",
    "DomainModel",
    "EnumDef",
    "Multiplicity",
    "OverallMode",
    "PipelineConfig",
    "RelMode",
    "RelationshipDef",
    "RelationshipKind",
    "ReviewStatus",
    "TaskKind",
    "run",
    "validate_model",
]
