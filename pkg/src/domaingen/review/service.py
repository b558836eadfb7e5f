"""HTTP API backing the review workflow: generate, inspect, accept/reject,
regenerate sub-tasks, and export.

Optimistic concurrency: every response carries the project's model version in
the X-Model-Version header; a mutating request may send the version it saw and
gets 409 when it is stale.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Header, Query, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .. import evalharness
from ..exporters import (
    ValidationError,
    export_canonical,
    filter_accepted,
    import_canonical,
    model_to_dict,
    to_plantuml,
)
from ..lineparse import ClassLine, EnumLine
from ..llm import ExhaustedRetries, Provider, ProviderError, ReplayMiss
from ..metamodel import (
    DomainModel,
    RelationshipKind,
    ReviewStatus,
    TaskKind,
)
from ..pipeline import (
    PipelineConfig,
    RunArtifacts,
    config_from_dict,
    config_to_dict,
    run,
    run_relationship_task,
    write_run_artifacts,
)
from ..refinery import assemble
from .store import ProjectStore, element_id

VERSION_HEADER = "X-Model-Version"


def annotated_model(model: DomainModel) -> dict[str, Any]:
    """Canonical model dict with stable element ids injected for the UI."""
    doc = model_to_dict(model)
    for cls in doc["classes"]:
        cls["id"] = element_id("class", cls["name"])
        for attr in cls["attributes"]:
            attr["id"] = element_id("attribute", f"{cls['name']}.{attr['name']}")
    for enum in doc["enums"]:
        enum["id"] = element_id("enum", enum["name"])
    for rel in doc["relationships"]:
        rel["id"] = element_id(
            "relationship", f"{rel['kind']}:{rel['source']}:{rel['target']}"
        )
    return doc


def _apply_status(model: DomainModel, target_id: str, status: ReviewStatus) -> bool:
    """Set one element's status; rejecting a class cascades to its attributes
    and incident relationships. Returns False when the id is unknown."""
    for cls in model.classes:
        if element_id("class", cls.name) == target_id:
            cls.status = status
            if status is ReviewStatus.REJECTED:
                for attr in cls.attributes:
                    attr.status = ReviewStatus.REJECTED
                for rel in model.relationships:
                    if rel.source == cls.name or rel.target == cls.name:
                        rel.status = ReviewStatus.REJECTED
            return True
        for attr in cls.attributes:
            if element_id("attribute", f"{cls.name}.{attr.name}") == target_id:
                attr.status = status
                return True
    for enum in model.enums:
        if element_id("enum", enum.name) == target_id:
            enum.status = status
            return True
    for rel in model.relationships:
        rid = element_id("relationship", f"{rel.kind.value}:{rel.source}:{rel.target}")
        if rid == target_id:
            rel.status = status
            return True
    return False


def _creates_cycle(model: DomainModel, child: str, parent: str) -> bool:
    edges = {
        (r.source, r.target)
        for r in model.relationships
        if r.kind is RelationshipKind.INHERITANCE
    }
    edges.add((child, parent))
    parents: dict[str, set[str]] = {}
    for c, p in edges:
        parents.setdefault(c, set()).add(p)
    seen: set[str] = set()
    stack = [parent]
    while stack:
        node = stack.pop()
        if node == child:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(parents.get(node, ()))
    return False


def merge_regenerated(old: DomainModel, new: DomainModel, scope: str) -> DomainModel:
    """Merge a regeneration result into the reviewed model.

    ACCEPTED and REJECTED elements are preserved untouched; PROPOSED elements
    of the regenerated scope are replaced by the new proposal; duplicates
    collapse onto the existing element.
    """
    if scope == "classes":
        kept_classes = [c for c in old.classes if c.status is not ReviewStatus.PROPOSED]
        kept_enums = [e for e in old.enums if e.status is not ReviewStatus.PROPOSED]
        kept_rels = [r for r in old.relationships if r.status is not ReviewStatus.PROPOSED]
    elif scope == "assoc":
        kept_classes = list(old.classes)
        kept_enums = list(old.enums)
        kept_rels = [
            r for r in old.relationships
            if r.kind is RelationshipKind.INHERITANCE or r.status is not ReviewStatus.PROPOSED
        ]
    else:  # inherit
        kept_classes = list(old.classes)
        kept_enums = list(old.enums)
        kept_rels = [
            r for r in old.relationships
            if r.kind is not RelationshipKind.INHERITANCE or r.status is not ReviewStatus.PROPOSED
        ]

    merged = DomainModel(
        classes=kept_classes, enums=kept_enums, relationships=kept_rels
    )
    class_index = {c.name: c for c in merged.classes}
    enum_index = {e.name: e for e in merged.enums}

    for cls in new.classes:
        if cls.name in class_index:
            existing = class_index[cls.name]
            have = {a.name for a in existing.attributes}
            for attr in cls.attributes:
                if attr.name not in have:
                    existing.attributes.append(attr)
                    have.add(attr.name)
        elif cls.name not in enum_index:
            class_index[cls.name] = cls
            merged.classes.append(cls)
    for enum in new.enums:
        if enum.name in enum_index or enum.name in class_index:
            continue
        enum_index[enum.name] = enum
        merged.enums.append(enum)

    known = set(class_index)
    have_rels = {(r.kind, r.source, r.target) for r in merged.relationships}
    for rel in new.relationships:
        key = (rel.kind, rel.source, rel.target)
        if key in have_rels or rel.source not in known or rel.target not in known:
            continue
        if rel.kind is RelationshipKind.INHERITANCE and _creates_cycle(
            merged, rel.source, rel.target
        ):
            continue
        have_rels.add(key)
        merged.relationships.append(rel)
    return merged


def create_app(
    data_dir: str | Path,
    provider: Provider | None = None,
    base_config: PipelineConfig | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    store = ProjectStore(data_dir)
    base = base_config or PipelineConfig()
    app = FastAPI(title="domaingen review service")

    def _error(status_code: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status_code, content={"error": message})

    def _model_response(project, model: DomainModel, status_code: int = 200) -> JSONResponse:
        return JSONResponse(
            status_code=status_code,
            content={"version": project.version, "model": annotated_model(model)},
            headers={VERSION_HEADER: str(project.version)},
        )

    def _stale(project, header_value: str | None) -> bool:
        return header_value is not None and header_value != str(project.version)

    @app.get("/health")
    def health() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.get("/projects")
    def list_projects() -> list[dict]:
        return [p.to_dict() for p in store.list()]

    @app.post("/projects", status_code=201)
    def create_project(body: dict) -> Any:
        name = (body or {}).get("name", "").strip()
        description = (body or {}).get("description", "")
        if not name:
            return _error(422, "project name is required")
        project = store.create(name, description)
        return project.to_dict()

    @app.get("/projects/{project_id}")
    def get_project(project_id: str) -> Any:
        project = store.get(project_id)
        if project is None:
            return _error(404, "unknown project")
        return project.to_dict()

    @app.post("/projects/{project_id}/generate")
    def generate(
        project_id: str,
        body: dict | None = None,
        x_model_version: str | None = Header(default=None, alias=VERSION_HEADER),
    ) -> Any:
        project = store.get(project_id)
        if project is None:
            return _error(404, "unknown project")
        with store.lock(project_id):
            project = store.get(project_id)
            if _stale(project, x_model_version):
                return _error(409, "stale model version")
            overrides = dict(config_to_dict(base))
            overrides.update((body or {}).get("config", {}))
            try:
                config = config_from_dict(overrides)
            except ValueError as exc:
                return _error(422, f"bad configuration: {exc}")
            if provider is None:
                return _error(502, "no completion provider configured")
            try:
                artifacts = run(project.description, config, provider)
            except (ExhaustedRetries, ProviderError, ReplayMiss) as exc:
                partial: RunArtifacts | None = getattr(exc, "artifacts", None)
                if partial is not None:
                    write_run_artifacts(partial, store.next_run_dir(project_id, "-failed"))
                return _error(502, f"generation failed: {exc}")
            write_run_artifacts(artifacts, store.next_run_dir(project_id))
            project = store.save_model(project, artifacts.model)
            return _model_response(project, artifacts.model)

    @app.get("/projects/{project_id}/model")
    def get_model(project_id: str) -> Any:
        project = store.get(project_id)
        if project is None:
            return _error(404, "unknown project")
        model = store.load_model(project_id)
        if model is None:
            return _error(404, "no model generated yet")
        return _model_response(project, model)

    @app.patch("/projects/{project_id}/elements/{target_id}")
    def patch_element(
        project_id: str,
        target_id: str,
        body: dict,
        x_model_version: str | None = Header(default=None, alias=VERSION_HEADER),
    ) -> Any:
        project = store.get(project_id)
        if project is None:
            return _error(404, "unknown project")
        raw_status = (body or {}).get("status", "")
        if raw_status not in ("accepted", "rejected"):
            return _error(422, f"invalid status {raw_status!r}")
        with store.lock(project_id):
            project = store.get(project_id)
            if _stale(project, x_model_version):
                return _error(409, "stale model version")
            model = store.load_model(project_id)
            if model is None:
                return _error(404, "no model generated yet")
            if not _apply_status(model, target_id, ReviewStatus(raw_status)):
                return _error(404, "unknown element id")
            project = store.save_model(project, model)
            return _model_response(project, model)

    @app.post("/projects/{project_id}/regenerate")
    def regenerate(
        project_id: str,
        body: dict,
        x_model_version: str | None = Header(default=None, alias=VERSION_HEADER),
    ) -> Any:
        task = (body or {}).get("task", "")
        if task not in ("classes", "assoc", "inherit"):
            return _error(422, f"unknown task {task!r}")
        project = store.get(project_id)
        if project is None:
            return _error(404, "unknown project")
        with store.lock(project_id):
            project = store.get(project_id)
            if _stale(project, x_model_version):
                return _error(409, "stale model version")
            model = store.load_model(project_id) or DomainModel()
            overrides = dict(config_to_dict(base))
            overrides.update((body or {}).get("config", {}))
            config = config_from_dict(overrides)
            if provider is None:
                return _error(502, "no completion provider configured")
            try:
                if task == "classes":
                    artifacts = run(project.description, config, provider)
                    new_model = artifacts.model
                    write_run_artifacts(artifacts, store.next_run_dir(project_id))
                else:
                    # Relationship regeneration reuses the reviewed class names
                    # that are still on the table (accepted or proposed).
                    names = [
                        c.name for c in model.classes
                        if c.status is not ReviewStatus.REJECTED
                    ] + [
                        e.name for e in model.enums
                        if e.status is not ReviewStatus.REJECTED
                    ]
                    kind = TaskKind.ASSOC_AGG if task == "assoc" else TaskKind.INHERITANCE
                    temp = config.temp_assoc if task == "assoc" else config.temp_inherit
                    _, elements, _ = run_relationship_task(
                        project.description, names, kind, temp, provider, config
                    )
                    scaffold: list = [
                        ClassLine(c.name, [], raw_line=f"existing:{c.name}")
                        for c in model.classes
                        if c.status is not ReviewStatus.REJECTED
                    ]
                    scaffold += [
                        EnumLine(e.name, list(e.literals), raw_line=f"existing:{e.name}")
                        for e in model.enums
                        if e.status is not ReviewStatus.REJECTED
                    ]
                    new_model, _report = assemble(scaffold, elements)
                    # Only relationships and rule-appended parents are new here;
                    # strip the scaffold elements that merely mirrored existing ones.
                    existing = {c.name for c in model.classes}
                    new_model.classes = [
                        c for c in new_model.classes
                        if c.name not in existing or c.attributes
                    ]
                    existing_enums = {e.name for e in model.enums}
                    new_model.enums = [
                        e for e in new_model.enums if e.name not in existing_enums
                    ]
            except (ExhaustedRetries, ProviderError, ReplayMiss) as exc:
                partial = getattr(exc, "artifacts", None)
                if partial is not None:
                    write_run_artifacts(partial, store.next_run_dir(project_id, "-failed"))
                return _error(502, f"regeneration failed: {exc}")
            merged = merge_regenerated(model, new_model, task)
            project = store.save_model(project, merged)
            return _model_response(project, merged)

    @app.get("/projects/{project_id}/export")
    def export(
        project_id: str,
        format: str = Query(default="canonical"),
        accepted_only: bool = Query(default=False),
    ) -> Any:
        project = store.get(project_id)
        if project is None:
            return _error(404, "unknown project")
        model = store.load_model(project_id)
        if model is None:
            return _error(404, "no model generated yet")
        if format == "canonical":
            view = filter_accepted(model) if accepted_only else model
            return Response(
                content=export_canonical(view),
                media_type="application/json",
                headers={VERSION_HEADER: str(project.version)},
            )
        if format == "plantuml":
            return Response(
                content=to_plantuml(model, accepted_only=accepted_only),
                media_type="text/plain",
                headers={VERSION_HEADER: str(project.version)},
            )
        return _error(422, f"unknown export format {format!r}")

    @app.post("/projects/{project_id}/evaluate")
    def evaluate_against_oracle(project_id: str, body: dict) -> Any:
        """Score the current model against a caller-supplied oracle document."""
        project = store.get(project_id)
        if project is None:
            return _error(404, "unknown project")
        model = store.load_model(project_id)
        if model is None:
            return _error(404, "no model generated yet")
        raw_oracle = (body or {}).get("oracle", "")
        if isinstance(raw_oracle, dict):
            raw_oracle = json.dumps(raw_oracle)
        try:
            oracle = import_canonical(raw_oracle)
        except (ValueError, ValidationError) as exc:
            return _error(422, f"bad oracle document: {exc}")
        match = evalharness.match_models(model, oracle)
        metrics = evalharness.compute_metrics(match)
        return {
            "metrics": metrics.to_dict(),
            "low_confidence": [
                {"generated": g, "oracle": o} for g, o in match.low_confidence
            ],
        }

    if ui_dir is not None and Path(ui_dir).exists():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
