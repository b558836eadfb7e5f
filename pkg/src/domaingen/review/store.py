"""Disk-backed project storage for the review service.

One directory per project holding project.json and model.json; every mutation
is an atomic write-rename, so a killed service never loses an acknowledged
write. Mutations within one project are serialized by a per-project lock.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from ..exporters import export_canonical, import_canonical
from ..metamodel import DomainModel


def element_id(kind: str, qualified_name: str) -> str:
    """Stable element id: digest of (kind, qualified name)."""
    digest = hashlib.sha256(f"{kind}:{qualified_name}".encode("utf-8")).hexdigest()
    return digest[:16]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


@dataclass
class Project:
    id: str
    name: str
    description: str
    version: int
    created: str
    updated: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "version": self.version,
            "created": self.created,
            "updated": self.updated,
        }


class ProjectStore:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, project_id: str) -> threading.RLock:
        with self._locks_guard:
            if project_id not in self._locks:
                self._locks[project_id] = threading.RLock()
            return self._locks[project_id]

    def _dir(self, project_id: str) -> Path:
        return self.root / project_id

    def create(self, name: str, description: str) -> Project:
        project = Project(
            id=uuid.uuid4().hex[:12],
            name=name,
            description=description,
            version=0,
            created=_now(),
            updated=_now(),
        )
        directory = self._dir(project.id)
        directory.mkdir(parents=True)
        (directory / "runs").mkdir()
        self._write_meta(project)
        return project

    def _write_meta(self, project: Project) -> None:
        _atomic_write(
            self._dir(project.id) / "project.json",
            json.dumps(project.to_dict(), indent=2, sort_keys=True) + "\n",
        )

    def get(self, project_id: str) -> Project | None:
        path = self._dir(project_id) / "project.json"
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return Project(**data)

    def list(self) -> list[Project]:
        projects = []
        for entry in sorted(self.root.iterdir()):
            if entry.is_dir() and (entry / "project.json").exists():
                project = self.get(entry.name)
                if project is not None:
                    projects.append(project)
        return projects

    def load_model(self, project_id: str) -> DomainModel | None:
        path = self._dir(project_id) / "model.json"
        if not path.exists():
            return None
        return import_canonical(path.read_text(encoding="utf-8"))

    def save_model(self, project: Project, model: DomainModel) -> Project:
        """Persist the model and bump the project version."""
        _atomic_write(self._dir(project.id) / "model.json", export_canonical(model))
        project.version += 1
        project.updated = _now()
        self._write_meta(project)
        return project

    def touch(self, project: Project) -> Project:
        project.version += 1
        project.updated = _now()
        self._write_meta(project)
        return project

    def next_run_dir(self, project_id: str, suffix: str = "") -> Path:
        runs = self._dir(project_id) / "runs"
        runs.mkdir(exist_ok=True)
        index = len(list(runs.iterdir()))
        name = f"run-{index:03d}{suffix}"
        return runs / name
