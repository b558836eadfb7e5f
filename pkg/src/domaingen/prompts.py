"""Prompt templates for every generation task and their slot filling.

Templates live as plain text assets next to this module ({{description}},
{{classes}}, {{knowledge}} slots) so wording can be tuned without touching
code. Rendering is pure: the same inputs always produce the same messages.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .llm import ChatMessage, user
from .metamodel import TaskKind

_TEMPLATE_DIR = Path(__file__).parent / "templates"

_TEMPLATE_FILES = {
    TaskKind.CLASS_TURN1: "class_turn1.txt",
    TaskKind.CLASS_TURN2: "class_turn2.txt",
    TaskKind.CLASS_SINGLE_TURN: "class_single_turn.txt",
    TaskKind.ASSOC_AGG: "assoc_agg.txt",
    TaskKind.INHERITANCE: "inheritance.txt",
    TaskKind.REL_COMBINED: "rel_combined.txt",
    TaskKind.BASELINE_ZERO_SHOT: "baseline_zero_shot.txt",
}

_KNOWLEDGE_FILES = {
    TaskKind.CLASS_TURN1: "knowledge_class.txt",
    TaskKind.INHERITANCE: "knowledge_inheritance.txt",
    # The merged variants reuse the corresponding split-task blocks.
    TaskKind.CLASS_SINGLE_TURN: "knowledge_class.txt",
    TaskKind.REL_COMBINED: "knowledge_inheritance.txt",
}

_CLASSES_REQUIRED = frozenset(
    {TaskKind.ASSOC_AGG, TaskKind.INHERITANCE, TaskKind.REL_COMBINED}
)


class MissingInput(ValueError):
    """A slot required by the task was not provided."""


class NoKnowledge(LookupError):
    """The task carries no injected modeling-knowledge block."""


@dataclass(frozen=True)
class PromptInputs:
    system_description: str
    class_names: tuple[str, ...] = ()
    prior_messages: tuple[ChatMessage, ...] = ()

    @classmethod
    def build(
        cls,
        system_description: str,
        class_names: list[str] | tuple[str, ...] = (),
        prior_messages: list[ChatMessage] | tuple[ChatMessage, ...] = (),
    ) -> "PromptInputs":
        return cls(system_description, tuple(class_names), tuple(prior_messages))


@lru_cache(maxsize=None)
def _load(filename: str) -> str:
    return (_TEMPLATE_DIR / filename).read_text(encoding="utf-8").strip()


def knowledge_block(task: TaskKind) -> str:
    """The modeling-knowledge text injected into a task's template."""
    if task not in (TaskKind.CLASS_TURN1, TaskKind.INHERITANCE):
        raise NoKnowledge(f"task {task.value} carries no knowledge block")
    return _load(_KNOWLEDGE_FILES[task])


def _fill(template: str, description: str, class_names: tuple[str, ...], task: TaskKind) -> str:
    text = template
    if "{{knowledge}}" in text:
        text = text.replace("{{knowledge}}", _load(_KNOWLEDGE_FILES[task]))
    text = text.replace("{{classes}}", ", ".join(class_names))
    return text.replace("{{description}}", description)


def render(task: TaskKind, inputs: PromptInputs) -> list[ChatMessage]:
    """Build the message list to send for a task.

    Every task renders a single user message except CLASS_TURN2, which appends
    its reformatting request to the caller-supplied first-turn history.
    """
    if not inputs.system_description.strip() and task is not TaskKind.CLASS_TURN2:
        raise MissingInput("system description is required")
    if task in _CLASSES_REQUIRED and not inputs.class_names:
        raise MissingInput(f"class names are required for {task.value}")

    template = _load(_TEMPLATE_FILES[task])
    if task is TaskKind.CLASS_TURN2:
        if not inputs.prior_messages:
            raise MissingInput("prior messages are required for the second class turn")
        return list(inputs.prior_messages) + [user(template)]
    return [user(_fill(template, inputs.system_description, inputs.class_names, task))]
