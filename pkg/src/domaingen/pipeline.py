"""Orchestration of the generation workflow and its experiment modes.

Decomposed mode runs four steps: (1) class generation, two-turn or single-turn;
(2) regex extraction of the generated class names; (3) relationship generation,
either split into independent association/aggregation and inheritance tasks or
as one combined prompt; (4) assembly into a well-formed model. Baseline mode
issues one whole-model prompt and feeds the parsed output through the same
assembly so both modes are normalized identically.

Each sub-task carries its own temperature; the defaults are the task-specific
settings that performed best in calibration (0.4 classes, 0.9 associations,
0.8 inheritances).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from . import lineparse
from .exporters import export_canonical
from .lineparse import AssocLine, ClassLine, EmptyOutput, EnumLine, InheritLine, ParsedElement
from .llm import (
    CompletionParams,
    ExhaustedRetries,
    Provider,
    TranscriptRecord,
    assistant,
    complete_with_reparse,
)
from .metamodel import DomainModel, TaskKind
from .prompts import PromptInputs, render
from .refinery import FixReport, assemble


class ClassMode(str, Enum):
    TWO_TURN = "two_turn"
    SINGLE_TURN = "single_turn"


class RelMode(str, Enum):
    SPLIT = "split"
    COMBINED = "combined"


class OverallMode(str, Enum):
    DECOMPOSED = "decomposed"
    BASELINE_ZERO_SHOT = "baseline"


@dataclass
class PipelineConfig:
    temp_class: float = 0.4
    temp_assoc: float = 0.9
    temp_inherit: float = 0.8
    class_mode: ClassMode = ClassMode.TWO_TURN
    rel_mode: RelMode = RelMode.SPLIT
    overall_mode: OverallMode = OverallMode.DECOMPOSED
    max_attempts: int = 3
    model_name: str = "gpt-3.5-turbo"
    run_seed: str = ""

    def __post_init__(self) -> None:
        for label, temp in (
            ("class", self.temp_class),
            ("assoc", self.temp_assoc),
            ("inherit", self.temp_inherit),
        ):
            if not 0.0 <= temp <= 2.0:
                raise ValueError(f"{label} temperature {temp} outside [0.0, 2.0]")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass
class RunArtifacts:
    model: DomainModel
    fix_report: FixReport
    transcripts: list[TranscriptRecord]
    intermediate: dict[str, str]
    config: PipelineConfig


def _params(config: PipelineConfig, temperature: float) -> CompletionParams:
    return CompletionParams(temperature=temperature, model_name=config.model_name)


def _tag(elements: list[ParsedElement], task: TaskKind) -> list[ParsedElement]:
    for element in elements:
        element.task = task
    return elements


def _parse_class_output(text: str) -> list[ParsedElement]:
    elements, _ = lineparse.parse_class_block(text)
    if not elements:
        raise EmptyOutput("no classes or enumerations parsed")
    return elements


def _parse_assoc_output(text: str) -> list[ParsedElement]:
    elements, _ = lineparse.parse_assoc_lines(text)
    if not elements:
        raise EmptyOutput("no associations or aggregations parsed")
    return elements


def _parse_inherit_output(text: str) -> list[ParsedElement]:
    elements, _ = lineparse.parse_inherit_lines(text)
    if not elements:
        raise EmptyOutput("no parent-child relationships parsed")
    return elements


def _parse_combined_output(text: str) -> list[ParsedElement]:
    elements, _ = lineparse.parse_relationship_lines(text)
    if not elements:
        raise EmptyOutput("no relationships parsed")
    return elements


def _parse_baseline_output(text: str) -> list[ParsedElement]:
    elements, _ = lineparse.parse_model_lines(text)
    if not elements:
        raise EmptyOutput("no model elements parsed")
    return elements


def run_class_generation(
    description: str,
    mode: ClassMode,
    temperature: float,
    provider: Provider,
    config: PipelineConfig,
) -> tuple[str, list[ParsedElement], list[TranscriptRecord], dict[str, str]]:
    """Step 1. Returns (raw formatted output, parsed elements, transcripts, step texts)."""
    transcripts: list[TranscriptRecord] = []
    intermediate: dict[str, str] = {}
    params = _params(config, temperature)

    if mode is ClassMode.TWO_TURN:
        turn1 = render(TaskKind.CLASS_TURN1, PromptInputs.build(description))
        first = complete_with_reparse(
            provider, turn1, params, parse=lambda t: t,
            max_attempts=1, task=TaskKind.CLASS_TURN1.value,
        )
        transcripts.extend(first.records)
        intermediate["class_turn1"] = first.response

        prior = list(turn1) + [assistant(first.response or "(no answer)")]
        turn2 = render(
            TaskKind.CLASS_TURN2,
            PromptInputs.build(description, prior_messages=prior),
        )
        second = complete_with_reparse(
            provider, turn2, params, parse=_parse_class_output,
            max_attempts=config.max_attempts, task=TaskKind.CLASS_TURN2.value,
        )
        transcripts.extend(second.records)
        intermediate["class_turn2"] = second.response
        return second.response, _tag(second.value, TaskKind.CLASS_TURN2), transcripts, intermediate

    messages = render(TaskKind.CLASS_SINGLE_TURN, PromptInputs.build(description))
    result = complete_with_reparse(
        provider, messages, params, parse=_parse_class_output,
        max_attempts=config.max_attempts, task=TaskKind.CLASS_SINGLE_TURN.value,
    )
    transcripts.extend(result.records)
    intermediate["class_single_turn"] = result.response
    return result.response, _tag(result.value, TaskKind.CLASS_SINGLE_TURN), transcripts, intermediate


def run_relationship_task(
    description: str,
    class_names: list[str],
    task: TaskKind,
    temperature: float,
    provider: Provider,
    config: PipelineConfig,
) -> tuple[str, list[ParsedElement], list[TranscriptRecord]]:
    """One relationship sub-task (ASSOC_AGG, INHERITANCE, or REL_COMBINED)."""
    parser = {
        TaskKind.ASSOC_AGG: _parse_assoc_output,
        TaskKind.INHERITANCE: _parse_inherit_output,
        TaskKind.REL_COMBINED: _parse_combined_output,
    }[task]
    messages = render(task, PromptInputs.build(description, class_names=class_names))
    result = complete_with_reparse(
        provider, messages, _params(config, temperature), parse=parser,
        max_attempts=config.max_attempts, task=task.value,
    )
    return result.response, _tag(result.value, task), result.records


def run(description: str, config: PipelineConfig, provider: Provider) -> RunArtifacts:
    """Execute a full generation run; deterministic under a replay provider.

    On ExhaustedRetries the partial artifacts gathered so far are attached to
    the exception as ``exc.artifacts`` before it propagates.
    """
    if not description.strip():
        raise ValueError("description must be non-empty")

    transcripts: list[TranscriptRecord] = []
    intermediate: dict[str, str] = {}
    try:
        if config.overall_mode is OverallMode.BASELINE_ZERO_SHOT:
            messages = render(
                TaskKind.BASELINE_ZERO_SHOT, PromptInputs.build(description)
            )
            result = complete_with_reparse(
                provider, messages, _params(config, config.temp_class),
                parse=_parse_baseline_output, max_attempts=config.max_attempts,
                task=TaskKind.BASELINE_ZERO_SHOT.value,
            )
            transcripts.extend(result.records)
            intermediate["baseline"] = result.response
            elements = _tag(result.value, TaskKind.BASELINE_ZERO_SHOT)
            class_elements = [e for e in elements if isinstance(e, (ClassLine, EnumLine))]
            rel_elements = [e for e in elements if isinstance(e, (AssocLine, InheritLine))]
        else:
            class_raw, class_elements, class_records, class_steps = run_class_generation(
                description, config.class_mode, config.temp_class, provider, config
            )
            transcripts.extend(class_records)
            intermediate.update(class_steps)

            names = lineparse.extract_class_names(class_raw)

            rel_elements = []
            if config.rel_mode is RelMode.SPLIT:
                assoc_raw, assoc_elements, assoc_records = run_relationship_task(
                    description, names, TaskKind.ASSOC_AGG, config.temp_assoc,
                    provider, config,
                )
                transcripts.extend(assoc_records)
                intermediate["assoc"] = assoc_raw
                inherit_raw, inherit_elements, inherit_records = run_relationship_task(
                    description, names, TaskKind.INHERITANCE, config.temp_inherit,
                    provider, config,
                )
                transcripts.extend(inherit_records)
                intermediate["inherit"] = inherit_raw
                # Fixed merge order: associations before inheritances.
                rel_elements = assoc_elements + inherit_elements
            else:
                combined_raw, rel_elements, combined_records = run_relationship_task(
                    description, names, TaskKind.REL_COMBINED, config.temp_assoc,
                    provider, config,
                )
                transcripts.extend(combined_records)
                intermediate["rel_combined"] = combined_raw
    except ExhaustedRetries as exc:
        transcripts.extend(exc.records)
        exc.artifacts = RunArtifacts(  # type: ignore[attr-defined]
            model=DomainModel(),
            fix_report=FixReport(),
            transcripts=transcripts,
            intermediate=intermediate,
            config=config,
        )
        raise

    model, fix_report = assemble(class_elements, rel_elements, run_id=config.run_seed)
    return RunArtifacts(
        model=model,
        fix_report=fix_report,
        transcripts=transcripts,
        intermediate=intermediate,
        config=config,
    )


def config_to_dict(config: PipelineConfig) -> dict:
    return {
        "temp_class": config.temp_class,
        "temp_assoc": config.temp_assoc,
        "temp_inherit": config.temp_inherit,
        "class_mode": config.class_mode.value,
        "rel_mode": config.rel_mode.value,
        "overall_mode": config.overall_mode.value,
        "max_attempts": config.max_attempts,
        "model_name": config.model_name,
        "run_seed": config.run_seed,
    }


def config_from_dict(data: dict) -> PipelineConfig:
    return PipelineConfig(
        temp_class=data.get("temp_class", 0.4),
        temp_assoc=data.get("temp_assoc", 0.9),
        temp_inherit=data.get("temp_inherit", 0.8),
        class_mode=ClassMode(data.get("class_mode", "two_turn")),
        rel_mode=RelMode(data.get("rel_mode", "split")),
        overall_mode=OverallMode(data.get("overall_mode", "decomposed")),
        max_attempts=data.get("max_attempts", 3),
        model_name=data.get("model_name", "gpt-3.5-turbo"),
        run_seed=data.get("run_seed", ""),
    )


def write_run_artifacts(artifacts: RunArtifacts, out_dir: str | Path) -> Path:
    """Persist one run: canonical model, fix report, transcripts, config, raw texts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(export_canonical(artifacts.model), encoding="utf-8")
    fix_doc = {
        "applied": [
            {"rule": e.rule, "element": e.element, "before": e.before, "after": e.after}
            for e in artifacts.fix_report.applied
        ],
        "notes": list(artifacts.fix_report.notes),
    }
    (out / "fix_report.json").write_text(
        json.dumps(fix_doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    with (out / "transcripts.ndjson").open("w", encoding="utf-8") as handle:
        for record in artifacts.transcripts:
            handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
    (out / "config.json").write_text(
        json.dumps(config_to_dict(artifacts.config), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    (out / "intermediate.json").write_text(
        json.dumps(artifacts.intermediate, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return out
