"""Score generated models against oracle models and drive experiment sweeps.

Matching rules, per category:

* classes (and enumerations): names pair when their character-unigram Dice
  similarity exceeds 0.9 or one name's camel-token multiset is contained in
  the other's; pairs are chosen greedily by descending similarity with a
  lexicographic tie-break. Token-containment pairs that fail the similarity
  threshold are flagged low-confidence for optional human audit.
* attributes: same name rules, but only inside paired owner classes.
* inheritances: pair when both the child pair and the parent pair hold.
* associations/aggregations: endpoint pairs may match straight or reversed
  (associations can be read in either direction); the two kinds are mutually
  matchable and multiplicities are ignored.

TP is the number of pairs, FP the unmatched generated elements, FN the
unmatched oracle elements; precision, recall, and F1 follow, with every
metric fixed at 0 when TP is 0.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .exporters import import_canonical
from .lineparse import ClassLine, EnumLine
from .llm import Provider
from .metamodel import DomainModel, RelationshipKind, TaskKind
from .pipeline import (
    PipelineConfig,
    run_class_generation,
    run_relationship_task,
)
from .refinery import assemble

CATEGORIES = ("class", "attribute", "inheritance", "association")

_SIMILARITY_THRESHOLD = 0.9

_CAMEL_TOKEN_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z0-9]*|[a-z0-9]+")


class EmptyInput(ValueError):
    """An aggregate over zero reports is undefined."""


def _normalize_chars(name: str) -> str:
    return "".join(ch for ch in name.lower() if ch.isalnum())


def name_similarity(a: str, b: str) -> float:
    """Dice coefficient over character-unigram multisets of the normalized names."""
    ca = Counter(_normalize_chars(a))
    cb = Counter(_normalize_chars(b))
    total = sum(ca.values()) + sum(cb.values())
    if total == 0:
        return 1.0
    if not ca or not cb:
        return 0.0
    overlap = sum((ca & cb).values())
    return 2.0 * overlap / total


def camel_tokens(name: str) -> list[str]:
    return [t.lower() for t in _CAMEL_TOKEN_RE.findall(name)]


def partial_name_match(a: str, b: str) -> bool:
    """True when one name's camel-token multiset is a non-empty subset of the other's."""
    ta = Counter(camel_tokens(a))
    tb = Counter(camel_tokens(b))
    if not ta or not tb:
        return False
    return (ta & tb) == ta or (ta & tb) == tb


def _names_pair(a: str, b: str) -> bool:
    return name_similarity(a, b) > _SIMILARITY_THRESHOLD or partial_name_match(a, b)


@dataclass
class CategoryMatch:
    pairs: list[tuple[str, str]] = field(default_factory=list)
    unmatched_generated: list[str] = field(default_factory=list)
    unmatched_oracle: list[str] = field(default_factory=list)


@dataclass
class MatchReport:
    classes: CategoryMatch = field(default_factory=CategoryMatch)
    attributes: CategoryMatch = field(default_factory=CategoryMatch)
    inheritances: CategoryMatch = field(default_factory=CategoryMatch)
    associations: CategoryMatch = field(default_factory=CategoryMatch)
    low_confidence: list[tuple[str, str]] = field(default_factory=list)

    def category(self, name: str) -> CategoryMatch:
        return {
            "class": self.classes,
            "attribute": self.attributes,
            "inheritance": self.inheritances,
            "association": self.associations,
        }[name]


def _greedy_name_matching(
    gen_names: list[str], oracle_names: list[str]
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Greedy pairing by descending similarity; returns (pairs, low-confidence pairs)."""
    candidates: list[tuple[float, str, str, bool]] = []
    for g in gen_names:
        for o in oracle_names:
            sim = name_similarity(g, o)
            if sim > _SIMILARITY_THRESHOLD:
                candidates.append((sim, g, o, False))
            elif partial_name_match(g, o):
                candidates.append((sim, g, o, True))
    candidates.sort(key=lambda item: (-item[0], item[1], item[2]))
    taken_gen: set[str] = set()
    taken_oracle: set[str] = set()
    pairs: list[tuple[str, str]] = []
    low_confidence: list[tuple[str, str]] = []
    for _, g, o, low in candidates:
        if g in taken_gen or o in taken_oracle:
            continue
        taken_gen.add(g)
        taken_oracle.add(o)
        pairs.append((g, o))
        if low:
            low_confidence.append((g, o))
    return pairs, low_confidence


def _category_items(model: DomainModel, include_enums: bool) -> list[str]:
    names = [c.name for c in model.classes]
    if include_enums:
        names += [e.name for e in model.enums]
    return names


def match_models(
    gen: DomainModel, oracle: DomainModel, include_enums: bool = True
) -> MatchReport:
    """Pair the elements of a generated model against an oracle model."""
    report = MatchReport()

    gen_classes = _category_items(gen, include_enums)
    oracle_classes = _category_items(oracle, include_enums)
    class_pairs, low_confidence = _greedy_name_matching(gen_classes, oracle_classes)
    gen_to_oracle = dict(class_pairs)
    report.classes.pairs = class_pairs
    report.low_confidence = low_confidence
    report.classes.unmatched_generated = [n for n in gen_classes if n not in gen_to_oracle]
    matched_oracle = {o for _, o in class_pairs}
    report.classes.unmatched_oracle = [n for n in oracle_classes if n not in matched_oracle]

    # Attributes pair only inside paired owner classes.
    oracle_attr_index = {c.name: [a.name for a in c.attributes] for c in oracle.classes}
    processed_oracle: set[str] = set()
    for cls in gen.classes:
        gen_attrs = [a.name for a in cls.attributes]
        partner = gen_to_oracle.get(cls.name)
        if partner is None or partner not in oracle_attr_index:
            report.attributes.unmatched_generated.extend(f"{cls.name}.{a}" for a in gen_attrs)
            continue
        processed_oracle.add(partner)
        attr_pairs, _ = _greedy_name_matching(gen_attrs, oracle_attr_index[partner])
        paired_gen = {g for g, _ in attr_pairs}
        paired_oracle = {o for _, o in attr_pairs}
        report.attributes.pairs.extend(
            (f"{cls.name}.{g}", f"{partner}.{o}") for g, o in attr_pairs
        )
        report.attributes.unmatched_generated.extend(
            f"{cls.name}.{a}" for a in gen_attrs if a not in paired_gen
        )
        report.attributes.unmatched_oracle.extend(
            f"{partner}.{a}" for a in oracle_attr_index[partner] if a not in paired_oracle
        )
    for cls in oracle.classes:
        if cls.name not in processed_oracle:
            report.attributes.unmatched_oracle.extend(
                f"{cls.name}.{a.name}" for a in cls.attributes
            )

    def rel_ref(model_rel) -> str:
        return f"{model_rel.kind.value}:{model_rel.source}->{model_rel.target}"

    gen_inherits = [r for r in gen.relationships if r.kind is RelationshipKind.INHERITANCE]
    oracle_inherits = [r for r in oracle.relationships if r.kind is RelationshipKind.INHERITANCE]
    taken: set[int] = set()
    for rel in gen_inherits:
        child = gen_to_oracle.get(rel.source)
        parent = gen_to_oracle.get(rel.target)
        match_index = None
        if child is not None and parent is not None:
            for idx, cand in enumerate(oracle_inherits):
                if idx not in taken and cand.source == child and cand.target == parent:
                    match_index = idx
                    break
        if match_index is None:
            report.inheritances.unmatched_generated.append(rel_ref(rel))
        else:
            taken.add(match_index)
            report.inheritances.pairs.append((rel_ref(rel), rel_ref(oracle_inherits[match_index])))
    report.inheritances.unmatched_oracle = [
        rel_ref(r) for idx, r in enumerate(oracle_inherits) if idx not in taken
    ]

    gen_assocs = [r for r in gen.relationships if r.kind is not RelationshipKind.INHERITANCE]
    oracle_assocs = [r for r in oracle.relationships if r.kind is not RelationshipKind.INHERITANCE]
    taken = set()
    for rel in gen_assocs:
        source = gen_to_oracle.get(rel.source)
        target = gen_to_oracle.get(rel.target)
        match_index = None
        if source is not None and target is not None:
            for idx, cand in enumerate(oracle_assocs):
                if idx in taken:
                    continue
                straight = cand.source == source and cand.target == target
                reversed_ = cand.source == target and cand.target == source
                if straight or reversed_:
                    match_index = idx
                    break
        if match_index is None:
            report.associations.unmatched_generated.append(rel_ref(rel))
        else:
            taken.add(match_index)
            report.associations.pairs.append((rel_ref(rel), rel_ref(oracle_assocs[match_index])))
    report.associations.unmatched_oracle = [
        rel_ref(r) for idx, r in enumerate(oracle_assocs) if idx not in taken
    ]
    return report


@dataclass
class CategoryMetrics:
    tp: float
    fp: float
    fn: float
    precision: float
    recall: float
    f1: float


@dataclass
class MetricsReport:
    categories: dict[str, CategoryMetrics]

    def to_dict(self) -> dict:
        return {
            name: {
                "tp": m.tp, "fp": m.fp, "fn": m.fn,
                "precision": m.precision, "recall": m.recall, "f1": m.f1,
            }
            for name, m in self.categories.items()
        }


def _metrics_from_counts(tp: float, fp: float, fn: float) -> CategoryMetrics:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    return CategoryMetrics(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def compute_metrics(report: MatchReport) -> MetricsReport:
    """Precision, recall, and F1 per category from a match report."""
    categories: dict[str, CategoryMetrics] = {}
    for name in CATEGORIES:
        cat = report.category(name)
        categories[name] = _metrics_from_counts(
            tp=float(len(cat.pairs)),
            fp=float(len(cat.unmatched_generated)),
            fn=float(len(cat.unmatched_oracle)),
        )
    return MetricsReport(categories)


def evaluate(gen: DomainModel, oracle: DomainModel, include_enums: bool = True) -> MetricsReport:
    return compute_metrics(match_models(gen, oracle, include_enums=include_enums))


def aggregate(reports: list[MetricsReport]) -> MetricsReport:
    """Field-wise arithmetic mean over run reports; counts averaged as reals."""
    if not reports:
        raise EmptyInput("cannot aggregate zero reports")
    count = float(len(reports))
    categories: dict[str, CategoryMetrics] = {}
    for name in CATEGORIES:
        categories[name] = CategoryMetrics(
            tp=sum(r.categories[name].tp for r in reports) / count,
            fp=sum(r.categories[name].fp for r in reports) / count,
            fn=sum(r.categories[name].fn for r in reports) / count,
            precision=sum(r.categories[name].precision for r in reports) / count,
            recall=sum(r.categories[name].recall for r in reports) / count,
            f1=sum(r.categories[name].f1 for r in reports) / count,
        )
    return MetricsReport(categories)


# --------------------------------------------------------------------------
# Datasets


@dataclass
class SystemCase:
    system_id: str
    description: str
    oracle: DomainModel


def load_dataset(dataset_dir: str | Path) -> list[SystemCase]:
    """One sub-directory per system, holding description.txt and oracle.model.json."""
    root = Path(dataset_dir)
    cases: list[SystemCase] = []
    for entry in sorted(root.iterdir()):
        desc = entry / "description.txt"
        oracle = entry / "oracle.model.json"
        if entry.is_dir() and desc.exists() and oracle.exists():
            cases.append(
                SystemCase(
                    system_id=entry.name,
                    description=desc.read_text(encoding="utf-8"),
                    oracle=import_canonical(oracle.read_text(encoding="utf-8")),
                )
            )
    if not cases:
        raise FileNotFoundError(f"no systems found under {root}")
    return cases


def write_manifest(dataset_dir: str | Path) -> Path:
    """Write manifest.json listing each system with description and model stats."""
    root = Path(dataset_dir)
    rows = []
    for case in load_dataset(root):
        text = case.description
        rows.append(
            {
                "id": case.system_id,
                "sentences": len([s for s in re.split(r"[.!?]+", text) if s.strip()]),
                "words": len(text.split()),
                "classes": len(case.oracle.classes) + len(case.oracle.enums),
                "attributes": sum(len(c.attributes) for c in case.oracle.classes),
                "relationships": len(case.oracle.relationships),
            }
        )
    path = root / "manifest.json"
    path.write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------------------
# Report tables


@dataclass
class EvalRow:
    label: str
    metrics: MetricsReport


def format_table(rows: list[EvalRow]) -> str:
    """Render rows in the standard report shape: P/R/F1 columns per category."""
    header = ["approach"]
    for metric in ("prec", "rec", "f1"):
        for category in CATEGORIES:
            header.append(f"{metric}:{category[:6]}")
    lines = ["\t".join(header)]
    for row in rows:
        cells = [row.label]
        for attr in ("precision", "recall", "f1"):
            for category in CATEGORIES:
                cells.append(f"{getattr(row.metrics.categories[category], attr):.3f}")
        lines.append("\t".join(cells))
    return "\n".join(lines)


def rows_to_dict(rows: list[EvalRow]) -> list[dict]:
    return [{"label": row.label, "metrics": row.metrics.to_dict()} for row in rows]


# --------------------------------------------------------------------------
# Temperature sweeps

SWEEP_TASKS = ("class", "assoc", "inherit")
DEFAULT_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))

_PRIMARY_CATEGORY = {"class": "class", "assoc": "association", "inherit": "inheritance"}


@dataclass
class SweepPoint:
    task: str
    temperature: float
    metrics: MetricsReport | None = None
    error: str | None = None


@dataclass
class SweepResult:
    points: list[SweepPoint]
    best: dict[str, float]

    def point(self, task: str, temperature: float) -> SweepPoint:
        for p in self.points:
            if p.task == task and p.temperature == temperature:
                return p
        raise KeyError((task, temperature))


def _oracle_class_elements(oracle: DomainModel) -> list:
    """Oracle classes and enums as parsed elements, so relationship sweeps
    assemble against the reference class names."""
    elements = [
        ClassLine(c.name, [(a.name, a.type_name) for a in c.attributes], raw_line=f"oracle:{c.name}")
        for c in oracle.classes
    ]
    elements += [
        EnumLine(e.name, list(e.literals), raw_line=f"oracle:{e.name}") for e in oracle.enums
    ]
    return elements


def _run_sweep_case(
    task: str,
    temperature: float,
    case: SystemCase,
    provider: Provider,
    config: PipelineConfig,
) -> MetricsReport:
    if task == "class":
        raw, elements, _, _ = run_class_generation(
            case.description, config.class_mode, temperature, provider, config
        )
        model, _ = assemble(elements, [], run_id=config.run_seed)
        return evaluate(model, case.oracle)

    # Relationship sweeps are fed the oracle class names so class generation
    # quality cannot influence the measurement.
    oracle_names = [c.name for c in case.oracle.classes]
    kind = TaskKind.ASSOC_AGG if task == "assoc" else TaskKind.INHERITANCE
    _, elements, _ = run_relationship_task(
        case.description, oracle_names, kind, temperature, provider, config
    )
    model, _ = assemble(_oracle_class_elements(case.oracle), elements, run_id=config.run_seed)
    return evaluate(model, case.oracle)


def sweep(
    cases: list[SystemCase],
    provider: Provider,
    grid: tuple[float, ...] = DEFAULT_GRID,
    runs_per_point: int = 1,
    tasks: tuple[str, ...] = SWEEP_TASKS,
    config: PipelineConfig | None = None,
) -> SweepResult:
    """Evaluate each sub-task across the temperature grid.

    Per-point failures are recorded without aborting the sweep. The best
    temperature per task maximizes the task's own category F1; ties resolve
    to the lowest temperature.
    """
    if not grid:
        raise ValueError("grid must be non-empty")
    if runs_per_point < 1:
        raise ValueError("runs_per_point must be >= 1")
    config = config or PipelineConfig()

    points: list[SweepPoint] = []
    for task in tasks:
        for temperature in grid:
            reports: list[MetricsReport] = []
            errors: list[str] = []
            for _ in range(runs_per_point):
                for case in cases:
                    try:
                        reports.append(
                            _run_sweep_case(task, temperature, case, provider, config)
                        )
                    except Exception as exc:  # noqa: BLE001 - isolate grid points
                        errors.append(f"{case.system_id}: {exc}")
            if reports:
                points.append(SweepPoint(task, temperature, metrics=aggregate(reports)))
            else:
                points.append(SweepPoint(task, temperature, error="; ".join(errors) or "no runs"))

    best: dict[str, float] = {}
    for task in tasks:
        scored = [
            (p.metrics.categories[_PRIMARY_CATEGORY[task]].f1, p.temperature)
            for p in points
            if p.task == task and p.metrics is not None
        ]
        if scored:
            top_f1 = max(f1 for f1, _ in scored)
            best[task] = min(t for f1, t in scored if f1 == top_f1)
    return SweepResult(points=points, best=best)
