"""Shared test factories: random well-formed models, fuzzed parsed elements,
and the MiniLibrary replay fixture."""

from __future__ import annotations

import random

from domaingen.lineparse import AssocLine, ClassLine, EnumLine, InheritLine, extract_class_names
from domaingen.llm import (
    CompletionParams,
    TranscriptRecord,
    TranscriptStore,
    assistant,
    transcript_key,
)
from domaingen.metamodel import (
    DATA_TYPES,
    AttributeDef,
    ClassDef,
    DomainModel,
    EnumDef,
    Multiplicity,
    RelationshipDef,
    RelationshipKind,
    TaskKind,
    validate_model,
)
from domaingen.pipeline import PipelineConfig
from domaingen.prompts import PromptInputs, render

SYLLABLES = [
    "bo", "ra", "mi", "tu", "ka", "len", "dor", "sa", "vel", "nor",
    "pi", "gu", "zen", "fa", "lo", "chi", "mar", "tek", "ul", "wes",
]

MULTS = [
    Multiplicity(1, 1),
    Multiplicity(0, 1),
    Multiplicity(1, None),
    Multiplicity(0, None),
    Multiplicity(2, 5),
]


def random_word(rng: random.Random, n_min: int = 2, n_max: int = 3) -> str:
    return "".join(rng.choice(SYLLABLES) for _ in range(rng.randint(n_min, n_max)))


def random_upper_name(rng: random.Random, taken: set[str]) -> str:
    while True:
        name = random_word(rng).capitalize()
        if name not in taken:
            taken.add(name)
            return name


def random_model(
    rng: random.Random,
    max_classes: int = 6,
    max_attrs: int = 4,
    max_rels: int = 6,
    ensure_all_categories: bool = False,
) -> DomainModel:
    """A random well-formed model; asserts its own validity."""
    taken: set[str] = set()
    n_classes = rng.randint(2 if ensure_all_categories else 1, max_classes)
    n_enums = rng.randint(1 if ensure_all_categories else 0, 2)
    enums = [
        EnumDef(
            random_upper_name(rng, taken),
            sorted({random_word(rng) for _ in range(rng.randint(1, 3))}),
        )
        for _ in range(n_enums)
    ]
    type_pool = list(DATA_TYPES) + [e.name for e in enums]
    classes = []
    for _ in range(n_classes):
        attr_names = sorted({random_word(rng) for _ in range(rng.randint(0, max_attrs))})
        classes.append(
            ClassDef(
                random_upper_name(rng, taken),
                [AttributeDef(a, rng.choice(type_pool)) for a in attr_names],
            )
        )
    if ensure_all_categories and all(not c.attributes for c in classes):
        classes[0].attributes.append(AttributeDef(random_word(rng), rng.choice(type_pool)))

    relationships: list[RelationshipDef] = []
    seen: set[tuple[RelationshipKind, str, str]] = set()
    n_rels = rng.randint(1 if ensure_all_categories else 0, max_rels)
    for _ in range(n_rels):
        kind = rng.choice([RelationshipKind.ASSOCIATION, RelationshipKind.AGGREGATION])
        source = rng.choice(classes).name
        target = rng.choice(classes).name
        if (kind, source, target) in seen:
            continue
        seen.add((kind, source, target))
        relationships.append(
            RelationshipDef(
                kind=kind,
                source=source,
                target=target,
                name=_join_lower(source, target),
                source_mult=rng.choice(MULTS),
                target_mult=rng.choice(MULTS),
            )
        )
    # Inheritance edges only from a later class to an earlier one: acyclic by
    # construction.
    n_inherits = rng.randint(1 if ensure_all_categories and len(classes) >= 2 else 0,
                             max(0, len(classes) - 1))
    for _ in range(n_inherits):
        child_idx = rng.randint(1, len(classes) - 1) if len(classes) > 1 else 0
        parent_idx = rng.randint(0, child_idx - 1) if child_idx > 0 else 0
        child, parent = classes[child_idx].name, classes[parent_idx].name
        if child == parent or (RelationshipKind.INHERITANCE, child, parent) in seen:
            continue
        seen.add((RelationshipKind.INHERITANCE, child, parent))
        relationships.append(
            RelationshipDef(
                kind=RelationshipKind.INHERITANCE,
                source=child,
                target=parent,
                name=_join_lower(child, parent),
            )
        )
    model = DomainModel(classes=classes, enums=enums, relationships=relationships)
    assert validate_model(model) == [], validate_model(model)
    return model


def _join_lower(a: str, b: str) -> str:
    from domaingen.metamodel import to_lower_camel

    return to_lower_camel(a + b)


_MESSY_NAMES = ["bus driver", "Pick Up time", "BTMS", "lab_requisition form", "x", "Order"]
_MESSY_TYPES = [None, "String", "int", "text", "Hotel", "RoomType", "whatever", ""]


def random_parsed_elements(
    rng: random.Random,
) -> tuple[list, list]:
    """Fuzzed (classes_block, rels) input for assemble: valid lines mixed with
    unknown ends, missing types, bad multiplicities, duplicate and cyclic edges."""
    names = [rng.choice(_MESSY_NAMES) for _ in range(rng.randint(1, 5))]
    classes_block: list = []
    for name in names:
        attrs = []
        for _ in range(rng.randint(0, 3)):
            attrs.append((rng.choice(_MESSY_NAMES), rng.choice(_MESSY_TYPES)))
        classes_block.append(ClassLine(name, attrs, raw_line=f"class {name}"))
    if rng.random() < 0.5:
        classes_block.append(
            EnumLine("room type", rng.sample(["single", "double", "SUITE", "double"], k=rng.randint(0, 3)),
                     raw_line="enum room type")
        )

    end_pool = ["BusDriver", "PickUpTime", "Btms", "Ghost", "String", "Date", "RoomType", "Order", "X"]
    rels: list = []
    for _ in range(rng.randint(0, 6)):
        if rng.random() < 0.5:
            rels.append(
                AssocLine(
                    rng.choice(end_pool),
                    rng.choice(MULTS + [None, Multiplicity(5, 2), Multiplicity(0, 0)]),
                    rng.choice(end_pool),
                    rng.choice(MULTS + [None]),
                    rng.choice([RelationshipKind.ASSOCIATION, RelationshipKind.AGGREGATION]),
                    raw_line="assoc line",
                )
            )
        else:
            rels.append(
                InheritLine(rng.choice(end_pool), rng.choice(end_pool), raw_line="inherit line")
            )
    return classes_block, rels


# ---------------------------------------------------------------------------
# MiniLibrary: a hand-written deterministic replay fixture.

MINILIBRARY_DESCRIPTION = (
    "A small public library lends books to registered members. Each member has "
    "a name and an email address, and holds a membership level that is either "
    "basic or premium. A librarian is a special kind of member of staff who "
    "manages the catalogue. Each book has a title, an author and an isbn."
)

MINILIBRARY_TURN1_RESPONSE = (
    "The description mentions books, members with contact details, librarians, "
    "and a membership level with two values."
)

MINILIBRARY_TURN2_RESPONSE = """Here are the classes and enumerations:
class Book { title: String, author: String, isbn: String }
class Member { name: String, email: String }
class Librarian { staff number }
enum MembershipLevel { BASIC, PREMIUM }"""

MINILIBRARY_ASSOC_RESPONSE = "1 Member borrows 0..* Book"
MINILIBRARY_INHERIT_RESPONSE = "Librarian extends Member"


def minilibrary_config(**overrides) -> PipelineConfig:
    defaults = dict(model_name="test-model", run_seed="minilib")
    defaults.update(overrides)
    return PipelineConfig(**defaults)


def build_minilibrary_store(
    config: PipelineConfig | None = None,
    turn2_failures: int = 0,
    combined: bool = False,
    path=None,
) -> TranscriptStore:
    """Record the hand-written MiniLibrary responses under the keys the
    pipeline will ask for. ``turn2_failures`` prepends unparseable attempts."""
    config = config or minilibrary_config()
    store = TranscriptStore(path)

    def record(messages, temperature, response, attempt=0, task=None):
        params = CompletionParams(temperature=temperature, model_name=config.model_name)
        store.append(
            TranscriptRecord(
                key=transcript_key(messages, params),
                request=list(messages),
                params=params,
                response=response,
                attempt_index=attempt,
                task=task,
            )
        )

    turn1 = render(TaskKind.CLASS_TURN1, PromptInputs.build(MINILIBRARY_DESCRIPTION))
    record(turn1, config.temp_class, MINILIBRARY_TURN1_RESPONSE, task="class_turn1")

    prior = list(turn1) + [assistant(MINILIBRARY_TURN1_RESPONSE)]
    turn2 = render(
        TaskKind.CLASS_TURN2,
        PromptInputs.build(MINILIBRARY_DESCRIPTION, prior_messages=prior),
    )
    for attempt in range(turn2_failures):
        record(turn2, config.temp_class, "no elements here, sorry", attempt=attempt, task="class_turn2")
    record(turn2, config.temp_class, MINILIBRARY_TURN2_RESPONSE, attempt=turn2_failures, task="class_turn2")

    names = extract_class_names(MINILIBRARY_TURN2_RESPONSE)
    if combined:
        combined_msgs = render(
            TaskKind.REL_COMBINED,
            PromptInputs.build(MINILIBRARY_DESCRIPTION, class_names=names),
        )
        record(
            combined_msgs, config.temp_assoc,
            MINILIBRARY_ASSOC_RESPONSE + "\n" + MINILIBRARY_INHERIT_RESPONSE,
            task="rel_combined",
        )
    else:
        assoc = render(
            TaskKind.ASSOC_AGG,
            PromptInputs.build(MINILIBRARY_DESCRIPTION, class_names=names),
        )
        record(assoc, config.temp_assoc, MINILIBRARY_ASSOC_RESPONSE, task="assoc_agg")
        inherit = render(
            TaskKind.INHERITANCE,
            PromptInputs.build(MINILIBRARY_DESCRIPTION, class_names=names),
        )
        record(inherit, config.temp_inherit, MINILIBRARY_INHERIT_RESPONSE, task="inheritance")
    return store
