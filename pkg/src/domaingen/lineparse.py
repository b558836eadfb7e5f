"""Parsers for the formatted text lines produced during generation.

Canonical grammars, one element per line:

    class <Name> { <attr>: <Type>, ... }
    enum <Name> { <LITERAL>, ... }
    <mult> <Source> associates <mult> <Target>
    <mult> <Whole> contains <mult> <Part>
    <Child> extends <Parent>

Real output rarely stays canonical, so each parser also accepts the recorded
variants: leading bullets and numbering, missing braces, attributes without
types, bracketed or trailing multiplicities, alternative verbs, and trailing
parenthetical commentary. Prose lines are skipped silently; lines that look
element-like but cannot be completed become ParseErrors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .metamodel import (
    ClassDef,
    DomainModel,
    EmptyName,
    EnumDef,
    Multiplicity,
    RelationshipDef,
    RelationshipKind,
    TaskKind,
    parse_multiplicity,
    to_upper_camel,
)


class EmptyOutput(ValueError):
    """Zero elements parsed from non-empty text; callers re-generate on this."""


@dataclass
class ParseError:
    line_number: int
    raw_line: str
    reason: str


@dataclass
class ClassLine:
    name: str
    attrs: list[tuple[str, str | None]]
    raw_line: str = field(default="", compare=False)
    task: TaskKind | None = field(default=None, compare=False)


@dataclass
class EnumLine:
    name: str
    literals: list[str]
    raw_line: str = field(default="", compare=False)
    task: TaskKind | None = field(default=None, compare=False)


@dataclass
class AssocLine:
    source: str
    source_mult: Multiplicity | None
    target: str
    target_mult: Multiplicity | None
    kind: RelationshipKind
    raw_line: str = field(default="", compare=False)
    task: TaskKind | None = field(default=None, compare=False)


@dataclass
class InheritLine:
    child: str
    parent: str
    raw_line: str = field(default="", compare=False)
    task: TaskKind | None = field(default=None, compare=False)


ParsedElement = ClassLine | EnumLine | AssocLine | InheritLine

_MAX_END_WORDS = 3

# Numbered bullets need trailing whitespace so "1..*" (a multiplicity) survives.
_BULLET_RE = re.compile(r"^\s*(?:[-*•+]+\s+|\d+\s*[.)]\s+)")
_TRAILING_PAREN_RE = re.compile(r"\s*\([^()]*\)\s*$")

_CLASS_BRACES_RE = re.compile(r"^class\s+([^{}]+?)\s*\{(.*)\}\s*$", re.IGNORECASE)
_CLASS_COLON_RE = re.compile(r"^class\s+([^{}:]+?)\s*:\s*(.+)$", re.IGNORECASE)
_CLASS_BARE_RE = re.compile(r"^class\s+([^{}:]+?)\s*\{?\s*$", re.IGNORECASE)
_ENUM_BRACES_RE = re.compile(r"^enum(?:eration)?\s+([^{}]+?)\s*\{(.*)\}\s*$", re.IGNORECASE)
_ENUM_COLON_RE = re.compile(r"^enum(?:eration)?\s+([^{}:]+?)\s*:\s*(.+)$", re.IGNORECASE)

# Bare "Hotel: name, address" variant; every word of the name must be
# capitalized so prose headers ("Here are the classes:") stay prose.
_BARE_CLASS_RE = re.compile(r"^((?:[A-Z][A-Za-z0-9]*)(?:\s+[A-Z][A-Za-z0-9]*)*)\s*:\s*(.+)$")
_BARE_BRACES_RE = re.compile(r"^((?:[A-Z][A-Za-z0-9]*)(?:\s+[A-Z][A-Za-z0-9]*)*)\s*\{(.*)\}\s*$")

_WORD_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_']*$")
_CAP_WORD_RE = re.compile(r"^[A-Z][A-Za-z0-9_]*$")
_LOWER_WORD_RE = re.compile(r"^[a-z][a-z]*$")

_AGGREGATION_VERBS = (
    ("contains",), ("contain",), ("has",), ("have",), ("owns",), ("own",),
)
_ASSOCIATION_VERBS = (
    ("is", "associated", "with"), ("associated", "with"),
    ("associates", "with"), ("associate", "with"),
    ("associates",), ("associate",), ("offers",), ("offer",),
)
# Longest phrases first so "is associated with" wins over bare "associated".
_KNOWN_VERBS: list[tuple[tuple[str, ...], RelationshipKind]] = sorted(
    [(v, RelationshipKind.AGGREGATION) for v in _AGGREGATION_VERBS]
    + [(v, RelationshipKind.ASSOCIATION) for v in _ASSOCIATION_VERBS],
    key=lambda item: -len(item[0]),
)

_INHERIT_RES = (
    re.compile(r"^(.+?)\s+extends\s+(.+)$", re.IGNORECASE),
    re.compile(r"^(.+?)\s+inherits?(?:\s+from)?\s+(.+)$", re.IGNORECASE),
    re.compile(r"^(.+?)\s+is\s+a\s+subclass\s+of\s+(.+)$", re.IGNORECASE),
)


def _strip_decorations(line: str) -> str:
    text = _BULLET_RE.sub("", line.strip())
    text = _TRAILING_PAREN_RE.sub("", text)
    return text.strip().rstrip(".;").strip()


def _split_attr_items(body: str) -> list[str]:
    body = body.strip()
    if not body:
        return []
    if "," in body or ";" in body:
        items = re.split(r"[,;]", body)
    elif " - " in body:
        items = body.split(" - ")
    else:
        items = [body]
    return [item.strip() for item in items if item.strip()]


def _parse_attr_item(item: str) -> tuple[str, str | None] | None:
    if ":" in item:
        name, type_name = item.split(":", 1)
        name, type_name = name.strip(), type_name.strip()
        if not name:
            return None
        return (name, type_name or None)
    return (item, None)


def _parse_attr_body(body: str) -> list[tuple[str, str | None]] | None:
    attrs: list[tuple[str, str | None]] = []
    for item in _split_attr_items(body):
        parsed = _parse_attr_item(item)
        if parsed is None:
            return None
        attrs.append(parsed)
    return attrs


def _looks_like_identifier_list(body: str) -> bool:
    # Guard for the bare "Name: ..." variant: each item must be short enough
    # to be an attribute phrase, otherwise the line is prose with a colon.
    items = _split_attr_items(body)
    if not items:
        return False
    for item in items:
        words = item.replace(":", " ").split()
        if len(words) > 3 or not all(_WORD_RE.match(w) for w in words):
            return False
    return True


def _parse_class_enum_line(line: str) -> ClassLine | EnumLine | ParseError | None:
    """Parse one line; None means the line is prose and should be skipped."""
    text = _strip_decorations(line)
    if not text:
        return None

    m = _ENUM_BRACES_RE.match(text) or _ENUM_COLON_RE.match(text)
    if m:
        if ":" in m.group(2):
            return ParseError(0, line, "typed items in enumeration literals")
        literals = _split_attr_items(m.group(2))
        if not literals:
            return ParseError(0, line, "enumeration without literals")
        return EnumLine(m.group(1).strip(), literals, raw_line=line)
    if re.match(r"^enum(?:eration)?\b", text, re.IGNORECASE):
        return ParseError(0, line, "unparseable enumeration line")

    m = _CLASS_BRACES_RE.match(text) or _CLASS_COLON_RE.match(text)
    if m:
        attrs = _parse_attr_body(m.group(2))
        if attrs is None or not m.group(1).strip():
            return ParseError(0, line, "unparseable class line")
        return ClassLine(m.group(1).strip(), attrs, raw_line=line)
    m = _CLASS_BARE_RE.match(text)
    if m:
        if not m.group(1).strip():
            return ParseError(0, line, "class without a name")
        return ClassLine(m.group(1).strip(), [], raw_line=line)
    if re.match(r"^class\b", text, re.IGNORECASE):
        return ParseError(0, line, "unparseable class line")

    m = _BARE_BRACES_RE.match(text)
    if m:
        attrs = _parse_attr_body(m.group(2))
        if attrs is None:
            return ParseError(0, line, "unparseable attribute list")
        return ClassLine(m.group(1).strip(), attrs, raw_line=line)
    m = _BARE_CLASS_RE.match(text)
    if m and _looks_like_identifier_list(m.group(2)):
        attrs = _parse_attr_body(m.group(2))
        if attrs:
            return ClassLine(m.group(1).strip(), attrs, raw_line=line)
    return None


def parse_class_block(text: str) -> tuple[list[ParsedElement], list[ParseError]]:
    """Parse a class-generation answer into class/enum elements plus errors."""
    elements: list[ParsedElement] = []
    errors: list[ParseError] = []
    for number, line in enumerate(text.splitlines(), start=1):
        result = _parse_class_enum_line(line)
        if result is None:
            continue
        if isinstance(result, ParseError):
            result.line_number = number
            errors.append(result)
        else:
            elements.append(result)
    return elements, errors


def _normalize_mult_token(token: str) -> str:
    if token.startswith("[") and token.endswith("]"):
        return token[1:-1].strip()
    return token


def _take_mult(tokens: list[str], index: int) -> tuple[Multiplicity | None, int]:
    if index < len(tokens):
        mult = parse_multiplicity(_normalize_mult_token(tokens[index]))
        if mult is not None:
            return mult, index + 1
    return None, index


def _take_name(tokens: list[str], index: int, capitalized_only: bool) -> tuple[str | None, int]:
    word_re = _CAP_WORD_RE if capitalized_only else _WORD_RE
    words: list[str] = []
    while (
        index < len(tokens)
        and len(words) < _MAX_END_WORDS
        and word_re.match(tokens[index])
    ):
        words.append(tokens[index])
        index += 1
    if not words:
        return None, index
    return " ".join(words), index


def _parse_left_end(tokens: list[str], capitalized_only: bool) -> tuple[str, Multiplicity | None] | None:
    mult, i = _take_mult(tokens, 0)
    name, i = _take_name(tokens, i, capitalized_only)
    if name is None or i != len(tokens):
        return None
    return name, mult


def _parse_right_end(tokens: list[str], capitalized_only: bool) -> tuple[str, Multiplicity | None] | None:
    """Accept ``[mult] Name`` and the trailing-multiplicity variant ``Name mult``."""
    mult, j = _take_mult(tokens, 0)
    name, j = _take_name(tokens, j, capitalized_only)
    if name is None:
        return None
    if j < len(tokens) and mult is None:
        mult, j = _take_mult(tokens, j)
    if j != len(tokens):
        return None
    return name, mult


def _find_known_verb(tokens: list[str]) -> tuple[int, int, RelationshipKind] | None:
    lowered = [t.lower() for t in tokens]
    for verb, kind in _KNOWN_VERBS:
        span = len(verb)
        for i in range(len(lowered) - span + 1):
            if tuple(lowered[i:i + span]) == verb:
                return i, i + span, kind
    return None


def _parse_assoc_line(line: str) -> AssocLine | ParseError | None:
    text = _strip_decorations(line)
    if not text:
        return None
    tokens = text.split()
    found = _find_known_verb(tokens)
    if found is not None:
        start, end, kind = found
        left = _parse_left_end(tokens[:start], capitalized_only=False)
        if left is None:
            return ParseError(0, line, "could not identify the source end")
        right = _parse_right_end(tokens[end:], capitalized_only=False)
        if right is None:
            return ParseError(0, line, "could not identify the target end")
        return AssocLine(left[0], left[1], right[0], right[1], kind, raw_line=line)

    # Unknown verb: accept "<mult?> <CapName> <lowercase words> <mult?> <CapName> <mult?>"
    # and default the kind to ASSOCIATION. Anything looser is prose.
    smult, i = _take_mult(tokens, 0)
    source, i = _take_name(tokens, i, capitalized_only=True)
    if source is None:
        return None
    verb_words = 0
    while i < len(tokens) and _LOWER_WORD_RE.match(tokens[i]):
        verb_words += 1
        i += 1
    if verb_words == 0 or i >= len(tokens):
        return None
    # Only commit to "this is a relationship line" when the tail clearly
    # starts an end; otherwise the line is prose.
    head = _normalize_mult_token(tokens[i])
    if parse_multiplicity(head) is None and not _CAP_WORD_RE.match(tokens[i]):
        return None
    right = _parse_right_end(tokens[i:], capitalized_only=True)
    if right is None:
        return ParseError(0, line, "could not identify the target end")
    return AssocLine(source, smult, right[0], right[1], RelationshipKind.ASSOCIATION, raw_line=line)


def parse_assoc_lines(text: str) -> tuple[list[ParsedElement], list[ParseError]]:
    """Parse association/aggregation lines; unknown verbs default to ASSOCIATION."""
    elements: list[ParsedElement] = []
    errors: list[ParseError] = []
    for number, line in enumerate(text.splitlines(), start=1):
        result = _parse_assoc_line(line)
        if result is None:
            continue
        if isinstance(result, ParseError):
            result.line_number = number
            errors.append(result)
        else:
            elements.append(result)
    return elements, errors


def _clean_inherit_end(raw: str) -> str | None:
    tokens = raw.strip().split()
    if tokens and parse_multiplicity(_normalize_mult_token(tokens[0])):
        tokens = tokens[1:]
    if not tokens or len(tokens) > _MAX_END_WORDS:
        return None
    if not all(_WORD_RE.match(t) for t in tokens):
        return None
    return " ".join(tokens)


def _parse_inherit_line(line: str) -> InheritLine | ParseError | None:
    text = _strip_decorations(line)
    if not text:
        return None
    for pattern in _INHERIT_RES:
        m = pattern.match(text)
        if not m:
            continue
        child = _clean_inherit_end(m.group(1))
        parent = _clean_inherit_end(m.group(2))
        if child is None or parent is None:
            return ParseError(0, line, "could not identify the child or parent end")
        return InheritLine(child, parent, raw_line=line)
    return None


def parse_inherit_lines(text: str) -> tuple[list[ParsedElement], list[ParseError]]:
    """Parse ``Child extends Parent`` lines and the tolerated phrasings."""
    elements: list[ParsedElement] = []
    errors: list[ParseError] = []
    for number, line in enumerate(text.splitlines(), start=1):
        result = _parse_inherit_line(line)
        if result is None:
            continue
        if isinstance(result, ParseError):
            result.line_number = number
            errors.append(result)
        else:
            elements.append(result)
    return elements, errors


def parse_relationship_lines(text: str) -> tuple[list[ParsedElement], list[ParseError]]:
    """Parse mixed relationship output: inheritance grammar first, then associations."""
    elements: list[ParsedElement] = []
    errors: list[ParseError] = []
    for number, line in enumerate(text.splitlines(), start=1):
        result = _parse_inherit_line(line)
        if result is None:
            result = _parse_assoc_line(line)
        if result is None:
            continue
        if isinstance(result, ParseError):
            result.line_number = number
            errors.append(result)
        else:
            elements.append(result)
    return elements, errors


def parse_model_lines(text: str) -> tuple[list[ParsedElement], list[ParseError]]:
    """Parse whole-model output (single-prompt mode): classes, enums, and relationships."""
    elements: list[ParsedElement] = []
    errors: list[ParseError] = []
    for number, line in enumerate(text.splitlines(), start=1):
        result = _parse_class_enum_line(line)
        if result is None:
            result = _parse_inherit_line(line)
        if result is None:
            result = _parse_assoc_line(line)
        if result is None:
            continue
        if isinstance(result, ParseError):
            result.line_number = number
            errors.append(result)
        else:
            elements.append(result)
    return elements, errors


def extract_class_names(text: str) -> list[str]:
    """Pull normalized class and enum names out of a class-generation answer.

    Names are normalized to UpperCamelCase so later steps refer to classes the
    same way the assembled model will; order preserved, duplicates removed.
    """
    elements, _ = parse_class_block(text)
    names: list[str] = []
    for element in elements:
        if isinstance(element, (ClassLine, EnumLine)):
            try:
                name = to_upper_camel(element.name)
            except EmptyName:
                continue
            if name not in names:
                names.append(name)
    return names


def emit_class_line(cls: ClassDef) -> str:
    body = ", ".join(f"{a.name}: {a.type_name}" for a in cls.attributes)
    return f"class {cls.name} {{ {body} }}" if body else f"class {cls.name} {{ }}"


def emit_enum_line(enum: EnumDef) -> str:
    return f"enum {enum.name} {{ {', '.join(enum.literals)} }}"


def emit_relationship_line(rel: RelationshipDef) -> str:
    if rel.kind is RelationshipKind.INHERITANCE:
        return f"{rel.source} extends {rel.target}"
    verb = "contains" if rel.kind is RelationshipKind.AGGREGATION else "associates"
    return f"{rel.source_mult} {rel.source} {verb} {rel.target_mult} {rel.target}"


def emit_model_lines(model: DomainModel) -> str:
    """Re-emit a model in the canonical grammar, one element per line."""
    lines = [emit_class_line(c) for c in model.classes]
    lines += [emit_enum_line(e) for e in model.enums]
    lines += [emit_relationship_line(r) for r in model.relationships]
    return "\n".join(lines)
