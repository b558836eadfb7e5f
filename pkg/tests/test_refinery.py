import random

import pytest

from domaingen.lineparse import (
    AssocLine,
    ClassLine,
    EnumLine,
    InheritLine,
    emit_model_lines,
    parse_model_lines,
)
from domaingen.metamodel import (
    AttributeDef,
    Multiplicity,
    RelationshipKind,
    ReviewStatus,
    validate_model,
)
from domaingen.refinery import (
    APPENDED,
    DROPPED,
    Drop,
    Keep,
    ToAttribute,
    assemble,
    dedupe,
    fix_association_ends,
    fix_inheritance_ends,
)

from helpers import random_parsed_elements


def _assoc(source, target, smult=None, tmult=None, kind=RelationshipKind.ASSOCIATION):
    return AssocLine(source, smult, target, tmult, kind, raw_line=f"{source} - {target}")


class TestRule1Naming:
    def test_class_and_attribute_names_normalized(self):
        model, report = assemble(
            [ClassLine("bus driver", [("Pick Up time", None)], raw_line="x")], []
        )
        cls = model.classes[0]
        assert cls.name == "BusDriver"
        assert cls.attributes[0].name == "pickUpTime"
        rule1 = [(f.before, f.after) for f in report.applied if f.rule == 1]
        assert ("bus driver", "BusDriver") in rule1
        assert ("Pick Up time", "pickUpTime") in rule1

    def test_association_name_joins_end_names(self):
        model, _ = assemble(
            [ClassLine("Bus", []), ClassLine("Route", [])],
            [_assoc("Bus", "Route", Multiplicity(1, 1), Multiplicity(1, 1))],
        )
        assert model.relationships[0].name == "busRoute"


class TestRule2Types:
    def test_missing_type_defaults_to_string(self):
        model, report = assemble([ClassLine("Hotel", [("name", None)], raw_line="x")], [])
        assert model.classes[0].attributes[0].type_name == "String"
        assert any(f.rule == 2 and f.after == "String" for f in report.applied)

    def test_class_typed_attribute_retyped(self):
        model, report = assemble(
            [ClassLine("Booking", [("hotel", "Hotel")]), ClassLine("Hotel", [])], []
        )
        booking = next(c for c in model.classes if c.name == "Booking")
        assert booking.attributes[0].type_name == "String"
        assert any(f.rule == 2 for f in report.applied)

    def test_enum_typed_attribute_kept(self):
        model, _ = assemble(
            [ClassLine("Room", [("roomType", "RoomType")]), EnumLine("RoomType", ["single"])], []
        )
        assert model.classes[0].attributes[0].type_name == "RoomType"

    def test_type_synonyms_normalized(self):
        model, _ = assemble(
            [ClassLine("Hotel", [("stars", "int"), ("rate", "float"), ("open", "bool")])], []
        )
        types = [a.type_name for a in model.classes[0].attributes]
        assert types == ["Integer", "Real", "Boolean"]


class TestRule3AssociationEnds:
    def test_both_ends_known_kept(self):
        outcome = fix_association_ends(_assoc("Traveller", "Hotel"), {"Traveller", "Hotel"})
        assert isinstance(outcome, Keep)

    def test_data_type_end_becomes_attribute(self):
        outcome = fix_association_ends(_assoc("Booking", "Date"), {"Booking"})
        assert isinstance(outcome, ToAttribute)
        assert outcome.owner == "Booking"
        assert outcome.attribute == AttributeDef("date", "Date")

    def test_enum_end_becomes_attribute(self):
        outcome = fix_association_ends(_assoc("Room", "RoomType"), {"Room"}, {"RoomType"})
        assert isinstance(outcome, ToAttribute)
        assert outcome.attribute.type_name == "RoomType"

    def test_unknown_ends_dropped(self):
        assert isinstance(fix_association_ends(_assoc("Foo", "Bar"), {"Hotel"}), Drop)
        assert isinstance(fix_association_ends(_assoc("Hotel", "Ghost"), {"Hotel"}), Drop)

    def test_drop_recorded_in_report(self):
        model, report = assemble(
            [ClassLine("Hotel", [])],
            [_assoc("Hotel", "Ghost", Multiplicity(1, 1), Multiplicity(1, 1))],
        )
        assert model.relationships == []
        assert any(f.rule == 3 and f.after == DROPPED for f in report.applied)


class TestRule4Multiplicities:
    def test_missing_multiplicity_defaults_to_one(self):
        model, report = assemble(
            [ClassLine("A", []), ClassLine("B", [])], [_assoc("A", "B")]
        )
        rel = model.relationships[0]
        assert rel.source_mult == Multiplicity(1, 1)
        assert rel.target_mult == Multiplicity(1, 1)
        assert sum(1 for f in report.applied if f.rule == 4) == 2

    def test_invalid_multiplicity_replaced(self):
        model, report = assemble(
            [ClassLine("A", []), ClassLine("B", [])],
            [_assoc("A", "B", Multiplicity(5, 2), Multiplicity(0, 0))],
        )
        rel = model.relationships[0]
        assert rel.source_mult == Multiplicity(1, 1)
        assert rel.target_mult == Multiplicity(1, 1)
        assert sum(1 for f in report.applied if f.rule == 4) == 2

    def test_valid_multiplicities_untouched(self):
        model, report = assemble(
            [ClassLine("A", []), ClassLine("B", [])],
            [_assoc("A", "B", Multiplicity(0, None), Multiplicity(1, None))],
        )
        assert not [f for f in report.applied if f.rule == 4]
        assert str(model.relationships[0].source_mult) == "0..*"


class TestRule5InheritanceEnds:
    def test_parent_required_by_two_children_appended(self):
        lines = [
            InheritLine("Admin", "User", raw_line="a"),
            InheritLine("Customer", "User", raw_line="b"),
        ]
        kept, appended, dropped = fix_inheritance_ends(lines, {"Admin", "Customer"})
        assert appended == ["User"]
        assert kept == lines
        assert dropped == []

    def test_single_child_unknown_parent_dropped(self):
        kept, appended, dropped = fix_inheritance_ends(
            [InheritLine("Driver", "Person", raw_line="x")], {"Driver"}
        )
        assert kept == [] and appended == []
        assert len(dropped) == 1

    def test_known_parent_kept(self):
        kept, appended, _ = fix_inheritance_ends(
            [InheritLine("Driver", "Person", raw_line="x")], {"Driver", "Person"}
        )
        assert len(kept) == 1 and appended == []

    def test_unknown_child_dropped(self):
        kept, appended, dropped = fix_inheritance_ends(
            [InheritLine("Ghost", "Person", raw_line="x")], {"Person"}
        )
        assert kept == [] and appended == [] and len(dropped) == 1

    def test_appended_parent_in_assembled_model(self):
        model, report = assemble(
            [ClassLine("Admin", []), ClassLine("Customer", [])],
            [InheritLine("Admin", "User", raw_line="a"), InheritLine("Customer", "User", raw_line="b")],
        )
        assert "User" in {c.name for c in model.classes}
        appended = next(f for f in report.applied if f.rule == 5 and f.after == APPENDED)
        assert appended.element == "User"
        user = next(c for c in model.classes if c.name == "User")
        assert user.provenance is not None and user.provenance.raw_line == ""


class TestDedupe:
    def test_duplicate_classes_merge_attribute_union(self):
        model, _ = assemble(
            [
                ClassLine("Hotel", [("name", "String")]),
                ClassLine("Hotel", [("address", "String")]),
            ],
            [],
        )
        hotel = model.classes[0]
        assert [a.name for a in hotel.attributes] == ["name", "address"]

    def test_identical_association_collapsed(self):
        rel = _assoc("A", "B", Multiplicity(1, 1), Multiplicity(1, 1))
        rel2 = _assoc("A", "B", Multiplicity(1, 1), Multiplicity(1, 1))
        model, _ = assemble([ClassLine("A", []), ClassLine("B", [])], [rel, rel2])
        assert len(model.relationships) == 1

    def test_conflicting_multiplicities_keep_first(self):
        first = _assoc("A", "B", Multiplicity(1, 1), Multiplicity(1, 1))
        second = _assoc("A", "B", Multiplicity(0, None), Multiplicity(1, None))
        model, report = assemble([ClassLine("A", []), ClassLine("B", [])], [first, second])
        assert len(model.relationships) == 1
        assert model.relationships[0].source_mult == Multiplicity(1, 1)
        assert any("multiplicit" in note for note in report.notes)

    def test_dedupe_is_public_and_order_preserving(self):
        model, _ = assemble(
            [ClassLine("B", []), ClassLine("A", []), ClassLine("B", [("x", None)])], []
        )
        deduped = dedupe(model)
        assert [c.name for c in deduped.classes] == ["B", "A"]


class TestCycles:
    def test_two_cycle_broken_deterministically(self):
        model, report = assemble(
            [ClassLine("A", []), ClassLine("B", [])],
            [InheritLine("A", "B", raw_line="1"), InheritLine("B", "A", raw_line="2")],
        )
        edges = {(r.source, r.target) for r in model.relationships}
        assert edges == {("A", "B")}  # lexicographically-last edge (B, A) dropped
        assert any("cycle" in note for note in report.notes)

    def test_self_inheritance_dropped(self):
        model, _ = assemble([ClassLine("A", [])], [InheritLine("A", "A", raw_line="x")])
        assert model.relationships == []


class TestAssembleProperties:
    def test_statuses_start_proposed(self):
        model, _ = assemble(
            [ClassLine("Hotel", [("name", None)])],
            [],
        )
        assert model.classes[0].status is ReviewStatus.PROPOSED
        assert model.classes[0].attributes[0].status is ReviewStatus.PROPOSED

    def test_soundness_on_fuzzed_input(self):
        rng = random.Random(99)
        for _ in range(300):
            classes_block, rels = random_parsed_elements(rng)
            model, _ = assemble(classes_block, rels)
            assert validate_model(model) == [], (classes_block, rels, validate_model(model))

    def test_idempotence_on_fuzzed_input(self):
        rng = random.Random(123)
        for _ in range(300):
            classes_block, rels = random_parsed_elements(rng)
            first, _ = assemble(classes_block, rels)
            reparsed, errors = parse_model_lines(emit_model_lines(first))
            assert not errors
            class_like = [e for e in reparsed if isinstance(e, (ClassLine, EnumLine))]
            rel_like = [e for e in reparsed if isinstance(e, (AssocLine, InheritLine))]
            second, second_report = assemble(class_like, rel_like)
            assert second == first
            assert not second_report.applied  # nothing left to fix

    def test_conservativeness_every_element_traceable(self):
        rng = random.Random(321)
        for _ in range(200):
            classes_block, rels = random_parsed_elements(rng)
            model, report = assemble(classes_block, rels)
            appended = {f.element for f in report.applied if f.after == APPENDED}
            for element in model.classes + model.enums + model.relationships:
                assert element.provenance is not None
                if element.provenance.raw_line == "":
                    assert element.name in appended or getattr(element, "source", None)

    def test_pathological_input_yields_empty_model(self):
        model, report = assemble([], [_assoc("Ghost", "Phantom")])
        assert model.classes == [] and model.relationships == []
        assert report.applied  # the drop is explained
