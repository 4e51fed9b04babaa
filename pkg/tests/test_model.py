from __future__ import annotations

import pytest

from emdm import registry
from emdm.errors import DependentsExist, DuplicateName, EmptyName, KindMismatch, UnknownReference
from emdm.model import (
    Catalog,
    ConstraintDef,
    MappingDef,
    Path,
    SetDef,
    ValueTypeSpec,
    add_constraint,
    add_mapping,
    add_set,
    new_catalog,
    registry_counts,
    remove_constraint,
    remove_mapping,
    remove_set,
)
from emdm.validate import validate_schema


def person_catalog() -> Catalog:
    c = new_catalog("people")
    c = add_set(c, SetDef("PERSON", "Entity"))
    return add_set(c, SetDef("Years", "Value", value_spec=ValueTypeSpec("Integer", min=0)))


def test_new_catalog_has_full_registry():
    c = new_catalog("orders")
    assert c.sets == ()
    assert len(c.registry) == 63


def test_new_catalog_rejects_empty_name():
    with pytest.raises(EmptyName):
        new_catalog("")


def test_registry_counts():
    counts = registry_counts(new_catalog("x"))
    assert counts["per_category"] == {"set": 16, "mapping": 44, "object": 1, "relational": 2}
    assert counts["emdm"] == 61
    assert counts["total"] == 63
    assert (counts["fundamental"], counts["derived"]) == (22, 39)
    assert counts["subcategories"] == 9


def test_registry_subcategory_sizes_sum_to_categories():
    per_sub = registry_counts()["per_subcategory"]
    assert per_sub["general set"] + per_sub["dyadic relation"] == 16
    assert sum(per_sub[s] for s in (
        "general mapping", "autofunction", "general function product",
        "homogeneous binary function product", "function diagram")) == 44


def test_registry_tags_unique_and_lookup():
    tags = [t.tag for t in registry.REGISTRY]
    assert len(set(tags)) == len(tags)
    assert registry.lookup("dyadic_euclideanity").subcategory == "dyadic relation"
    assert not registry.lookup("dyadic_equivalence").fundamental


def test_add_structural_function():
    c = add_mapping(person_catalog(), MappingDef("spouse", "StructuralFunction", "PERSON", "PERSON"))
    assert c.lookup_mapping("PERSON", "spouse").codomain == "PERSON"
    assert validate_schema(c) == []


def test_attribute_codomain_must_be_value_set():
    with pytest.raises(KindMismatch):
        add_mapping(person_catalog(), MappingDef("age", "Attribute", "PERSON", "PERSON"))


def test_duplicate_and_unknown_names():
    c = person_catalog()
    with pytest.raises(DuplicateName):
        add_set(c, SetDef("PERSON", "Entity"))
    with pytest.raises(KindMismatch):
        add_mapping(c, MappingDef("boss", "StructuralFunction", "PERSON", "GHOST"))
    with pytest.raises(UnknownReference):
        c.lookup_set("GHOST")


def test_remove_set_with_dependents():
    c = add_mapping(person_catalog(), MappingDef("spouse", "StructuralFunction", "PERSON", "PERSON"))
    with pytest.raises(DependentsExist) as info:
        remove_set(c, "PERSON")
    assert "spouse" in str(info.value)


def test_remove_in_dependency_order():
    c = add_mapping(person_catalog(), MappingDef("age", "Attribute", "PERSON", "Years"))
    c = add_constraint(c, ConstraintDef("age_total", "map_totality", (Path(("age",), "PERSON"),)))
    with pytest.raises(DependentsExist):
        remove_mapping(c, "PERSON", "age")
    c = remove_constraint(c, "age_total")
    c = remove_mapping(c, "PERSON", "age")
    c = remove_set(c, "PERSON")
    assert [s.name for s in c.sets] == ["Years"]


def test_add_constraint_checks_operands():
    with pytest.raises(UnknownReference):
        add_constraint(person_catalog(), ConstraintDef("x", "map_totality", (Path(("ghost",)),)))
    with pytest.raises(KindMismatch):
        add_constraint(person_catalog(), ConstraintDef("x", "rel_domain", ()))


def test_flags_follow_constraints():
    c = add_mapping(person_catalog(), MappingDef("age", "Attribute", "PERSON", "Years"))
    assert not c.flags("PERSON", "age").total
    c = add_constraint(c, ConstraintDef("t", "map_totality", (Path(("age",), "PERSON"),)))
    assert c.flags("PERSON", "age").total
    assert not c.flags("PERSON", "age").one_to_one


def test_set_shape_invariants():
    assert SetDef("R", "Relationship", rel_sorts=(("a", "A"),)).problems()
    assert SetDef("V", "Value").problems()
    assert SetDef("E", "Entity", value_spec=ValueTypeSpec("Text")).problems()
    assert ValueTypeSpec("Integer", min=5, max=1).problems()
    assert ValueTypeSpec("Integer", enumeration=(1, "two")).problems()
    assert not ValueTypeSpec("Integer", min=0, max=9).problems()


def test_empty_catalog_is_well_formed():
    assert validate_schema(new_catalog("empty")) == []
