from __future__ import annotations

import datetime as dt
import json
from decimal import Decimal

import pytest

from emdm import parse_instance
from emdm.errors import InstanceError
from emdm.instance import instance_to_json
from emdm.model import Ref

from conftest import schema

PEOPLE = schema("""
    valueset Age: NAT;
    entity PERSON;
    attr name: PERSON -> TEXT;
    attr age: PERSON -> Age;
    attr born: PERSON -> DATE;
    attr salary: PERSON -> RAT;
    fn spouse: PERSON -> PERSON;
""")


def codes(text: str) -> list[str]:
    with pytest.raises(InstanceError) as info:
        parse_instance(text, PEOPLE)
    return [d.code for d in info.value.errors]


def test_one_row():
    inst = parse_instance('{"PERSON":{"rows":[{"id":1,"name":"Ada","spouse":null}]}}', PEOPLE)
    rows = inst.of("PERSON").rows
    assert len(rows) == 1
    assert rows[0].get("name") == "Ada" and rows[0].get("spouse") is None


def test_dangling_reference():
    assert codes('{"PERSON":{"rows":[{"id":1,"spouse":7}]}}') == ["DanglingRef"]


def test_bound_violation():
    assert codes('{"PERSON":{"rows":[{"id":1,"age":-1}]}}') == ["TypeMismatch"]


@pytest.mark.parametrize("text,code", [
    ('{"PERSON": [', "JsonSyntax"),
    ('{"CAR":{"rows":[]}}', "UnknownSet"),
    ('{"PERSON":{"rows":[{"id":1,"shoe":9}]}}', "UnknownColumn"),
    ('{"PERSON":{"rows":[{"id":1},{"id":1}]}}', "DuplicateId"),
    ('{"PERSON":{"rows":[{"id":0}]}}', "BadRow"),
])
def test_structural_errors(text, code):
    assert codes(text) == [code]


def test_values_are_typed():
    inst = parse_instance(json.dumps({"PERSON": {"rows": [
        {"id": 1, "born": "1815-12-10", "salary": 12.50, "spouse": 2},
        {"id": 2, "spouse": 1},
    ]}}), PEOPLE)
    row = inst.of("PERSON").get(1)
    assert row.get("born") == dt.date(1815, 12, 10)
    assert row.get("salary") == Decimal("12.50")
    assert isinstance(row.get("spouse"), Ref)


def test_lenient_mode_defers_relational_defects():
    inst = parse_instance('{"PERSON":{"rows":[{"id":1,"age":-3,"spouse":9}]}}', PEOPLE, strict=False)
    assert inst.of("PERSON").get(1).get("age") == -3


def test_rows_sorted_and_json_round_trip():
    text = '{"PERSON":{"rows":[{"id":3,"name":"c"},{"id":1,"name":"a","spouse":3}]}}'
    inst = parse_instance(text, PEOPLE)
    assert inst.of("PERSON").ids() == [1, 3]
    again = parse_instance(json.dumps(instance_to_json(inst, PEOPLE)), PEOPLE)
    assert again == inst
