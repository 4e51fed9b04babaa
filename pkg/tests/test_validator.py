from __future__ import annotations

import itertools
import json
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdm import validate_instance
from emdm.errors import UnknownConstraint
from emdm.model import make_instance
from emdm.validator import MAX_VIOLATIONS, check_constraint

from conftest import schema
from oracles import PAIR_PROPERTIES, all_relations, auto_property, euclidean_missing, pair_property

ABBR = {
    "reflexivity": "refl", "irreflexivity": "irrefl", "symmetry": "sym", "asymmetry": "asym",
    "transitivity": "trans", "intransitivity": "intrans", "euclideanity": "eucl",
    "ineuclideanity": "ineucl", "equivalence": "equiv", "acyclicity": "acyclic", "connectivity": "conn",
}


# ------------------------------------------------------------------ helpers


def dyadic_catalog(prop: str):
    return schema(f"entity S; relationship R(a: S, b: S); constraint c: {ABBR[prop]}(R);")


def dyadic_instance(pairs, n: int):
    return make_instance({
        "S": [{"id": i} for i in range(1, n + 1)],
        "R": [{"id": k, "a": a, "b": b} for k, (a, b) in enumerate(sorted(pairs), 1)],
    })


def hbfp_catalog(abbr: str):
    return schema(f"entity A; valueset V: Integer; attr f: A -> V; attr g: A -> V; constraint c: {abbr}((A::f, A::g));")


def hbfp_instance(pairs):
    return make_instance({"A": [{"id": k, "f": a, "g": b} for k, (a, b) in enumerate(pairs, 1)]})


def auto_catalog(abbr: str):
    return schema(f"entity A; fn f: A -> A; constraint c: {abbr}(A::f);")


def auto_instance(f: dict):
    return make_instance({"A": [{"id": x, "f": y} for x, y in sorted(f.items())]})


def holds(catalog, inst, name="c") -> bool:
    return not check_constraint(catalog, inst, name)


# ---------------------------------------------------------- spec examples


def test_symmetric_pair():
    assert holds(dyadic_catalog("symmetry"), dyadic_instance({(1, 2), (2, 1)}, 2))


def test_acyclic_autofunction_two_cycle():
    out = check_constraint(auto_catalog("acyclic"), auto_instance({1: 2, 2: 1}), "c")
    assert len(out) == 1
    assert [w.row for w in out[0].witness] == [1, 2]


def test_euclidean_missing_pairs():
    cat = dyadic_catalog("euclideanity")
    pairs = {(1, 2), (1, 3)}
    out = check_constraint(cat, dyadic_instance(pairs, 3), "c")
    missing = {tuple(int(x) for x in re.search(r"but \((\d+), (\d+)\) is missing", v.explanation).groups())
               for v in out}
    assert missing == {(2, 3), (3, 2), (2, 2), (3, 3)} == euclidean_missing(pairs)
    assert holds(cat, dyadic_instance(pairs | missing, 3))


def test_existence_given_other_mapping():
    cat = schema("entity A; valueset V: Integer; attr f: A -> V; attr g: A -> V; constraint c: exists(A::f, A::g);")
    assert len(check_constraint(cat, make_instance({"A": [{"id": 1, "f": None, "g": 5}]}), "c")) == 1
    assert holds(cat, make_instance({"A": [{"id": 1, "f": None, "g": None}, {"id": 2, "f": 1, "g": 5}]}))


def test_nonexistence_given_other_mapping():
    cat = schema("entity A; valueset V: Integer; attr f: A -> V; attr g: A -> V; constraint c: nonexists(A::f, A::g);")
    assert len(check_constraint(cat, make_instance({"A": [{"id": 1, "f": 2, "g": 5}]}), "c")) == 1
    assert holds(cat, make_instance({"A": [{"id": 1, "f": None, "g": 5}, {"id": 2, "f": 1, "g": None}]}))


def test_key_duplicate_lists_both_rows():
    cat = schema("entity P; attr name: P -> TEXT; attr dob: P -> DATE; constraint c: key(P::name, P::dob);")
    inst = make_instance({"P": [
        {"id": 1, "name": "Ann", "dob": "2000-01-01"},
        {"id": 2, "name": "Bob", "dob": "2000-01-01"},
        {"id": 3, "name": "Ann", "dob": "2000-01-01"},
        {"id": 4, "name": "Ann", "dob": None},
        {"id": 5, "name": "Ann", "dob": None},
    ]})
    out = check_constraint(cat, inst, "c")
    assert len(out) == 1
    assert sorted(w.row for w in out[0].witness) == [1, 3]


def test_unknown_constraint():
    with pytest.raises(UnknownConstraint):
        check_constraint(dyadic_catalog("symmetry"), dyadic_instance(set(), 1), "nope")


def test_clean_fixture(company, company_ok):
    assert validate_instance(company, company_ok) == []


def test_seeded_fixture_has_three_violations(company, company_bad):
    report = validate_instance(company, company_bad)
    assert [v.constraint for v in report] == [
        "key_PERSON_name_PERSON_age", "minors_are_juniors", "acyclic_PERSON_boss"]
    again = validate_instance(company, company_bad)
    assert json.dumps(report.to_json()) == json.dumps(again.to_json())


def test_implicit_relational_checks():
    cat = schema("valueset Age: Integer [0 .. 150]; entity P; attr age: P -> Age; fn boss: P -> P;")
    inst = make_instance({"P": [{"id": 1, "age": 200, "boss": 9}]})
    report = validate_instance(cat, inst)
    assert sorted(v.ctype for v in report) == ["rel_domain", "rel_referential_integrity"]
    assert {v.constraint for v in report} == {"P_age_domain", "P_boss_refint"}


# ---------------------------------------------------- mapping constraints


def test_mapping_constraints():
    cat = schema("""
        entity A; entity B; fn f: A -> B;
        constraint t: total(A::f); constraint o: oneone(A::f);
        constraint s: onto(A::f); constraint b: bij(A::f);
    """)
    inst = make_instance({"A": [{"id": 1, "f": 1}, {"id": 2, "f": None}, {"id": 3, "f": None}],
                          "B": [{"id": 1}, {"id": 2}]})
    assert len(check_constraint(cat, inst, "t")) == 2
    assert holds(cat, inst, "o")  # two nulls never collide
    assert len(check_constraint(cat, inst, "s")) == 1
    assert not holds(cat, inst, "b")
    inst2 = make_instance({"A": [{"id": 1, "f": 2}, {"id": 2, "f": 1}], "B": [{"id": 1}, {"id": 2}]})
    assert all(holds(cat, inst2, n) for n in "tosb")


def test_schema_level_constraints_have_no_witness():
    cat = schema("""
        valueset V: Integer [0 .. 5]; entity A; attr x: A -> V default 9; attr y: A -> V;
        constraint d: default(A::x); constraint np: nonprime(A::y); constraint k: key(A::x, A::y);
    """)
    inst = make_instance({"A": []})
    for name in ("d", "np"):
        out = check_constraint(cat, inst, name)
        assert len(out) == 1 and out[0].witness == ()


def test_object_constraint_three_valued():
    cat = schema("valueset V: Integer; entity A; attr x: A -> V; attr y: A -> V; constraint c: object(A: !x < 3 | y = 0);")
    inst = make_instance({"A": [
        {"id": 1, "x": 1, "y": 0},     # true
        {"id": 2, "x": 1, "y": 5},     # false
        {"id": 3, "x": None, "y": 5},  # unknown
        {"id": 4, "x": 7, "y": 5},     # true
    ]})
    assert [v.witness[0].row for v in check_constraint(cat, inst, "c")] == [2]


def test_set_constraints():
    cat = schema("""
        entity U; entity S; entity T;
        constraint i: incl(S, T); constraint d: disj(S, T); constraint u: union(U, S, T); constraint ds: dsum(U, S, T);
    """)
    inst = make_instance({"S": [{"id": 1}, {"id": 2}], "T": [{"id": 2}, {"id": 3}], "U": [{"id": 1}, {"id": 2}, {"id": 3}]})
    assert not holds(cat, inst, "i")
    assert not holds(cat, inst, "d")
    assert holds(cat, inst, "u")
    assert not holds(cat, inst, "ds")


def test_violation_cap():
    cat = schema("entity A; valueset V: Integer; attr x: A -> V; constraint c: total(A::x);")
    inst = make_instance({"A": [{"id": i, "x": None} for i in range(1, 1201)]})
    out = check_constraint(cat, inst, "c")
    assert len(out) == MAX_VIOLATIONS + 1
    assert "truncated" in out[-1].explanation


# -------------------------------------------------- oracle agreement (n<=3)


@pytest.mark.parametrize("prop", PAIR_PROPERTIES)
def test_dyadic_matches_oracle(prop):
    cat = dyadic_catalog(prop)
    for n in (1, 2, 3):
        carrier = range(1, n + 1)
        for rel in all_relations(n):
            assert holds(cat, dyadic_instance(rel, n)) == pair_property(prop, rel, carrier), (prop, sorted(rel))


HBFP_PLAIN = [p for p in PAIR_PROPERTIES if p != "reflexivity"]


@pytest.mark.parametrize("prop", HBFP_PLAIN)
def test_hbfp_matches_oracle_on_active_domain(prop):
    cat = hbfp_catalog(ABBR[prop])
    for rel in all_relations(3):
        active = {x for p in rel for x in p}
        assert holds(cat, hbfp_instance(sorted(rel))) == pair_property(prop, rel, active), (prop, sorted(rel))


AUTO = {
    "refl": "reflexivity", "irrefl": "irreflexivity", "nullrefl": "null_reflexivity",
    "sym": "symmetry", "nullsym": "null_symmetry", "asym": "asymmetry", "idem": "idempotency",
    "nullidem": "null_idempotency", "antiidem": "anti_idempotency", "acyclic": "acyclicity",
    "csurj": "canonical_surjectivity",
}


@pytest.mark.parametrize("abbr", AUTO)
def test_autofunction_matches_oracle(abbr):
    cat = auto_catalog(abbr)
    for n in (1, 2, 3):
        xs = list(range(1, n + 1))
        for image in itertools.product([None, *xs], repeat=n):
            f = dict(zip(xs, image))
            assert holds(cat, auto_instance(f)) == auto_property(AUTO[abbr], f), (abbr, f)


# ----------------------------------------------------------- properties

pairs_on_4 = st.sets(st.tuples(st.integers(1, 4), st.integers(1, 4)), max_size=10)
WITNESS_SOUND = ["irreflexivity", "symmetry", "asymmetry", "transitivity", "intransitivity",
                 "euclideanity", "ineuclideanity", "acyclicity"]


@settings(max_examples=60, deadline=None)
@given(pairs_on_4, st.sampled_from(WITNESS_SOUND))
def test_removing_witness_rows_removes_violation(rel, prop):
    cat = dyadic_catalog(prop)
    inst = dyadic_instance(rel, 4)
    for v in check_constraint(cat, inst, "c"):
        assert v.witness
        after = check_constraint(cat, inst.without_rows(v.coordinates), "c")
        assert v not in after


@settings(max_examples=60, deadline=None)
@given(pairs_on_4, st.sampled_from(PAIR_PROPERTIES))
def test_dyadic_agrees_with_oracle_on_four(rel, prop):
    assert holds(dyadic_catalog(prop), dyadic_instance(rel, 4)) == pair_property(prop, rel, range(1, 5))


NULL_VARIANTS = [("sym", "nullsym"), ("trans", "nulltrans"), ("eucl", "nulleucl")]
maybe = st.one_of(st.none(), st.integers(1, 3))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(maybe, maybe), max_size=6), st.sampled_from(NULL_VARIANTS))
def test_hbfp_plain_implies_null_variant(rows, variant):
    plain, null = variant
    inst = hbfp_instance(rows)
    if holds(hbfp_catalog(plain), inst):
        assert holds(hbfp_catalog(null), inst)
    full = [(a, b) for a, b in rows if a is not None and b is not None]
    expected = pair_property({"sym": "symmetry", "trans": "transitivity", "eucl": "euclideanity"}[plain],
                             set(full), {x for p in full for x in p})
    assert holds(hbfp_catalog(null), inst) == expected
    if any(a is None or b is None for a, b in rows):
        assert not holds(hbfp_catalog(plain), inst)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(maybe, maybe), max_size=6))
def test_hbfp_null_reflexivity(rows):
    expected = all(a == b for a, b in rows if a is not None and b is not None)
    assert holds(hbfp_catalog("nullrefl"), hbfp_instance(rows)) == expected


@settings(max_examples=80, deadline=None)
@given(st.dictionaries(st.integers(1, 4), maybe.map(lambda v: v if v is None else v + 1), min_size=1, max_size=4),
       st.sampled_from([("refl", "nullrefl"), ("sym", "nullsym"), ("idem", "nullidem")]))
def test_auto_plain_implies_null_variant(f, variant):
    plain, null = variant
    inst = auto_instance(f)
    if holds(auto_catalog(plain), inst):
        assert holds(auto_catalog(null), inst)
