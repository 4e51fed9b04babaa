from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdm.analysis import (
    Certificate,
    Counterexample,
    Pattern,
    Theorem,
    analysis_warnings,
    closure,
    closure_facts,
    default_theorems,
    detect_incoherence,
    load_theorems,
    minimize,
    oracle_certify,
)
from emdm.errors import CertificationFailure, IncoherentInput
from emdm.validate import validate_schema

from conftest import schema
from oracles import all_relations, auto_property, pair_property

D = "entity S; relationship D(a: S, b: S);\n"


def dyadic(*abbrs: str):
    return schema(D + "\n".join(f"constraint {a}(D);" for a in abbrs))


def tags(constraints) -> list[str]:
    return [c.ctype for c in constraints]


def theorem(name, premise, conclusion=(), kind="redundancy", family="dyadic"):
    pat = lambda ts: tuple(Pattern(t, ("?R",)) for t in ts)  # noqa: E731
    return Theorem(name, kind, family, pat(premise), pat(conclusion))


# ---------------------------------------------------------------- closure


def test_reflexive_euclidean_closure():
    _, derived = closure(dyadic("refl", "eucl"))
    assert tags(derived) == ["dyadic_symmetry", "dyadic_transitivity", "dyadic_equivalence"]
    assert all(c.origin == "derived" and c.theorem for c in derived)


def test_empty_closure():
    c = schema("entity A;")
    assert closure(c) == (c, [])


def test_asymmetry_gives_irreflexivity():
    assert tags(closure(dyadic("asym"))[1]) == ["dyadic_irreflexivity"]


def test_closure_is_idempotent_on_catalogs():
    c, _ = closure(dyadic("refl", "eucl", "acyclic"))
    again, more = closure(c)
    assert more == [] and again == c


def test_closure_result_is_well_formed():
    c, _ = closure(dyadic("refl", "eucl"))
    assert validate_schema(c) == []


def test_totality_from_existence_given_unity():
    c = schema("entity A; valueset V: Integer; attr f: A -> V; constraint exists(A::f, A::id);")
    assert "map_totality" in tags(closure(c)[1])


def test_set_equality_and_direct_sum():
    c = schema("entity U; entity S; entity T; constraint incl(S, T); constraint incl(T, S);"
               "constraint disj(S, T); constraint union(U, S, T);")
    derived = tags(closure(c)[1])
    assert "set_equality" in derived and "set_direct_sum" in derived


# ------------------------------------------------------------ incoherence


def test_reflexive_acyclic_is_incoherent():
    found = detect_incoherence(dyadic("refl", "acyclic"))
    assert len(found) == 1
    assert found[0].constraints == ("refl_D", "acyclic_D")


def test_reflexive_irreflexive_is_incoherent():
    assert len(detect_incoherence(dyadic("refl", "irrefl"))) == 1


def test_symmetric_asymmetric_is_only_a_warning():
    c = dyadic("sym", "asym")
    assert detect_incoherence(c) == []
    warnings = analysis_warnings(c)
    assert len(warnings) == 1 and "empty relation" in warnings[0].message
    # the empty relation really is a model, and no non-empty one exists (n <= 3)
    models = [r for n in (1, 2, 3) for r in all_relations(n)
              if pair_property("symmetry", r, range(1, n + 1)) and pair_property("asymmetry", r, range(1, n + 1))]
    assert models and all(not r for r in models)


@pytest.mark.parametrize("text", [
    "entity A; fn f: A -> A; constraint idem(A::f); constraint antiidem(A::f);",
    "entity A; entity B; fn f: A -> B; fn g: A -> B; constraint comm(A::f, A::g); constraint anticomm(A::f, A::g);",
    "entity A; valueset V: Integer; attr f: A -> V; attr g: A -> V;"
    "constraint total(A::f); constraint nonexists(A::f, A::g); constraint total(A::g);",
    "entity A; entity B; fn f: A -> B; constraint bij(A::f); constraint nonprime(A::f);",
])
def test_other_incoherences(text):
    assert len(detect_incoherence(schema(text))) == 1


def test_clean_catalogs_are_coherent(company):
    assert detect_incoherence(company) == []
    assert detect_incoherence(dyadic("refl", "sym", "trans")) == []


# ------------------------------------------------------------- minimize


def test_minimize_equivalence_parts():
    c = dyadic("refl", "sym", "trans", "equiv")
    m, removed = minimize(c)
    assert tags(m.constraints) == ["dyadic_equivalence"]
    assert [r.constraint for r in removed] == ["refl_D", "sym_D", "trans_D"]
    assert closure_facts(m) == closure_facts(c)


def test_minimize_leaves_lone_totality():
    c = schema("entity A; valueset V: Integer; attr f: A -> V; constraint total(A::f);")
    assert minimize(c) == (c, [])


def test_minimize_drops_irreflexivity():
    m, removed = minimize(dyadic("asym", "irrefl"))
    assert tags(m.constraints) == ["dyadic_asymmetry"]
    assert [r.constraint for r in removed] == ["irrefl_D"]


def test_minimize_refuses_incoherent_input():
    with pytest.raises(IncoherentInput):
        minimize(dyadic("refl", "irrefl"))


DYADIC = ["refl", "irrefl", "sym", "asym", "trans", "intrans", "eucl", "ineucl", "equiv", "acyclic", "conn"]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(DYADIC), unique=True, max_size=5))
def test_minimize_preserves_closure(abbrs):
    c = dyadic(*abbrs)
    if detect_incoherence(c):
        return
    m, _ = minimize(c)
    assert closure_facts(m) == closure_facts(c)
    assert minimize(m) == (m, [])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(DYADIC), unique=True, max_size=4), st.sampled_from(DYADIC))
def test_closure_monotone(abbrs, extra):
    assert closure_facts(dyadic(*abbrs)) <= closure_facts(dyadic(*dict.fromkeys([*abbrs, extra])))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(DYADIC), unique=True, max_size=4))
def test_coherent_means_small_model(abbrs):
    """No incoherence reported implies a model on a carrier of size <= 3."""
    if detect_incoherence(dyadic(*abbrs)):
        return
    props = [PROP[a] for a in abbrs]
    assert any(all(pair_property(p, r, range(1, n + 1)) for p in props)
               for n in (1, 2, 3) for r in all_relations(n))


# ----------------------------------------------------------------- oracle


def test_certify_asymmetry_implies_irreflexivity():
    cert = oracle_certify(theorem("t", ["dyadic_asymmetry"], ["dyadic_irreflexivity"]))
    assert isinstance(cert, Certificate)
    assert cert.models_checked == 2 ** 1 + 2 ** 4 + 2 ** 9 + 2 ** 16


def test_symmetry_does_not_imply_transitivity():
    cex = oracle_certify(theorem("t", ["dyadic_symmetry"], ["dyadic_transitivity"]))
    assert isinstance(cex, Counterexample)
    assert cex.model == {"carrier": [1, 2], "pairs": [[1, 2], [2, 1]]}


def test_reflexive_euclidean_is_symmetric():
    assert isinstance(oracle_certify(theorem("t", ["dyadic_reflexivity", "dyadic_euclideanity"],
                                             ["dyadic_symmetry"])), Certificate)


def test_unsound_theorem_base_is_rejected():
    bad = '[{"name": "bogus", "kind": "redundancy", "family": "dyadic", "order": 1,' \
          '"premise": [{"tag": "dyadic_symmetry", "args": ["?R"]}],' \
          '"conclusion": [{"tag": "dyadic_transitivity", "args": ["?R"]}]}]'
    with pytest.raises(CertificationFailure):
        load_theorems(bad)


def test_theorem_order_is_total():
    orders = [(t.order, t.name) for t in default_theorems()]
    assert orders == sorted(orders) and len(set(orders)) == len(orders)


# ---------------------------------------------- independent re-derivation


PROP = {
    "refl": "reflexivity", "irrefl": "irreflexivity", "sym": "symmetry", "asym": "asymmetry",
    "trans": "transitivity", "intrans": "intransitivity", "eucl": "euclideanity", "ineucl": "ineuclideanity",
    "equiv": "equivalence", "acyclic": "acyclicity", "conn": "connectivity",
}


def _prop_of(tag: str) -> str:
    return tag.split("_", 1)[1].replace("null_", "")


def _pair_theorem_holds(th: Theorem, worlds) -> bool:
    for rel, carrier in worlds:
        prem = all(pair_property(_prop_of(p.tag), rel, carrier) for p in th.premise)
        if th.contradiction:
            if prem and carrier:
                return False
        elif prem and not all(pair_property(_prop_of(p.tag), rel, carrier) for p in th.conclusion):
            return False
    return True


def _dyadic_worlds():
    for n in (1, 2, 3):
        for r in all_relations(n):
            yield r, range(1, n + 1)


def _hbfp_worlds():
    for n in (1, 2, 3):
        for r in all_relations(n):
            yield r, sorted({x for p in r for x in p})


@pytest.mark.parametrize("th", [t for t in default_theorems() if t.family == "dyadic"], ids=lambda t: t.name)
def test_dyadic_theorems_against_quantifier_oracle(th):
    assert _pair_theorem_holds(th, _dyadic_worlds())


@pytest.mark.parametrize("th", [t for t in default_theorems() if t.family == "hbfp"], ids=lambda t: t.name)
def test_hbfp_theorems_against_quantifier_oracle(th):
    # null-free worlds: every null variant coincides with its plain form
    assert _pair_theorem_holds(th, _hbfp_worlds())


AUTO_PROP = {
    "auto_reflexivity": "reflexivity", "auto_irreflexivity": "irreflexivity",
    "auto_null_reflexivity": "null_reflexivity", "auto_symmetry": "symmetry",
    "auto_null_symmetry": "null_symmetry", "auto_asymmetry": "asymmetry",
    "auto_idempotency": "idempotency", "auto_null_idempotency": "null_idempotency",
    "auto_anti_idempotency": "anti_idempotency", "auto_acyclicity": "acyclicity",
    "auto_canonical_surjectivity": "canonical_surjectivity",
}


@pytest.mark.parametrize("th", [t for t in default_theorems()
                                if t.family == "auto" and t.premise[0].tag in AUTO_PROP], ids=lambda t: t.name)
def test_autofunction_theorems_against_oracle(th):
    for n in (1, 2, 3):
        xs = list(range(1, n + 1))
        for image in itertools.product([None, *xs], repeat=n):
            f = dict(zip(xs, image))
            prem = all(auto_property(AUTO_PROP[p.tag], f) for p in th.premise)
            if th.contradiction:
                assert not prem, f
            elif prem:
                assert all(auto_property(AUTO_PROP[p.tag], f) for p in th.conclusion), f


def _set_holds(tag: str, sets: list[frozenset]) -> bool:
    if tag == "set_inclusion":
        return sets[0] <= sets[1]
    if tag == "set_equality":
        return sets[0] == sets[1]
    if tag == "set_disjointness":
        return all(not (a & b) for a, b in itertools.combinations(sets, 2))
    if tag == "set_union":
        return sets[0] == frozenset().union(*sets[1:])
    if tag == "set_direct_sum":
        return _set_holds("set_union", sets) and _set_holds("set_disjointness", sets[1:])
    raise ValueError(tag)


@pytest.mark.parametrize("th", [t for t in default_theorems() if t.family == "set"], ids=lambda t: t.name)
def test_set_theorems_against_subset_enumeration(th):
    subsets = [frozenset(s) for k in range(4) for s in itertools.combinations((1, 2, 3), k)]
    # a variadic slot *?P stands for two operand sets P.0 and P.1
    slots = []
    for p in th.premise + th.conclusion:
        for a in p.args:
            names = [a[2:] + ".0", a[2:] + ".1"] if a.startswith("*") else [a[1:]]
            slots.extend(n for n in names if n not in slots)
    for combo in itertools.product(subsets, repeat=len(slots)):
        env = dict(zip(slots, combo))

        def args(p):
            out = []
            for a in p.args:
                out.extend([env[a[2:] + ".0"], env[a[2:] + ".1"]] if a.startswith("*") else [env[a[1:]]])
            return out

        if all(_set_holds(p.tag, args(p)) for p in th.premise):
            assert all(_set_holds(p.tag, args(p)) for p in th.conclusion), env


def _map_holds(tag: str, f: dict, g: dict | None, codomain: list[int]) -> bool:
    vals = [v for v in f.values() if v is not None]
    if tag == "map_totality":
        return None not in f.values()
    if tag == "map_one_to_one":
        return len(vals) == len(set(vals))
    if tag == "map_ontoness":
        return set(vals) == set(codomain)
    if tag == "map_bijectivity":
        return _map_holds("map_one_to_one", f, g, codomain) and _map_holds("map_ontoness", f, g, codomain)
    if tag == "fp_existence":
        return all(f[x] is not None for x in f if g[x] is not None)
    if tag == "fp_nonexistence":
        return all(f[x] is None for x in f if g[x] is not None)
    raise ValueError(tag)


@pytest.mark.parametrize("th", [t for t in default_theorems() if t.family == "mapping"
                                and all(p.tag != "map_nonprimeness" for p in t.premise)], ids=lambda t: t.name)
def test_mapping_theorems_against_function_enumeration(th):
    for n, m in itertools.product((1, 2), (1, 2)):
        dom, cod = list(range(1, n + 1)), list(range(1, m + 1))
        space = [dict(zip(dom, img)) for img in itertools.product([None, *cod], repeat=n)]
        for f, g in itertools.product(space, space):
            def ok(p):
                second = {x: x for x in dom} if "@unity" in p.args else g
                return _map_holds(p.tag, f if p.args[0] == "?F" else g, second, cod)
            prem = all(ok(p) for p in th.premise)
            if th.contradiction:
                assert not prem, (f, g)
            elif prem:
                assert all(ok(p) for p in th.conclusion), (f, g)


def test_every_shipped_theorem_certifies():
    for th in default_theorems():
        assert isinstance(oracle_certify(th), Certificate), th.name


def test_randomized_closure_is_sound():
    """Everything closure derives holds on every relation satisfying the declarations."""
    rng = random.Random(7)
    for _ in range(15):
        abbrs = rng.sample(DYADIC, rng.randint(1, 3))
        c = dyadic(*abbrs)
        if detect_incoherence(c):
            continue
        _, derived = closure(c)
        for rel, carrier in _dyadic_worlds():
            if all(pair_property(PROP[a], rel, carrier) for a in abbrs):
                assert all(pair_property(_prop_of(d.ctype), rel, carrier) for d in derived)
