"""Coherence and minimality analysis over a pattern-matching theorem base.

Theorems live in data/theorems.json.  Each one is re-checked by exhaustive
small-model enumeration (`oracle_certify`) unless its cached certificate
hash still matches the entry.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from itertools import combinations, product
from typing import Any, Iterator

import numpy as np

from . import registry
from .errors import CertificationFailure, IncoherentInput, UnsupportedPattern
from .model import Catalog, ConstraintDef, Path, Product
from .resolve import ResolveError, canonical_fact

ORACLE_VERSION = "1"
FAMILIES = ("set", "dyadic", "hbfp", "auto", "mapping", "diagram", "schema")
AUTO_TO_LOCAL = {v: k for k, v in registry.LOCAL_TO_AUTO.items()}


# ------------------------------------------------------------------ theorems


@dataclass(frozen=True)
class Pattern:
    tag: str
    args: tuple[str, ...]

    def to_json(self) -> dict:
        return {"tag": self.tag, "args": list(self.args)}

    def __str__(self) -> str:
        return f"{registry.lookup(self.tag).abbreviation}({', '.join(self.args)})"


@dataclass(frozen=True)
class Theorem:
    name: str
    kind: str  # redundancy | incoherence
    family: str
    premise: tuple[Pattern, ...]
    conclusion: tuple[Pattern, ...] = ()
    order: int = 0
    certificate: str | None = None

    @property
    def contradiction(self) -> bool:
        return self.kind == "incoherence"

    def digest(self) -> str:
        body = {
            "name": self.name,
            "kind": self.kind,
            "family": self.family,
            "premise": [p.to_json() for p in self.premise],
            "conclusion": [p.to_json() for p in self.conclusion],
            "oracle": ORACLE_VERSION,
        }
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "family": self.family,
               "premise": [p.to_json() for p in self.premise]}
        if self.contradiction:
            out["contradiction"] = True
        else:
            out["conclusion"] = [p.to_json() for p in self.conclusion]
        out["order"] = self.order
        out["certificate"] = self.certificate
        return out

    def __str__(self) -> str:
        lhs = " ∧ ".join(str(p) for p in self.premise)
        rhs = "⊥" if self.contradiction else ", ".join(str(p) for p in self.conclusion)
        return f"{self.name}: {lhs} ⇒ {rhs}"


def _theorem_from_json(d: dict) -> Theorem:
    pats = lambda xs: tuple(Pattern(x["tag"], tuple(x["args"])) for x in xs)  # noqa: E731
    kind = d["kind"]
    if kind not in ("redundancy", "incoherence"):
        raise ValueError(f"theorem {d.get('name')}: unknown kind {kind!r}")
    if d["family"] not in FAMILIES:
        raise ValueError(f"theorem {d['name']}: unknown family {d['family']!r}")
    th = Theorem(d["name"], kind, d["family"], pats(d["premise"]),
                 () if kind == "incoherence" else pats(d["conclusion"]),
                 int(d["order"]), d.get("certificate"))
    for p in th.premise + th.conclusion:
        if p.tag not in registry.BY_TAG:
            raise ValueError(f"theorem {th.name}: unknown tag {p.tag!r}")
    return th


def _local_twin(th: Theorem) -> Theorem | None:
    """Autofunction theorems hold verbatim for composed (circular) paths."""
    if th.family != "auto":
        return None
    pats = th.premise + th.conclusion
    if not all(p.tag in AUTO_TO_LOCAL for p in pats):
        return None
    swap = lambda ps: tuple(Pattern(AUTO_TO_LOCAL[p.tag], p.args) for p in ps)  # noqa: E731
    return replace(th, name=th.name + "_local", premise=swap(th.premise),
                   conclusion=swap(th.conclusion), certificate=None)


def load_theorems(text: str | None = None, verify: bool = True) -> tuple[Theorem, ...]:
    """Parse a theorem base (default: the shipped one), certifying stale entries."""
    if text is None:
        text = resources.files("emdm").joinpath("data/theorems.json").read_text(encoding="utf-8")
    base = [_theorem_from_json(d) for d in json.loads(text)]
    names = [t.name for t in base]
    if len(set(names)) != len(names):
        raise ValueError("duplicate theorem names in theorem base")
    if verify:
        for th in base:
            if th.certificate != th.digest():
                result = oracle_certify(th)
                if isinstance(result, Counterexample):
                    raise CertificationFailure(f"{th.name} has a counterexample: {result.model}")
    out = list(base)
    for th in base:
        twin = _local_twin(th)
        if twin is not None:
            out.append(twin)
    out.sort(key=lambda t: (t.order, t.name))
    return tuple(out)


@lru_cache(maxsize=1)
def default_theorems() -> tuple[Theorem, ...]:
    return load_theorems()


def refresh_certificates(text: str) -> str:
    """Certify every entry of a theorem base and return it with fresh hashes."""
    entries = json.loads(text)
    for d in entries:
        th = _theorem_from_json(d)
        result = oracle_certify(th)
        if isinstance(result, Counterexample):
            raise CertificationFailure(f"{th.name} has a counterexample: {result.model}")
        d["certificate"] = th.digest()
    return json.dumps(entries, indent=2, ensure_ascii=False) + "\n"


# -------------------------------------------------------------------- oracle


@dataclass(frozen=True)
class Certificate:
    theorem: str
    family: str
    models_checked: int
    max_carrier: int
    hash: str

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "family": self.family, "models_checked": self.models_checked,
                "max_carrier": self.max_carrier, "hash": self.hash}


@dataclass(frozen=True)
class Counterexample:
    theorem: str
    family: str
    model: dict
    models_checked: int

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "family": self.family, "counterexample": self.model,
                "models_checked": self.models_checked}


def _vars_of(pats) -> list[str]:
    out: list[str] = []
    for p in pats:
        for a in p.args:
            v = a.lstrip("*")
            if a != "@unity" and v not in out:
                out.append(v)
    return out


def _single_var(th: Theorem) -> str:
    vs = _vars_of(th.premise + th.conclusion)
    if len(vs) != 1 or any(len(p.args) != 1 for p in th.premise + th.conclusion):
        raise UnsupportedPattern(f"{th.name}: {th.family} theorems range over one operand slot")
    return vs[0]


# dyadic / HBFP: vectorised over every relation R ⊆ C×C


@lru_cache(maxsize=None)
def relations(n: int) -> np.ndarray:
    """All 2^(n²) relations on {0..n-1}; R[k, i, j] is bit i*n+j of k."""
    masks = np.arange(2 ** (n * n), dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n * n, dtype=np.int64)) & 1
    return bits.astype(bool).reshape(-1, n, n)


def _compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("kij,kjl->kil", a.astype(np.uint8), b.astype(np.uint8)) > 0


@lru_cache(maxsize=None)
def _relation_facts(n: int) -> dict[str, np.ndarray]:
    r = relations(n)
    rt = r.transpose(0, 2, 1)
    eye = np.eye(n, dtype=bool)
    off = ~eye
    rr = _compose(r, r)
    e = _compose(rt, r)
    reach = r.copy()
    for _ in range(n):
        reach = reach | _compose(reach, r)
    diag = r[:, eye]
    active = r.any(axis=2) | r.any(axis=1)
    sym_closure = r | rt
    both_active = active[:, :, None] & active[:, None, :] & off
    f = {
        "reflexivity": diag.all(axis=1),
        "irreflexivity": ~diag.any(axis=1),
        "symmetry": (r == rt).all(axis=(1, 2)),
        "asymmetry": ~(r & rt).any(axis=(1, 2)),
        "transitivity": ~(rr & ~r).any(axis=(1, 2)),
        "intransitivity": ~(rr & r).any(axis=(1, 2)),
        "euclideanity": ~(e & ~r).any(axis=(1, 2)),
        "ineuclideanity": ~(e & r).any(axis=(1, 2)),
        "acyclicity": ~reach[:, eye].any(axis=1),
        "connectivity": (sym_closure | eye).all(axis=(1, 2)),
        "empty": ~r.any(axis=(1, 2)),
        # active-domain readings, for HBFPs
        "ad_reflexivity": (diag | ~active).all(axis=1),
        "ad_connectivity": (sym_closure | ~both_active).all(axis=(1, 2)),
        "diagonal_only": ~(r & off).any(axis=(1, 2)),
    }
    f["equivalence"] = f["reflexivity"] & f["symmetry"] & f["transitivity"]
    f["ad_equivalence"] = f["ad_reflexivity"] & f["symmetry"] & f["transitivity"]
    return f


_HBFP_STRICT = {"symmetry", "transitivity", "euclideanity", "equivalence"}


def _dyadic_vector(tag: str, n: int) -> np.ndarray:
    prop = registry.PAIR_PROPERTY.get(tag)
    if prop is None or not tag.startswith("dyadic_"):
        raise UnsupportedPattern(f"{tag} is not a dyadic relation type")
    return _relation_facts(n)[prop]


def _hbfp_vector(tag: str, n: int, has_null: bool) -> np.ndarray:
    prop = registry.PAIR_PROPERTY.get(tag)
    if prop is None or not tag.startswith("hbfp_"):
        raise UnsupportedPattern(f"{tag} is not an HBFP type")
    f = _relation_facts(n)
    size = len(f["empty"])
    if prop == "null_reflexivity":
        return f["diagonal_only"]
    base = prop[len("null_"):] if prop.startswith("null_") else prop
    if base in ("equivalence", "connectivity"):
        base = "ad_" + base
    vec = f[base]
    if prop in _HBFP_STRICT and has_null:
        return np.zeros(size, dtype=bool)
    return vec


def _pairs_of(n: int, k: int) -> list[list[int]]:
    r = relations(n)[k]
    return [[i + 1, j + 1] for i in range(n) for j in range(n) if r[i, j]]


def _relation_worlds(family: str, max_carrier: int) -> Iterator[tuple[int, bool]]:
    for n in range(1, max_carrier + 1):
        if family == "dyadic":
            yield n, False
        else:
            yield n, False
            yield n, True


def _certify_relational(th: Theorem, max_carrier: int):
    _single_var(th)
    checked = 0
    for n, has_null in _relation_worlds(th.family, max_carrier):
        vec = (lambda t: _dyadic_vector(t, n)) if th.family == "dyadic" else \
            (lambda t: _hbfp_vector(t, n, has_null))
        size = 2 ** (n * n)
        prem = np.ones(size, dtype=bool)
        for p in th.premise:
            prem &= vec(p.tag)
        if th.contradiction:
            nonempty = np.ones(size, dtype=bool) if th.family == "dyadic" or has_null \
                else ~_relation_facts(n)["empty"]
            bad = prem & nonempty
        else:
            concl = np.ones(size, dtype=bool)
            for p in th.conclusion:
                concl &= vec(p.tag)
            bad = prem & ~concl
        hits = np.flatnonzero(bad)
        if hits.size:
            k = int(hits[0])
            model = {"carrier": list(range(1, n + 1)), "pairs": _pairs_of(n, k)}
            if th.family == "hbfp":
                model["null_rows"] = has_null
            return checked + k + 1, model
        checked += size
    return checked, None


# autofunctions: every partial function f: A -> A (null = n)


def auto_holds(prop: str, f: tuple[int, ...]) -> bool:
    """Autofunction property of partial f on {0..n-1}; f[x] == n means null."""
    n = len(f)

    def ap(x):
        return None if x is None or f[x] == n else f[x]

    xs = range(n)
    if prop == "reflexivity":
        return all(ap(x) == x for x in xs)
    if prop == "irreflexivity":
        return all(ap(x) != x for x in xs)
    if prop == "null_reflexivity":
        return all(ap(x) in (None, x) for x in xs)
    if prop == "symmetry":
        return all(ap(x) is not None and ap(ap(x)) == x for x in xs)
    if prop == "asymmetry":
        return not any(ap(x) is not None and ap(ap(x)) == x for x in xs)
    if prop == "null_symmetry":
        return all(ap(x) is None or ap(ap(x)) == x for x in xs)
    if prop == "idempotency":
        return all(ap(x) is not None and ap(ap(x)) == ap(x) for x in xs)
    if prop == "anti_idempotency":
        return not any(ap(x) is not None and ap(ap(x)) == ap(x) for x in xs)
    if prop == "null_idempotency":
        return all(ap(x) is None or ap(ap(x)) == ap(x) for x in xs)
    if prop == "acyclicity":
        for x in xs:
            y = ap(x)
            for _ in range(n):
                if y is None:
                    break
                if y == x:
                    return False
                y = ap(y)
        return True
    if prop == "canonical_surjectivity":
        return {ap(x) for x in xs} >= set(xs)
    raise UnsupportedPattern(f"unknown autofunction property {prop!r}")


def _auto_prop(tag: str) -> str:
    tag = registry.LOCAL_TO_AUTO.get(tag, tag)
    if not tag.startswith("auto_"):
        raise UnsupportedPattern(f"{tag} is not an autofunction type")
    return tag[len("auto_"):]


def _certify_auto(th: Theorem, max_carrier: int):
    _single_var(th)
    checked = 0
    for n in range(1, max_carrier + 1):
        for f in product(range(n + 1), repeat=n):
            checked += 1
            prem = all(auto_holds(_auto_prop(p.tag), f) for p in th.premise)
            ok = (not prem) if th.contradiction else \
                (not prem or all(auto_holds(_auto_prop(p.tag), f) for p in th.conclusion))
            if not ok:
                return checked, {"carrier": list(range(1, n + 1)),
                                 "f": [[x + 1, None if f[x] == n else f[x] + 1] for x in range(n)]}
    return checked, None


# general sets: subsets of a small universe


def _expand_star(th: Theorem, k: int) -> list[Pattern]:
    out = []
    for p in th.premise + th.conclusion:
        args: list[str] = []
        for a in p.args:
            if a.startswith("*"):
                args.extend(f"{a[1:]}#{i}" for i in range(k))
            else:
                args.append(a)
        out.append(Pattern(p.tag, tuple(args)))
    return out


def _set_holds(tag: str, sets: list[frozenset]) -> bool:
    if tag == "set_inclusion":
        return sets[0] <= sets[1]
    if tag == "set_equality":
        return sets[0] == sets[1]
    disjoint = lambda xs: all(not (a & b) for a, b in combinations(xs, 2))  # noqa: E731
    if tag == "set_disjointness":
        return disjoint(sets)
    if tag in ("set_union", "set_direct_sum"):
        union = frozenset().union(*sets[1:])
        return sets[0] == union and (tag == "set_union" or disjoint(sets[1:]))
    raise UnsupportedPattern(f"{tag} is not a general set type")


def _certify_sets(th: Theorem, max_carrier: int):
    checked = 0
    has_star = any(a.startswith("*") for p in th.premise + th.conclusion for a in p.args)
    for k in ((2, 3) if has_star else (0,)):
        pats = _expand_star(th, k)
        npre = len(th.premise)
        names = _vars_of(pats)
        for u in range(1, min(max_carrier, 3) + 1):
            subsets = [frozenset(i + 1 for i in range(u) if m >> i & 1) for m in range(2 ** u)]
            for choice in product(subsets, repeat=len(names)):
                checked += 1
                env = dict(zip(names, choice))
                truth = [_set_holds(p.tag, [env[a] for a in p.args]) for p in pats]
                prem = all(truth[:npre])
                ok = (not prem) if th.contradiction else (not prem or all(truth[npre:]))
                if not ok:
                    return checked, {"universe": list(range(1, u + 1)),
                                     "sets": {v: sorted(env[v]) for v in names}}
    return checked, None


# general mappings and function products: partial functions rows -> values

_UNITY = "@unity"


def _mapping_holds(tag: str, fs: list, m: int) -> bool:
    n = len(fs[0]) if fs[0] != _UNITY else None

    def val(f, x):
        return x if f == _UNITY else (None if f[x] == m else f[x])

    rows = range(n if n is not None else len(fs[1]))
    f = fs[0]
    if tag == "map_totality":
        return all(val(f, x) is not None for x in rows)
    vals = [val(f, x) for x in rows if val(f, x) is not None]
    if tag == "map_one_to_one":
        return len(vals) == len(set(vals))
    if tag == "map_ontoness":
        return set(vals) == set(range(m))
    if tag == "map_bijectivity":
        return len(vals) == len(set(vals)) and set(vals) == set(range(m))
    if tag in ("fp_existence", "fp_nonexistence"):
        want_null = tag == "fp_nonexistence"
        for x in rows:
            if all(val(g, x) is not None for g in fs[1:]):
                if (val(f, x) is None) != want_null:
                    return False
        return True
    raise UnsupportedPattern(f"{tag} is not supported by the mapping oracle")


def _certify_mappings(th: Theorem, max_carrier: int):
    pats = list(th.premise + th.conclusion)
    if any(a.startswith("*") for p in pats for a in p.args):
        raise UnsupportedPattern(f"{th.name}: variadic mapping patterns are not supported")
    names = _vars_of(pats)
    npre = len(th.premise)
    checked = 0
    cap = min(max_carrier, 3)
    for n in range(1, cap + 1):
        for m in range(1, cap + 1):
            funcs = list(product(range(m + 1), repeat=n))
            for choice in product(funcs, repeat=len(names)):
                checked += 1
                env = dict(zip(names, choice))
                env[_UNITY] = _UNITY
                truth = [_mapping_holds(p.tag, [env[a] for a in p.args], m) for p in pats]
                prem = all(truth[:npre])
                ok = (not prem) if th.contradiction else (not prem or all(truth[npre:]))
                if not ok:
                    show = {v: [None if y == m else y + 1 for y in env[v]] for v in names}
                    return checked, {"rows": n, "codomain": list(range(1, m + 1)), "mappings": show}
    return checked, None


# function diagrams: two partial paths p, q from a common source


def _certify_diagram(th: Theorem, max_carrier: int):
    _single_var(th)
    checked = 0
    cap = min(max_carrier, 3)
    for n in range(1, cap + 1):
        for m in range(1, cap + 1):
            funcs = list(product(range(m + 1), repeat=n))
            for p, q in product(funcs, repeat=2):
                checked += 1
                same = [p[x] == q[x] for x in range(n)]  # index m is null on both sides

                def holds(tag):
                    if tag == "fd_commutativity":
                        return all(same)
                    if tag == "fd_anti_commutativity":
                        return not any(same)
                    raise UnsupportedPattern(f"{tag} is not supported by the diagram oracle")

                prem = all(holds(x.tag) for x in th.premise)
                ok = (not prem) if th.contradiction else (not prem or all(holds(x.tag) for x in th.conclusion))
                if not ok:
                    show = lambda f: [None if y == m else y + 1 for y in f]  # noqa: E731
                    return checked, {"rows": n, "p": show(p), "q": show(q)}
    return checked, None


# schema-level types: instantiate on a tiny catalog and run the validator


def _certify_schema(th: Theorem, max_carrier: int):
    from .model import InstanceDB, MappingDef, SetDef, add_mapping, add_set, new_catalog
    from .validator import check_definition

    if not th.contradiction:
        raise UnsupportedPattern(f"{th.name}: schema family only certifies incoherences")
    names = _vars_of(th.premise)
    cat = add_set(add_set(new_catalog("oracle"), SetDef("A", "Entity")), SetDef("B", "Entity"))
    for v in names:
        cat = add_mapping(cat, MappingDef(v.lstrip("?").lower() or "f", "StructuralFunction", "A", "B"))
    defs = []
    for i, p in enumerate(th.premise):
        ops = tuple(Path((a.lstrip("?").lower(),)) for a in p.args)
        defs.append(ConstraintDef(f"c{i}", p.tag, ops))
    cat = replace(cat, constraints=tuple(defs))
    schema_level = [v for c in defs for v in check_definition(cat, InstanceDB(), c) if not v.witness]
    if not schema_level:
        return 1, {"catalog": "A, B entities; " + ", ".join(str(d) for d in defs)}
    return 1, None


_CERTIFIERS = {
    "dyadic": _certify_relational,
    "hbfp": _certify_relational,
    "auto": _certify_auto,
    "set": _certify_sets,
    "mapping": _certify_mappings,
    "diagram": _certify_diagram,
    "schema": _certify_schema,
}


def oracle_certify(theorem: Theorem | str, max_carrier: int = 4) -> Certificate | Counterexample:
    """Exhaustively check `theorem` on every model up to `max_carrier` elements.

    Relations are enumerated by carrier size, then by bitmask (bit i*n+j
    encodes the pair (i, j)), so the counterexample returned is the first
    in that order.
    """
    if isinstance(theorem, str):
        found = [t for t in default_theorems() if t.name == theorem]
        if not found:
            raise UnsupportedPattern(f"no theorem named {theorem!r}")
        theorem = found[0]
    certifier = _CERTIFIERS.get(theorem.family)
    if certifier is None:
        raise UnsupportedPattern(f"no oracle for family {theorem.family!r}")
    checked, model = certifier(theorem, max_carrier)
    if model is not None:
        return Counterexample(theorem.name, theorem.family, model, checked)
    return Certificate(theorem.name, theorem.family, checked, max_carrier, theorem.digest())


# ---------------------------------------------------------- slot satisfiability


def _slot_family(tag: str) -> str | None:
    sub = registry.lookup(tag).subcategory
    if sub == "dyadic relation":
        return "dyadic"
    if sub == "homogeneous binary function product":
        return "hbfp"
    if sub == "autofunction" or tag in registry.LOCAL_TO_AUTO:
        return "auto"
    return None


def slot_models(family: str, tags: frozenset[str], max_carrier: int = 4) -> tuple[bool, bool]:
    """(has a non-empty model, has a model with a non-empty relation)."""
    if family in ("dyadic", "hbfp"):
        nonempty = False
        proper = False
        for n, has_null in _relation_worlds(family, max_carrier):
            sat = np.ones(2 ** (n * n), dtype=bool)
            for t in tags:
                sat &= _dyadic_vector(t, n) if family == "dyadic" else _hbfp_vector(t, n, has_null)
            rel = sat & ~_relation_facts(n)["empty"]
            proper |= bool(rel.any())
            nonempty |= bool(rel.any()) or (bool(sat.any()) and (family == "dyadic" or has_null))
        return nonempty, proper
    if family == "auto":
        for n in range(1, max_carrier + 1):
            for f in product(range(n + 1), repeat=n):
                if all(auto_holds(_auto_prop(t), f) for t in tags):
                    return True, True
        return False, False
    raise UnsupportedPattern(family)


# ------------------------------------------------------------------ closure


@dataclass(frozen=True)
class Fact:
    key: tuple
    cdef: ConstraintDef
    sources: frozenset[str]
    theorem: str | None = None


def _canon(catalog: Catalog, c: ConstraintDef) -> tuple | None:
    try:
        key = canonical_fact(catalog, c)
    except ResolveError:
        return None
    if any(comp[0] == "raw" for comp in key[1]):
        return None
    return key


def _unify(args: tuple[str, ...], comps: tuple, binding: dict) -> dict | None:
    b = dict(binding)
    i = 0
    for a in args:
        if a.startswith("*"):
            rest = tuple(comps[i:])
            if not rest or b.get(a[1:], rest) != rest:
                return None
            b[a[1:]] = rest
            i = len(comps)
            continue
        if i >= len(comps):
            return None
        c = comps[i]
        i += 1
        if a == _UNITY:
            if not (c[0] == "map" and c[2] == "id"):
                return None
            continue
        if a in b and b[a] != c:
            return None
        b[a] = c
    return b if i == len(comps) else None


def _matches(premises, index, binding=None) -> Iterator[tuple[dict, list[Fact]]]:
    binding = binding or {}
    if not premises:
        yield binding, []
        return
    head, rest = premises[0], premises[1:]
    for fact in index.get(head.tag, ()):
        b = _unify(head.args, fact.key[1], binding)
        if b is None:
            continue
        for b2, used in _matches(rest, index, b):
            if fact not in used:
                yield b2, [fact] + used


def _operands(comps: list) -> tuple:
    out: list = []
    for comp in comps:
        kind = comp[0]
        if kind == "set":
            out.append(Path((comp[1],)))
        elif kind == "map":
            out.append(Path((comp[2],), comp[1]))
        elif kind == "slot":
            fam, key = comp[1], comp[2]
            if fam == "dyadic":
                out.append(Path((key,)))
            elif fam == "path":
                out.append(Path(tuple(key[1:]), key[0]))
            elif fam in ("hbfp", "key"):
                out.append(Product(tuple(Path((n,), key[0]) for n in key[1:])))
            elif fam == "diagram":
                out.extend(Path(tuple(k[1:]), k[0]) for k in key)
            else:
                raise UnsupportedPattern(f"cannot rebuild operand for slot {fam!r}")
        else:
            raise UnsupportedPattern(f"cannot rebuild operand {comp!r}")
    return tuple(out)


def _instantiate(p: Pattern, binding: dict, unity_domain: str | None) -> tuple:
    comps: list = []
    for a in p.args:
        if a == _UNITY:
            comps.append(("map", unity_domain, "id"))
        elif a.startswith("*"):
            comps.extend(binding[a[1:]])
        else:
            comps.append(binding[a])
    return _operands(comps)


class _Closure:
    def __init__(self, catalog: Catalog, theorems: tuple[Theorem, ...]):
        self.catalog = catalog
        self.theorems = theorems
        self.facts: dict[tuple, Fact] = {}
        self.derived: list[ConstraintDef] = []
        self.order = {c.name: i for i, c in enumerate(catalog.constraints)}
        used_names = {c.name for c in catalog.constraints}
        for c in catalog.constraints:
            key = _canon(catalog, c)
            if key is not None and key not in self.facts:
                srcs = frozenset([c.name]) if c.origin == "declared" else frozenset()
                self.facts[key] = Fact(key, c, srcs, c.theorem)
        self.used_names = used_names
        self._run()

    def _index(self) -> dict[str, list[Fact]]:
        idx: dict[str, list[Fact]] = {}
        for f in self.facts.values():
            idx.setdefault(f.key[0], []).append(f)
        return idx

    def _fresh_name(self, ctype: str, operands: tuple) -> str:
        from .dsl import auto_name

        base = auto_name(ctype, operands)
        name, k = base, 2
        while name in self.used_names:
            name, k = f"{base}_{k}", k + 1
        self.used_names.add(name)
        return name

    def _run(self) -> None:
        rules = [t for t in self.theorems if not t.contradiction]
        changed = True
        while changed:
            changed = False
            for th in rules:
                for binding, used in list(_matches(th.premise, self._index())):
                    unity_dom = next((f.key[1][0][1] for f in used if f.key[1] and f.key[1][0][0] == "map"), None)
                    for concl in th.conclusion:
                        ops = _instantiate(concl, binding, unity_dom)
                        probe = ConstraintDef("probe", concl.tag, ops, "derived", th.name)
                        key = _canon(self.catalog, probe)
                        if key is None or key in self.facts:
                            continue
                        cdef = replace(probe, name=self._fresh_name(concl.tag, ops))
                        srcs = frozenset().union(*(f.sources for f in used))
                        self.facts[key] = Fact(key, cdef, srcs, th.name)
                        self.derived.append(cdef)
                        changed = True

    def names(self, facts) -> tuple[str, ...]:
        srcs = set().union(*(f.sources for f in facts))
        return tuple(sorted(srcs, key=lambda n: self.order.get(n, len(self.order))))


def closure(catalog: Catalog, theorems: tuple[Theorem, ...] | None = None) -> tuple[Catalog, list[ConstraintDef]]:
    """Fixpoint of the derivation theorems; derived constraints are appended."""
    cl = _Closure(catalog, theorems if theorems is not None else default_theorems())
    return replace(catalog, constraints=catalog.constraints + tuple(cl.derived)), list(cl.derived)


def closure_facts(catalog: Catalog, theorems: tuple[Theorem, ...] | None = None) -> frozenset[tuple]:
    """Canonical keys of everything the closure contains (names ignored)."""
    return frozenset(_Closure(catalog, theorems if theorems is not None else default_theorems()).facts)


# -------------------------------------------------------------- incoherence


@dataclass(frozen=True)
class Incoherence:
    theorem: str
    constraints: tuple[str, ...]
    explanation: str = ""

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "constraints": list(self.constraints),
                "explanation": self.explanation}


@dataclass(frozen=True)
class AnalysisWarning:
    constraints: tuple[str, ...]
    message: str

    def to_json(self) -> dict:
        return {"constraints": list(self.constraints), "message": self.message}


@dataclass(frozen=True)
class Redundancy:
    theorem: str
    constraint: str

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "constraint": self.constraint}


def _slot_groups(cl: _Closure) -> dict[tuple, tuple[str, list[Fact]]]:
    groups: dict[tuple, tuple[str, list[Fact]]] = {}
    for f in cl.facts.values():
        fam = _slot_family(f.key[0])
        if fam is None or len(f.key[1]) != 1:
            continue
        groups.setdefault((fam, f.key[1][0]), (fam, []))[1].append(f)
    return groups


def _incoherences(cl: _Closure) -> tuple[list[Incoherence], list[AnalysisWarning]]:
    # one report per clash of declared constraints: the theorem that needs the
    # fewest derived premises names it (ties go to apply order)
    best: dict[tuple[str, ...], tuple[int, int, Incoherence]] = {}
    contradictions = [t for t in cl.theorems if t.contradiction]
    for order, th in enumerate(contradictions):
        for _, used in _matches(th.premise, cl._index()):
            names = cl.names(used)
            rank = (sum(f.cdef.origin == "derived" for f in used), order)
            if names not in best or rank < best[names][:2]:
                best[names] = (*rank, Incoherence(th.name, names, str(th)))
    found = [inc for *_, inc in sorted(best.values(), key=lambda b: (b[1], b[2].constraints))]
    covered = {n for inc in found for n in inc.constraints}
    warnings: list[AnalysisWarning] = []
    for (fam, comp), (_, facts) in _slot_groups(cl).items():
        tags = frozenset(f.key[0] for f in facts)
        nonempty, proper = slot_models(fam, tags)
        names = cl.names(facts)
        label = ", ".join(sorted(registry.lookup(t).abbreviation for t in tags))
        if not nonempty:
            if not set(names) & covered:
                found.append(Incoherence("oracle", names, f"{{{label}}} has no model on carriers of size 1-4"))
        elif not proper and fam in ("dyadic", "hbfp"):
            warnings.append(AnalysisWarning(
                names, f"{{{label}}} is satisfiable only by the empty relation"))
    warnings.sort(key=lambda w: (w.constraints, w.message))
    return found, warnings


def detect_incoherence(catalog: Catalog, theorems: tuple[Theorem, ...] | None = None) -> list[Incoherence]:
    """Incoherent combinations in the closure, named by declared constraints."""
    cl = _Closure(catalog, theorems if theorems is not None else default_theorems())
    return _incoherences(cl)[0]


def analysis_warnings(catalog: Catalog, theorems: tuple[Theorem, ...] | None = None) -> list[AnalysisWarning]:
    cl = _Closure(catalog, theorems if theorems is not None else default_theorems())
    return _incoherences(cl)[1]


# ------------------------------------------------------------- redundancy


def _implied_by_others(catalog: Catalog, c: ConstraintDef, theorems) -> str | None:
    key = _canon(catalog, c)
    if key is None:
        return None
    others = replace(catalog, constraints=tuple(x for x in catalog.constraints if x.name != c.name))
    cl = _Closure(others, theorems)
    fact = cl.facts.get(key)
    if fact is None:
        return None
    if fact.theorem is None or fact.cdef.origin == "declared":
        return f"duplicate of {fact.cdef.name}"
    return fact.theorem


def redundancies(catalog: Catalog, theorems: tuple[Theorem, ...] | None = None) -> list[Redundancy]:
    """Every declared constraint implied by the closure of the others."""
    theorems = theorems if theorems is not None else default_theorems()
    out = []
    for c in catalog.constraints:
        if c.origin != "declared":
            continue
        th = _implied_by_others(catalog, c, theorems)
        if th is not None:
            out.append(Redundancy(th, c.name))
    return out


def minimize(catalog: Catalog, theorems: tuple[Theorem, ...] | None = None) -> tuple[Catalog, list[Redundancy]]:
    """Drop the first redundant declared constraint, repeatedly, to a fixpoint."""
    theorems = theorems if theorems is not None else default_theorems()
    incs = detect_incoherence(catalog, theorems)
    if incs:
        raise IncoherentInput(incs)
    removed: list[Redundancy] = []
    current = catalog
    while True:
        for c in current.constraints:
            th = _implied_by_others(current, c, theorems)
            if th is not None:
                removed.append(Redundancy(th, c.name))
                current = replace(current, constraints=tuple(x for x in current.constraints if x.name != c.name))
                break
        else:
            return current, removed


# ------------------------------------------------------------------ report


@dataclass
class AnalysisReport:
    derived: list[ConstraintDef] = field(default_factory=list)
    incoherences: list[Incoherence] = field(default_factory=list)
    redundancies: list[Redundancy] = field(default_factory=list)
    warnings: list[AnalysisWarning] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.incoherences and not self.redundancies

    def to_json(self) -> dict:
        from .dsl import constraint_text

        return {
            "derived": [{"name": c.name, "ctype": c.ctype, "text": constraint_text(c), "theorem": c.theorem}
                        for c in self.derived],
            "incoherences": [i.to_json() for i in self.incoherences],
            "redundancies": [r.to_json() for r in self.redundancies],
            "warnings": [w.to_json() for w in self.warnings],
        }


def analyze(catalog: Catalog, theorems: tuple[Theorem, ...] | None = None) -> AnalysisReport:
    theorems = theorems if theorems is not None else default_theorems()
    cl = _Closure(catalog, theorems)
    incs, warns = _incoherences(cl)
    return AnalysisReport(list(cl.derived), incs, redundancies(catalog, theorems), warns)


def theorem_rows(theorems: tuple[Theorem, ...] | None = None) -> list[dict[str, Any]]:
    return [t.to_json() for t in (theorems if theorems is not None else default_theorems())]
