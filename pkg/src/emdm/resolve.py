"""Name resolution for constraint operands.

Turns the syntactic operands of a ConstraintDef into typed records (which
sets, which mappings, which paths) and exposes the canonical keys the
analysis module matches theorems against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

from . import registry
from .model import (
    OBJECT_KINDS,
    UNITY,
    Catalog,
    ConstraintDef,
    Const,
    HornClause,
    Path,
    Product,
)


class ResolveError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


@dataclass(frozen=True)
class MappingInfo:
    domain: str
    name: str
    codomain: str
    kind: str  # attr | fn | sys | comp | role | unity

    @property
    def label(self) -> str:
        return f"{self.domain}::{self.name}"


@dataclass(frozen=True)
class ResolvedPath:
    source: str
    steps: tuple[MappingInfo, ...]

    @property
    def target(self) -> str:
        return self.steps[-1].codomain

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.steps)

    def __str__(self) -> str:
        return ".".join(self.names)


@dataclass(frozen=True)
class SetsOp:
    sets: tuple[str, ...]


@dataclass(frozen=True)
class DyadicOp:
    rel: str
    left: str
    right: str
    carrier: str


@dataclass(frozen=True)
class MappingOp:
    mapping: MappingInfo


@dataclass(frozen=True)
class AutoOp:
    path: ResolvedPath

    @property
    def carrier(self) -> str:
        return self.path.source


@dataclass(frozen=True)
class HbfpOp:
    source: str
    f: MappingInfo
    g: MappingInfo


@dataclass(frozen=True)
class KeyOp:
    source: str
    items: tuple[MappingInfo, ...]


@dataclass(frozen=True)
class ExistsOp:
    source: str
    f: MappingInfo
    givens: tuple[MappingInfo, ...]


@dataclass(frozen=True)
class DiagramOp:
    p: ResolvedPath
    q: ResolvedPath


@dataclass(frozen=True)
class ResolvedLiteral:
    positive: bool
    left: Union[ResolvedPath, Const]
    op: str
    right: Union[ResolvedPath, Const]


@dataclass(frozen=True)
class ClauseOp:
    anchor: str
    literals: tuple[ResolvedLiteral, ...]


# ------------------------------------------------------------------ lookups


def mapping_infos(catalog: Catalog, set_name: str) -> list[MappingInfo]:
    """Every mapping usable from `set_name`: roles, declared mappings, unity."""
    try:
        sdef = catalog.lookup_set(set_name)
    except Exception:
        return []
    out = [MappingInfo(set_name, r, t, "role") for r, t in sdef.rel_sorts]
    kinds = {"Attribute": "attr", "StructuralFunction": "fn", "System": "sys", "Computed": "comp"}
    out.extend(
        MappingInfo(m.domain, m.name, m.codomain, kinds.get(m.kind, "comp"))
        for m in catalog.mappings_of(set_name)
    )
    if sdef.kind in OBJECT_KINDS:
        out.append(MappingInfo(set_name, UNITY, set_name, "unity"))
    return out


def _find(catalog: Catalog, set_name: str, name: str) -> MappingInfo | None:
    for info in mapping_infos(catalog, set_name):
        if info.name == name:
            return info
    return None


def candidates(catalog: Catalog, name: str) -> list[MappingInfo]:
    out = []
    for s in catalog.sets:
        info = _find(catalog, s.name, name)
        if info is not None:
            out.append(info)
    return out


def is_object_set(catalog: Catalog, name: str) -> bool:
    return catalog.has_set(name) and catalog.lookup_set(name).is_object


def resolve_path(catalog: Catalog, path: Path, source: str | None = None) -> ResolvedPath:
    if not path.steps:
        raise ResolveError("ArityMismatch", "empty path")
    if path.qualifier is not None:
        if not catalog.has_set(path.qualifier):
            raise ResolveError("UnknownReference", f"unknown set {path.qualifier!r}")
        source = path.qualifier
    first = path.steps[0]
    if source is not None:
        info = _find(catalog, source, first)
        if info is None:
            raise ResolveError("UnknownReference", f"no mapping {first!r} on {source}")
    else:
        found = candidates(catalog, first)
        if not found:
            raise ResolveError("UnknownReference", f"unknown mapping {first!r}")
        if len(found) > 1:
            where = ", ".join(i.domain for i in found)
            raise ResolveError(
                "AmbiguousReference", f"mapping {first!r} exists on {where}; qualify it"
            )
        info = found[0]
    steps = [info]
    for name in path.steps[1:]:
        prev = steps[-1]
        if not is_object_set(catalog, prev.codomain):
            raise ResolveError(
                "KindMismatch", f"cannot compose after {prev.name}: {prev.codomain} is a value set"
            )
        nxt = _find(catalog, prev.codomain, name)
        if nxt is None:
            raise ResolveError("UnknownReference", f"no mapping {name!r} on {prev.codomain}")
        steps.append(nxt)
    return ResolvedPath(steps[0].domain, tuple(steps))


def common_source(catalog: Catalog, paths: list[Path]) -> str:
    """The unique set every path's first step can start from."""
    fixed = {p.qualifier for p in paths if p.qualifier is not None}
    if len(fixed) > 1:
        raise ResolveError("KindMismatch", "operands are qualified with different sets")
    pool: set[str] | None = set(fixed) if fixed else None
    for p in paths:
        if not p.steps:
            raise ResolveError("ArityMismatch", "empty path")
        if p.steps[0] == UNITY:
            continue
        doms = {i.domain for i in candidates(catalog, p.steps[0])}
        if not doms:
            raise ResolveError("UnknownReference", f"unknown mapping {p.steps[0]!r}")
        pool = doms if pool is None else pool & doms
    if pool is None:
        raise ResolveError("AmbiguousReference", "cannot infer the domain of unity-only operands")
    if not pool:
        raise ResolveError("KindMismatch", "operands share no common domain")
    if len(pool) > 1:
        raise ResolveError(
            "AmbiguousReference", f"operands fit several domains ({', '.join(sorted(pool))}); qualify one"
        )
    return next(iter(pool))


# --------------------------------------------------------------- resolution

_SHAPES = {
    "general set": "sets",
    "dyadic relation": "dyadic",
    "general mapping": "mapping",
    "autofunction": "auto",
    "homogeneous binary function product": "hbfp",
}


def _need(cond: bool, code: str, message: str) -> None:
    if not cond:
        raise ResolveError(code, message)


def _paths(operands, what: str) -> list[Path]:
    for o in operands:
        _need(isinstance(o, Path), "KindMismatch", f"{what} operands must be mapping paths")
    return list(operands)


def _single_steps(paths: list[Path], what: str) -> None:
    for p in paths:
        _need(len(p.steps) == 1, "KindMismatch", f"{what} operands must be single mappings, got {p}")


def _finite_codomain(catalog: Catalog, info: MappingInfo) -> bool:
    if is_object_set(catalog, info.codomain):
        return True
    spec = catalog.value_spec(info.codomain)
    return spec is not None and (spec.enumeration is not None or spec.base == "Boolean")


def resolve_constraint(catalog: Catalog, cdef: ConstraintDef) -> Any:
    """Typed operand record for `cdef`; raises ResolveError on any defect."""
    if cdef.ctype not in registry.BY_TAG:
        raise ResolveError("UnknownReference", f"unknown constraint type {cdef.ctype!r}")
    info = registry.lookup(cdef.ctype)
    ops = cdef.operands
    tag = cdef.ctype
    sub = info.subcategory

    if sub == "general set":
        paths = _paths(ops, "set constraint")
        _need(all(p.is_name for p in paths), "KindMismatch", "set operands must be set names")
        names = tuple(p.steps[0] for p in paths)
        lo = {"set_inclusion": 2, "set_equality": 2, "set_disjointness": 2}.get(tag, 3)
        hi = 2 if tag in ("set_inclusion", "set_equality") else None
        _need(len(names) >= lo and (hi is None or len(names) <= hi),
              "ArityMismatch", f"{info.abbreviation} takes {lo}{'' if hi else '+'} sets, got {len(names)}")
        for n in names:
            _need(catalog.has_set(n), "UnknownReference", f"unknown set {n!r}")
            _need(is_object_set(catalog, n), "KindMismatch", f"{n} is not an object set")
        return SetsOp(names)

    if sub == "dyadic relation":
        _need(len(ops) == 1, "ArityMismatch", "dyadic constraints take one relationship set")
        p = ops[0]
        _need(isinstance(p, Path) and p.is_name, "KindMismatch", "dyadic operand must be a set name")
        name = p.steps[0]
        _need(catalog.has_set(name), "UnknownReference", f"unknown set {name!r}")
        sdef = catalog.lookup_set(name)
        _need(sdef.kind == "Relationship" and len(sdef.rel_sorts) == 2,
              "KindMismatch", f"{name} is not a binary relationship set")
        (r1, t1), (r2, t2) = sdef.rel_sorts
        _need(t1 == t2, "KindMismatch", f"{name} roles target different sets ({t1}, {t2})")
        return DyadicOp(name, r1, r2, t1)

    if sub == "general mapping":
        _need(len(ops) == 1, "ArityMismatch", f"{info.abbreviation} takes one mapping")
        paths = _paths(ops, info.abbreviation)
        _single_steps(paths, info.abbreviation)
        rp = resolve_path(catalog, paths[0])
        m = rp.steps[0]
        _need(m.kind != "unity", "KindMismatch", "the unity mapping cannot be constrained")
        if tag in ("map_ontoness", "map_bijectivity"):
            _need(_finite_codomain(catalog, m), "KindMismatch",
                  f"{m.name}: ontoness needs an object set or enumerated codomain")
        return MappingOp(m)

    if sub == "autofunction":
        _need(len(ops) == 1, "ArityMismatch", f"{info.abbreviation} takes one autofunction")
        paths = _paths(ops, info.abbreviation)
        _single_steps(paths, info.abbreviation)
        rp = resolve_path(catalog, paths[0])
        _need(rp.steps[0].kind != "unity", "KindMismatch", "the unity mapping cannot be constrained")
        _need(rp.target == rp.source and is_object_set(catalog, rp.source),
              "KindMismatch", f"{rp} is not an autofunction ({rp.source} -> {rp.target})")
        return AutoOp(rp)

    if sub == "homogeneous binary function product":
        _need(len(ops) == 1 and isinstance(ops[0], Product), "KindMismatch",
              "HBFP constraints take one product (f, g)")
        items = list(ops[0].items)
        _need(len(items) == 2, "ArityMismatch", "HBFP products have exactly two factors")
        _single_steps(items, "HBFP")
        src = common_source(catalog, items)
        f = resolve_path(catalog, items[0], src).steps[0]
        g = resolve_path(catalog, items[1], src).steps[0]
        _need(f.codomain == g.codomain, "KindMismatch",
              f"HBFP factors have different codomains ({f.codomain}, {g.codomain})")
        return HbfpOp(src, f, g)

    if tag == "fp_key":
        items = list(ops[0].items) if len(ops) == 1 and isinstance(ops[0], Product) else _paths(ops, "key")
        _need(len(items) >= 1, "ArityMismatch", "keys need at least one mapping")
        _single_steps(items, "key")
        src = common_source(catalog, items)
        infos = tuple(resolve_path(catalog, p, src).steps[0] for p in items)
        _need(all(i.kind != "unity" for i in infos), "KindMismatch", "unity cannot be part of a key")
        _need(len({i.name for i in infos}) == len(infos), "KindMismatch", "repeated key component")
        return KeyOp(src, infos)

    if tag in ("fp_existence", "fp_nonexistence"):
        paths = _paths(ops, info.abbreviation)
        _need(len(paths) >= 2, "ArityMismatch", f"{info.abbreviation}(f, g, ...) needs f and at least one g")
        _single_steps(paths, info.abbreviation)
        src = common_source(catalog, paths)
        infos = [resolve_path(catalog, p, src).steps[0] for p in paths]
        _need(infos[0].kind != "unity", "KindMismatch", "the constrained mapping cannot be unity")
        return ExistsOp(src, infos[0], tuple(infos[1:]))

    if tag in ("fd_commutativity", "fd_anti_commutativity"):
        paths = _paths(ops, info.abbreviation)
        _need(len(paths) == 2, "ArityMismatch", f"{info.abbreviation} takes two paths")
        src = common_source(catalog, paths)
        p = resolve_path(catalog, paths[0], src)
        q = resolve_path(catalog, paths[1], src)
        _need(p.target == q.target, "KindMismatch",
              f"paths {p} and {q} end in different sets ({p.target}, {q.target})")
        _need(p.names != q.names, "KindMismatch", "a diagram needs two distinct paths")
        return DiagramOp(p, q)

    if tag in registry.LOCAL_TO_AUTO:
        _need(len(ops) == 1, "ArityMismatch", f"{info.abbreviation} takes one composed path")
        paths = _paths(ops, info.abbreviation)
        rp = resolve_path(catalog, paths[0])
        _need(rp.target == rp.source and is_object_set(catalog, rp.source),
              "KindMismatch", f"{rp} does not compose to an autofunction")
        return AutoOp(rp)

    if tag in ("object", "fd_generalized_commutativity"):
        _need(len(ops) == 1 and isinstance(ops[0], HornClause), "KindMismatch",
              f"{info.abbreviation} takes one Horn clause")
        clause = ops[0]
        _need(is_object_set(catalog, clause.anchor), "UnknownReference",
              f"unknown object set {clause.anchor!r}")
        _need(clause.literals, "ArityMismatch", "empty clause")
        _need(clause.positive_count <= 1, "KindMismatch", "Horn clauses have at most one positive literal")
        lits = []
        for lit in clause.literals:
            sides = []
            for side in (lit.atom.left, lit.atom.right):
                if isinstance(side, Path):
                    sides.append(resolve_path(catalog, Path(side.steps), clause.anchor))
                else:
                    sides.append(side)
            lits.append(ResolvedLiteral(lit.positive, sides[0], lit.atom.op, sides[1]))
        return ClauseOp(clause.anchor, tuple(lits))

    raise ResolveError("KindMismatch", f"{tag} cannot be declared")


# ------------------------------------------------------- references & keys


def _path_mappings(rp: ResolvedPath) -> set[tuple[str, str]]:
    return {(s.domain, s.name) for s in rp.steps if s.kind != "unity"}


def constraint_mappings(catalog: Catalog, cdef: ConstraintDef) -> set[tuple[str, str]]:
    r = resolve_constraint(catalog, cdef)
    if isinstance(r, MappingOp):
        return {(r.mapping.domain, r.mapping.name)}
    if isinstance(r, AutoOp):
        return _path_mappings(r.path)
    if isinstance(r, HbfpOp):
        return {(r.f.domain, r.f.name), (r.g.domain, r.g.name)}
    if isinstance(r, KeyOp):
        return {(i.domain, i.name) for i in r.items}
    if isinstance(r, ExistsOp):
        return {(i.domain, i.name) for i in (r.f, *r.givens) if i.kind != "unity"}
    if isinstance(r, DiagramOp):
        return _path_mappings(r.p) | _path_mappings(r.q)
    if isinstance(r, ClauseOp):
        out: set[tuple[str, str]] = set()
        for lit in r.literals:
            for side in (lit.left, lit.right):
                if isinstance(side, ResolvedPath):
                    out |= _path_mappings(side)
        return out
    if isinstance(r, DyadicOp):
        return {(r.rel, r.left), (r.rel, r.right)}
    return set()


def constraint_sets(catalog: Catalog, cdef: ConstraintDef) -> set[str]:
    """Set names a constraint depends on (falls back to raw operand names)."""
    try:
        r = resolve_constraint(catalog, cdef)
    except ResolveError:
        return _raw_names(cdef)
    if isinstance(r, SetsOp):
        return set(r.sets)
    if isinstance(r, DyadicOp):
        return {r.rel, r.carrier}
    if isinstance(r, ClauseOp):
        out = {r.anchor}
    else:
        out = set()
    for dom, name in constraint_mappings(catalog, cdef):
        out.add(dom)
    return out


def _raw_names(cdef: ConstraintDef) -> set[str]:
    out = set()
    for o in cdef.operands:
        if isinstance(o, Path):
            out.update(o.steps)
            if o.qualifier:
                out.add(o.qualifier)
        elif isinstance(o, Product):
            for p in o.items:
                out.update(p.steps)
        elif isinstance(o, HornClause):
            out.add(o.anchor)
    return out


def _path_key(rp: ResolvedPath) -> tuple:
    return (rp.source,) + rp.names


def operand_components(catalog: Catalog, cdef: ConstraintDef) -> tuple:
    """Canonical, position-wise keys of a constraint's operands.

    Set operands become ("set", name), single mappings ("map", domain, name);
    every other family is one whole-operand slot ("slot", ...).
    """
    try:
        r = resolve_constraint(catalog, cdef)
    except ResolveError:
        return tuple(("raw", str(o)) for o in cdef.operands)
    if isinstance(r, SetsOp):
        return tuple(("set", s) for s in r.sets)
    if isinstance(r, MappingOp):
        return (("map", r.mapping.domain, r.mapping.name),)
    if isinstance(r, ExistsOp):
        return tuple(("map", i.domain, i.name) for i in (r.f, *r.givens))
    if isinstance(r, DyadicOp):
        return (("slot", "dyadic", r.rel),)
    if isinstance(r, AutoOp):
        return (("slot", "path", _path_key(r.path)),)
    if isinstance(r, HbfpOp):
        return (("slot", "hbfp", (r.source, r.f.name, r.g.name)),)
    if isinstance(r, KeyOp):
        return (("slot", "key", (r.source,) + tuple(sorted(i.name for i in r.items))),)
    if isinstance(r, DiagramOp):
        pair = tuple(sorted((_path_key(r.p), _path_key(r.q))))
        return (("slot", "diagram", pair),)
    if isinstance(r, ClauseOp):
        return (("slot", "clause", str(cdef.operands[0])),)
    return tuple(("raw", str(o)) for o in cdef.operands)


_UNORDERED_ALL = {"set_equality", "set_disjointness", "fd_commutativity", "fd_anti_commutativity"}
_UNORDERED_TAIL = {"set_union", "set_direct_sum", "fp_existence", "fp_nonexistence"}


def canonical_fact(catalog: Catalog, cdef: ConstraintDef) -> tuple:
    """(tag, components) with argument order normalised for symmetric types."""
    comps = operand_components(catalog, cdef)
    if cdef.ctype in _UNORDERED_ALL:
        comps = tuple(sorted(comps))
    elif cdef.ctype in _UNORDERED_TAIL:
        comps = comps[:1] + tuple(sorted(comps[1:]))
    return (cdef.ctype, comps)
