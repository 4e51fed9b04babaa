"""Core catalog and instance types.

A Catalog is the schema quadruple: sets, mappings, constraints and Datalog
programs (plus E-R diagram definitions).  Every type here is immutable;
the `add_*` / `remove_*` functions return a new Catalog.
"""

from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from typing import Any, Iterable, Iterator, Mapping, Union

from . import registry
from .datalog.syntax import DatalogProgramDef
from .errors import (
    DependentsExist,
    DuplicateName,
    EmptyName,
    KindMismatch,
    UnknownReference,
)

SET_KINDS = ("Entity", "Relationship", "Value", "System", "Computed")
OBJECT_KINDS = ("Entity", "Relationship")
MAPPING_KINDS = ("Attribute", "StructuralFunction", "System", "Computed")
BASES = ("Boolean", "Integer", "Decimal", "Text", "Date")
UNITY = "id"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Ref(int):
    """Surrogate id of a row in another object set."""

    def __repr__(self) -> str:
        return f"Ref({int(self)})"

    def __str__(self) -> str:
        return str(int(self))


Value = Union[None, bool, int, Decimal, str, _dt.date, Ref]


def value_key(v: Any) -> tuple:
    """Total order over heterogeneous values (numbers, text, dates, booleans)."""
    if v is None:
        return (0, 0)
    if isinstance(v, bool):
        return (1, int(v))
    if isinstance(v, (int, Decimal, float)):
        return (2, v)
    if isinstance(v, str):
        return (3, v)
    if isinstance(v, _dt.date):
        return (4, v.toordinal())
    return (5, repr(v))


def same_value(a: Any, b: Any) -> bool:
    return value_key(a) == value_key(b)


# --------------------------------------------------------------------- values


@dataclass(frozen=True)
class ValueTypeSpec:
    base: str
    min: Any = None
    max: Any = None
    enumeration: tuple | None = None
    pattern: str | None = None

    def problems(self) -> list[str]:
        out = []
        if self.base not in BASES:
            out.append(f"unknown base type {self.base!r}")
            return out
        for label, bound in (("min", self.min), ("max", self.max)):
            if bound is not None and base_mismatch(self.base, bound):
                out.append(f"{label} bound {bound!r} is not a {self.base}")
        if self.min is not None and self.max is not None and not out:
            if value_key(self.min) > value_key(self.max):
                out.append(f"min {self.min!r} exceeds max {self.max!r}")
        for v in self.enumeration or ():
            if base_mismatch(self.base, v):
                out.append(f"enumeration value {v!r} is not a {self.base}")
        if self.pattern is not None:
            try:
                re.compile(self.pattern)
            except re.error as exc:
                out.append(f"bad pattern: {exc}")
        return out

    def violation(self, value: Any) -> str | None:
        """Reason `value` (non-null) falls outside this type, or None."""
        if base_mismatch(self.base, value):
            return f"{value!r} is not a {self.base}"
        if self.min is not None and value_key(value) < value_key(self.min):
            return f"{value!r} is below the minimum {self.min!r}"
        if self.max is not None and value_key(value) > value_key(self.max):
            return f"{value!r} is above the maximum {self.max!r}"
        if self.enumeration is not None and not any(
            same_value(value, e) for e in self.enumeration
        ):
            return f"{value!r} is not one of the enumerated values"
        if self.pattern is not None and not re.fullmatch(self.pattern, str(value)):
            return f"{value!r} does not match pattern {self.pattern!r}"
        return None


def base_mismatch(base: str, value: Any) -> bool:
    if base == "Boolean":
        return not isinstance(value, bool)
    if base == "Integer":
        return isinstance(value, bool) or not isinstance(value, int)
    if base == "Decimal":
        return isinstance(value, bool) or not isinstance(value, (int, Decimal))
    if base == "Text":
        return not isinstance(value, str)
    if base == "Date":
        return not isinstance(value, _dt.date)
    return True


def coerce_value(base: str, raw: Any) -> Any:
    """Turn a JSON scalar into the engine value for `base`; unconvertible
    inputs are returned unchanged so the domain check can report them."""
    if raw is None:
        return None
    if base == "Decimal" and isinstance(raw, (int, float)) and not isinstance(raw, bool):
        try:
            return Decimal(str(raw))
        except InvalidOperation:
            return raw
    if base == "Integer" and isinstance(raw, Decimal) and raw == raw.to_integral_value():
        return int(raw)
    if base == "Date" and isinstance(raw, str):
        try:
            return _dt.date.fromisoformat(raw)
        except ValueError:
            return raw
    return raw


BUILTIN_VALUE_TYPES: dict[str, ValueTypeSpec] = {
    "BOOLE": ValueTypeSpec("Boolean"),
    "BOOL": ValueTypeSpec("Boolean"),
    "NAT": ValueTypeSpec("Integer", min=0),
    "INT": ValueTypeSpec("Integer"),
    "RAT": ValueTypeSpec("Decimal"),
    "TEXT": ValueTypeSpec("Text"),
    "DATE": ValueTypeSpec("Date"),
    **{b: ValueTypeSpec(b) for b in BASES},
}


# ------------------------------------------------------------------- operands


@dataclass(frozen=True)
class Path:
    """Mapping composition applied left to right; `qualifier` names the
    domain set of the first step when the bare name is ambiguous."""

    steps: tuple[str, ...]
    qualifier: str | None = None

    def __str__(self) -> str:
        head = f"{self.qualifier}::" if self.qualifier else ""
        return head + ".".join(self.steps)

    @property
    def is_name(self) -> bool:
        return self.qualifier is None and len(self.steps) == 1


@dataclass(frozen=True)
class Product:
    items: tuple[Path, ...]

    def __str__(self) -> str:
        return "(" + ", ".join(str(p) for p in self.items) + ")"


@dataclass(frozen=True)
class Const:
    value: Any

    def __str__(self) -> str:
        return format_literal(self.value)


COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Comparison:
    left: Path | Const
    op: str
    right: Path | Const

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: Comparison

    def __str__(self) -> str:
        return ("" if self.positive else "!") + str(self.atom)


@dataclass(frozen=True)
class HornClause:
    anchor: str
    literals: tuple[Literal, ...]

    def __str__(self) -> str:
        return f"{self.anchor}: " + " | ".join(str(l) for l in self.literals)

    @property
    def positive_count(self) -> int:
        return sum(1 for l in self.literals if l.positive)


Operand = Union[Path, Product, HornClause, Const]


def format_literal(value: Any) -> str:
    import json

    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, (int, Decimal)):
        return str(value)
    if isinstance(value, _dt.date):
        return f'date "{value.isoformat()}"'
    return json.dumps(value, ensure_ascii=False)


# -------------------------------------------------------------- declarations


@dataclass(frozen=True)
class SetDef:
    name: str
    kind: str
    rel_sorts: tuple[tuple[str, str], ...] = ()
    value_spec: ValueTypeSpec | None = None
    computed_formula: str | None = None

    @property
    def is_object(self) -> bool:
        return self.kind in OBJECT_KINDS

    def problems(self) -> list[str]:
        out = []
        if self.kind not in SET_KINDS:
            out.append(f"unknown set kind {self.kind!r}")
        if self.kind == "Relationship":
            if len(self.rel_sorts) < 2:
                out.append("relationship sets need at least 2 roles")
            roles = [r for r, _ in self.rel_sorts]
            if len(set(roles)) != len(roles):
                out.append("duplicate role names")
            if UNITY in roles:
                out.append(f"{UNITY!r} is reserved")
        elif self.rel_sorts:
            out.append("only relationship sets have roles")
        if self.kind == "Value":
            if self.value_spec is None:
                out.append("value sets need a value type")
            else:
                out.extend(self.value_spec.problems())
        elif self.value_spec is not None:
            out.append("only value sets carry a value type")
        if self.kind == "Computed" and self.computed_formula is None:
            out.append("computed sets need a formula")
        return out


@dataclass(frozen=True)
class MappingDef:
    name: str
    kind: str
    domain: str
    codomain: str
    default_value: Any = None
    formula: str | None = None


@dataclass(frozen=True)
class ConstraintDef:
    name: str
    ctype: str
    operands: tuple[Operand, ...]
    origin: str = "declared"
    theorem: str | None = None

    @property
    def info(self) -> registry.ConstraintTypeInfo:
        return registry.lookup(self.ctype)

    def operand_text(self) -> str:
        return ", ".join(str(o) for o in self.operands)

    def __str__(self) -> str:
        return f"{self.name}: {self.info.abbreviation}({self.operand_text()})"


@dataclass(frozen=True)
class DiagramDef:
    name: str
    sets: tuple[str, ...] = ()


@dataclass(frozen=True)
class MappingFlags:
    total: bool = False
    one_to_one: bool = False
    onto: bool = False
    nonprime: bool = False


# ------------------------------------------------------------------ catalog


@dataclass(frozen=True)
class Catalog:
    db_name: str
    sets: tuple[SetDef, ...] = ()
    mappings: tuple[MappingDef, ...] = ()
    constraints: tuple[ConstraintDef, ...] = ()
    programs: tuple[DatalogProgramDef, ...] = ()
    diagrams: tuple[DiagramDef, ...] = ()

    @property
    def registry(self) -> tuple[registry.ConstraintTypeInfo, ...]:
        return registry.REGISTRY

    def lookup_set(self, name: str) -> SetDef:
        for s in self.sets:
            if s.name == name:
                return s
        raise UnknownReference(f"no set named {name!r}")

    def has_set(self, name: str) -> bool:
        return any(s.name == name for s in self.sets)

    def lookup_mapping(self, domain: str, name: str) -> MappingDef:
        for m in self.mappings:
            if m.domain == domain and m.name == name:
                return m
        raise UnknownReference(f"no mapping {domain}::{name}")

    def lookup_constraint(self, name: str) -> ConstraintDef:
        for c in self.constraints:
            if c.name == name:
                return c
        raise UnknownReference(f"no constraint named {name!r}")

    def lookup_program(self, name: str) -> DatalogProgramDef:
        for p in self.programs:
            if p.name == name:
                return p
        raise UnknownReference(f"no program named {name!r}")

    def mappings_of(self, set_name: str) -> list[MappingDef]:
        return [m for m in self.mappings if m.domain == set_name]

    def columns_of(self, set_name: str) -> list[str]:
        """Row column names: roles first (relationship sets), then mappings."""
        cols = [r for r, _ in self.lookup_set(set_name).rel_sorts]
        cols.extend(m.name for m in self.mappings_of(set_name))
        return cols

    def object_sets(self) -> list[SetDef]:
        return [s for s in self.sets if s.is_object]

    def value_spec(self, name: str) -> ValueTypeSpec | None:
        for s in self.sets:
            if s.name == name:
                return s.value_spec if s.kind == "Value" else None
        return BUILTIN_VALUE_TYPES.get(name)

    def is_value_set(self, name: str) -> bool:
        return self.value_spec(name) is not None

    def flags(self, domain: str, name: str) -> MappingFlags:
        """Convenience view of the general-mapping constraints on a mapping."""
        from .resolve import constraint_mappings

        found = {"total": False, "one_to_one": False, "onto": False, "nonprime": False}
        wanted = {
            "map_totality": "total",
            "map_one_to_one": "one_to_one",
            "map_ontoness": "onto",
            "map_nonprimeness": "nonprime",
            "map_bijectivity": None,
        }
        for c in self.constraints:
            if c.ctype not in wanted:
                continue
            try:
                refs = constraint_mappings(self, c)
            except Exception:
                continue
            if (domain, name) not in refs:
                continue
            if c.ctype == "map_bijectivity":
                found["one_to_one"] = found["onto"] = True
            else:
                found[wanted[c.ctype]] = True
        return MappingFlags(**found)


def new_catalog(db_name: str) -> Catalog:
    if not db_name or not db_name.strip():
        raise EmptyName("database name must be non-empty")
    return Catalog(db_name=db_name)


def _check_ident(name: str, what: str) -> None:
    if not name:
        raise EmptyName(f"{what} name must be non-empty")
    if not _IDENT.match(name):
        raise KindMismatch(f"{what} name {name!r} is not an identifier")


def add_set(catalog: Catalog, sdef: SetDef) -> Catalog:
    _check_ident(sdef.name, "set")
    if catalog.has_set(sdef.name):
        raise DuplicateName(f"set {sdef.name!r} already exists")
    problems = sdef.problems()
    if problems:
        raise KindMismatch(f"set {sdef.name}: {problems[0]}")
    for role, target in sdef.rel_sorts:
        if target != sdef.name and not catalog.has_set(target):
            raise UnknownReference(f"role {role} targets unknown set {target!r}")
        if target != sdef.name and not catalog.lookup_set(target).is_object:
            raise KindMismatch(f"role {role} must target an object set")
    return replace(catalog, sets=catalog.sets + (sdef,))


def add_mapping(catalog: Catalog, mdef: MappingDef) -> Catalog:
    _check_ident(mdef.name, "mapping")
    if mdef.name == UNITY:
        raise DuplicateName(f"{UNITY!r} is the reserved unity mapping")
    if mdef.kind not in MAPPING_KINDS:
        raise KindMismatch(f"unknown mapping kind {mdef.kind!r}")
    dom = catalog.lookup_set(mdef.domain)
    if any(m.domain == mdef.domain and m.name == mdef.name for m in catalog.mappings):
        raise DuplicateName(f"mapping {mdef.domain}::{mdef.name} already exists")
    if mdef.name in (r for r, _ in dom.rel_sorts):
        raise DuplicateName(f"{mdef.name!r} is already a role of {mdef.domain}")
    for problem in mapping_problems(catalog, mdef):
        raise KindMismatch(problem)
    return replace(catalog, mappings=catalog.mappings + (mdef,))


def mapping_problems(catalog: Catalog, mdef: MappingDef) -> list[str]:
    out = []
    try:
        dom = catalog.lookup_set(mdef.domain)
    except UnknownReference:
        return [f"mapping {mdef.name}: unknown domain {mdef.domain!r}"]
    if dom.kind not in OBJECT_KINDS + ("Computed",):
        out.append(f"mapping {mdef.name}: domain {mdef.domain} is not an object or computed set")
    codomain_is_set = catalog.has_set(mdef.codomain)
    if not codomain_is_set and mdef.codomain not in BUILTIN_VALUE_TYPES:
        return out + [f"mapping {mdef.name}: unknown codomain {mdef.codomain!r}"]
    if mdef.kind == "Attribute" and not catalog.is_value_set(mdef.codomain):
        out.append(
            f"attribute {mdef.name}: codomain {mdef.codomain} is not a value set"
        )
    if mdef.kind == "StructuralFunction":
        if not codomain_is_set or not catalog.lookup_set(mdef.codomain).is_object:
            out.append(
                f"structural function {mdef.name}: codomain {mdef.codomain} "
                "is not an object set"
            )
    if mdef.kind == "Computed" and mdef.formula is None:
        out.append(f"computed mapping {mdef.name} needs a formula")
    return out


def add_constraint(catalog: Catalog, cdef: ConstraintDef) -> Catalog:
    from .resolve import ResolveError, resolve_constraint

    _check_ident(cdef.name, "constraint")
    if cdef.ctype not in registry.BY_TAG:
        raise UnknownReference(f"unknown constraint type {cdef.ctype!r}")
    if registry.lookup(cdef.ctype).category == "relational":
        raise KindMismatch("relational constraints are implicit and cannot be declared")
    if any(c.name == cdef.name for c in catalog.constraints):
        raise DuplicateName(f"constraint {cdef.name!r} already exists")
    try:
        resolve_constraint(catalog, cdef)
    except ResolveError as exc:
        cls = UnknownReference if exc.code == "UnknownReference" else KindMismatch
        raise cls(str(exc)) from None
    return replace(catalog, constraints=catalog.constraints + (cdef,))


def add_program(catalog: Catalog, program: DatalogProgramDef) -> Catalog:
    _check_ident(program.name, "program")
    if any(p.name == program.name for p in catalog.programs):
        raise DuplicateName(f"program {program.name!r} already exists")
    return replace(catalog, programs=catalog.programs + (program,))


def add_diagram(catalog: Catalog, diagram: DiagramDef) -> Catalog:
    _check_ident(diagram.name, "diagram")
    if any(d.name == diagram.name for d in catalog.diagrams):
        raise DuplicateName(f"diagram {diagram.name!r} already exists")
    for s in diagram.sets:
        catalog.lookup_set(s)
    return replace(catalog, diagrams=catalog.diagrams + (diagram,))


def set_dependents(catalog: Catalog, name: str) -> list[str]:
    from .resolve import constraint_sets

    deps = []
    for s in catalog.sets:
        if s.name != name and any(t == name for _, t in s.rel_sorts):
            deps.append(s.name)
    for m in catalog.mappings:
        if name in (m.domain, m.codomain):
            deps.append(f"{m.domain}::{m.name}")
    for c in catalog.constraints:
        try:
            touched = constraint_sets(catalog, c)
        except Exception:
            touched = set()
        if name in touched:
            deps.append(c.name)
    for d in catalog.diagrams:
        if name in d.sets:
            deps.append(d.name)
    return deps


def remove_set(catalog: Catalog, name: str) -> Catalog:
    catalog.lookup_set(name)
    deps = set_dependents(catalog, name)
    if deps:
        raise DependentsExist(name, deps)
    return replace(catalog, sets=tuple(s for s in catalog.sets if s.name != name))


def remove_mapping(catalog: Catalog, domain: str, name: str) -> Catalog:
    from .resolve import constraint_mappings

    catalog.lookup_mapping(domain, name)
    deps = []
    for c in catalog.constraints:
        try:
            refs = constraint_mappings(catalog, c)
        except Exception:
            refs = set()
        if (domain, name) in refs:
            deps.append(c.name)
    if deps:
        raise DependentsExist(f"{domain}::{name}", deps)
    return replace(
        catalog,
        mappings=tuple(
            m for m in catalog.mappings if not (m.domain == domain and m.name == name)
        ),
    )


def remove_constraint(catalog: Catalog, name: str) -> Catalog:
    catalog.lookup_constraint(name)
    return replace(
        catalog, constraints=tuple(c for c in catalog.constraints if c.name != name)
    )


def remove_program(catalog: Catalog, name: str) -> Catalog:
    catalog.lookup_program(name)
    return replace(catalog, programs=tuple(p for p in catalog.programs if p.name != name))


def registry_counts(catalog: Catalog | None = None) -> dict:
    return registry.counts()


# ---------------------------------------------------------------- instances


@dataclass(frozen=True)
class Row:
    id: int
    values: Mapping[str, Any] = field(default_factory=dict)

    def get(self, column: str) -> Any:
        if column == UNITY:
            return self.id
        return self.values.get(column)


@dataclass(frozen=True)
class SetInstance:
    rows: tuple[Row, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.id: r for r in self.rows})

    def __iter__(self) -> Iterator[Row]:
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def get(self, row_id: Any) -> Row | None:
        if isinstance(row_id, bool) or not isinstance(row_id, int):
            return None
        return self._by_id.get(row_id)

    def ids(self) -> list[int]:
        return [r.id for r in self.rows]


@dataclass(frozen=True)
class InstanceDB:
    sets: Mapping[str, SetInstance] = field(default_factory=dict)

    def of(self, set_name: str) -> SetInstance:
        return self.sets.get(set_name) or SetInstance()

    def without_rows(self, coords: Iterable[tuple[str, int]]) -> "InstanceDB":
        drop: dict[str, set[int]] = {}
        for s, rid in coords:
            drop.setdefault(s, set()).add(rid)
        return InstanceDB(
            {
                name: SetInstance(tuple(r for r in inst.rows if r.id not in drop.get(name, ())))
                for name, inst in self.sets.items()
            }
        )


def make_instance(data: Mapping[str, Iterable[Mapping[str, Any]]]) -> InstanceDB:
    """Build an InstanceDB from {set: [{"id": .., col: ..}, ...]} (no typing)."""
    out = {}
    for set_name, rows in data.items():
        built = []
        for raw in rows:
            vals = {k: v for k, v in raw.items() if k != "id"}
            built.append(Row(int(raw["id"]), vals))
        out[set_name] = SetInstance(tuple(built))
    return InstanceDB(out)
