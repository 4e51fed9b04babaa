"""JSON instance files: {"SET": {"rows": [{"id": 1, "col": value, ...}]}}."""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass
from decimal import Decimal
from typing import Any

from .errors import InstanceError
from .model import Catalog, InstanceDB, Ref, Row, SetInstance, coerce_value


@dataclass(frozen=True)
class InstanceDefect:
    code: str  # JsonSyntax | UnknownSet | UnknownColumn | BadRow | DuplicateId | TypeMismatch | DanglingRef
    message: str
    set: str | None = None
    row: int | None = None
    column: str | None = None

    def __str__(self) -> str:
        where = ""
        if self.set:
            where = f" at {self.set}" + (f"#{self.row}" if self.row is not None else "")
            if self.column:
                where += f".{self.column}"
        return f"{self.code}{where}: {self.message}"

    def to_json(self) -> dict:
        return {"code": self.code, "set": self.set, "row": self.row,
                "column": self.column, "message": self.message}


def column_types(catalog: Catalog, set_name: str) -> dict[str, tuple[str, str]]:
    """column -> ("ref", target set) or ("value", codomain name)."""
    sdef = catalog.lookup_set(set_name)
    out = {r: ("ref", t) for r, t in sdef.rel_sorts}
    for m in catalog.mappings_of(set_name):
        if catalog.has_set(m.codomain) and catalog.lookup_set(m.codomain).is_object:
            out[m.name] = ("ref", m.codomain)
        else:
            out[m.name] = ("value", m.codomain)
    return out


def _typed(catalog: Catalog, kind: tuple[str, str], raw: Any) -> Any:
    if raw is None:
        return None
    if kind[0] == "ref":
        if isinstance(raw, int) and not isinstance(raw, bool):
            return Ref(raw)
        return raw
    spec = catalog.value_spec(kind[1])
    return coerce_value(spec.base, raw) if spec else raw


def parse_instance(json_text: str, catalog: Catalog, strict: bool = True) -> InstanceDB:
    """Parse and type an instance against `catalog`.

    Structural problems (bad JSON, unknown sets/columns, bad or duplicate
    ids) always raise InstanceError.  Domain and referential-integrity
    defects raise too when `strict`; otherwise they are left for
    validate_instance to report.
    """
    try:
        data = json.loads(json_text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise InstanceError([InstanceDefect("JsonSyntax", f"{exc.msg} (line {exc.lineno}, column {exc.colno})")]) from None
    errors: list[InstanceDefect] = []
    if not isinstance(data, dict):
        raise InstanceError([InstanceDefect("BadRow", "top level must be an object keyed by set name")])
    sets: dict[str, SetInstance] = {}
    for set_name, body in data.items():
        if not catalog.has_set(set_name) or not catalog.lookup_set(set_name).is_object:
            errors.append(InstanceDefect("UnknownSet", f"no object set named {set_name!r}", set_name))
            continue
        rows_raw = body.get("rows") if isinstance(body, dict) else body
        if not isinstance(rows_raw, list):
            errors.append(InstanceDefect("BadRow", "expected a list of rows", set_name))
            continue
        cols = column_types(catalog, set_name)
        rows: list[Row] = []
        seen: set[int] = set()
        for raw in rows_raw:
            if not isinstance(raw, dict):
                errors.append(InstanceDefect("BadRow", "rows must be objects", set_name))
                continue
            rid = raw.get("id")
            if isinstance(rid, bool) or not isinstance(rid, int) or rid <= 0:
                errors.append(InstanceDefect("BadRow", f"row id must be a positive integer, got {rid!r}", set_name))
                continue
            if rid in seen:
                errors.append(InstanceDefect("DuplicateId", f"id {rid} repeated", set_name, rid))
                continue
            seen.add(rid)
            values = {}
            for col, v in raw.items():
                if col == "id":
                    continue
                if col not in cols:
                    errors.append(InstanceDefect("UnknownColumn", f"{set_name} has no mapping {col!r}",
                                                 set_name, rid, col))
                    continue
                values[col] = _typed(catalog, cols[col], v)
            for col in cols:
                values.setdefault(col, None)
            rows.append(Row(rid, values))
        sets[set_name] = SetInstance(tuple(sorted(rows, key=lambda r: r.id)))
    if errors:
        raise InstanceError(errors)
    inst = InstanceDB(sets)
    if strict:
        from .validator import relational_violations

        defects = [
            InstanceDefect("TypeMismatch" if v.ctype == "rel_domain" else "DanglingRef",
                           v.explanation, v.witness[0].set, v.witness[0].row,
                           next(iter(v.witness[0].values), None))
            for v in relational_violations(catalog, inst)
        ]
        if defects:
            raise InstanceError(defects)
    return inst


def to_json_value(v: Any) -> Any:
    if isinstance(v, Ref):
        return int(v)
    if isinstance(v, Decimal):
        return int(v) if v == v.to_integral_value() and "." not in str(v) else float(v)
    if isinstance(v, _dt.date):
        return v.isoformat()
    return v


def instance_to_json(instance: InstanceDB, catalog: Catalog | None = None) -> dict:
    """Deterministic JSON-able form (sets in catalog order when given)."""
    names = list(instance.sets)
    if catalog is not None:
        order = {s.name: i for i, s in enumerate(catalog.sets)}
        names.sort(key=lambda n: (order.get(n, len(order)), n))
    out = {}
    for name in names:
        rows = []
        cols = catalog.columns_of(name) if catalog is not None and catalog.has_set(name) else None
        for r in sorted(instance.sets[name].rows, key=lambda r: r.id):
            row = {"id": r.id}
            keys = cols if cols is not None else sorted(r.values)
            for k in keys:
                row[k] = to_json_value(r.values.get(k))
            rows.append(row)
        out[name] = {"rows": rows}
    return out
