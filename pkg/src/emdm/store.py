"""Catalog persistence (versioned JSON) and self-description.

`reflect` turns any catalog into an instance of the shipped meta-schema:
each set, mapping, role, constraint, program, predicate, rule and diagram
becomes one row, and the taxonomy and theorem rows the catalog refers to
come along so every reference resolves.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import tempfile
from dataclasses import replace
from decimal import Decimal
from functools import lru_cache
from importlib import resources
from typing import Any

from . import registry
from .datalog.syntax import Atom, Compare, Const as DConst, DatalogProgramDef, PredLiteral, Rule, Var
from .errors import Corrupt, UnsupportedVersion
from .model import (
    Catalog,
    Comparison,
    ConstraintDef,
    Const,
    DiagramDef,
    HornClause,
    InstanceDB,
    Literal,
    MappingDef,
    Path,
    Product,
    SetDef,
    ValueTypeSpec,
    format_literal,
)

SCHEMA_VERSION = 1


# ------------------------------------------------------------------ values


def _enc_value(v: Any) -> Any:
    if isinstance(v, Decimal):
        return {"decimal": str(v)}
    if isinstance(v, _dt.date):
        return {"date": v.isoformat()}
    return v


def _dec_value(v: Any) -> Any:
    if isinstance(v, dict):
        if "decimal" in v:
            return Decimal(v["decimal"])
        if "date" in v:
            return _dt.date.fromisoformat(v["date"])
        raise ValueError(f"unknown value encoding {sorted(v)}")
    return v


def _enc_operand(op: Any) -> dict:
    if isinstance(op, Path):
        return {"path": list(op.steps), "qualifier": op.qualifier}
    if isinstance(op, Product):
        return {"product": [_enc_operand(p) for p in op.items]}
    if isinstance(op, Const):
        return {"const": _enc_value(op.value)}
    if isinstance(op, HornClause):
        return {
            "anchor": op.anchor,
            "literals": [
                {"positive": lit.positive, "left": _enc_operand(lit.atom.left), "op": lit.atom.op,
                 "right": _enc_operand(lit.atom.right)}
                for lit in op.literals
            ],
        }
    raise TypeError(f"cannot encode operand {op!r}")


def _dec_operand(d: dict) -> Any:
    if "path" in d:
        return Path(tuple(d["path"]), d.get("qualifier"))
    if "product" in d:
        return Product(tuple(_dec_operand(p) for p in d["product"]))
    if "const" in d:
        return Const(_dec_value(d["const"]))
    if "anchor" in d:
        return HornClause(d["anchor"], tuple(
            Literal(lit["positive"], Comparison(_dec_operand(lit["left"]), lit["op"], _dec_operand(lit["right"])))
            for lit in d["literals"]
        ))
    raise ValueError(f"unknown operand encoding {sorted(d)}")


def _enc_term(t) -> dict:
    return {"var": t.name} if isinstance(t, Var) else {"const": t.value}


def _dec_term(d: dict):
    return Var(d["var"]) if "var" in d else DConst(d["const"])


def _enc_atom(a: Atom) -> dict:
    return {"pred": a.pred, "terms": [_enc_term(t) for t in a.terms]}


def _dec_atom(d: dict) -> Atom:
    return Atom(d["pred"], tuple(_dec_term(t) for t in d["terms"]))


def _enc_body(lit) -> dict:
    if isinstance(lit, PredLiteral):
        return {"atom": _enc_atom(lit.atom), "positive": lit.positive}
    return {"left": _enc_term(lit.left), "op": lit.op, "right": _enc_term(lit.right)}


def _dec_body(d: dict):
    if "atom" in d:
        return PredLiteral(_dec_atom(d["atom"]), d["positive"])
    return Compare(_dec_term(d["left"]), d["op"], _dec_term(d["right"]))


# ----------------------------------------------------------------- catalog


def catalog_to_dict(catalog: Catalog) -> dict:
    def spec(s: ValueTypeSpec | None):
        if s is None:
            return None
        return {
            "base": s.base,
            "min": _enc_value(s.min),
            "max": _enc_value(s.max),
            "enumeration": None if s.enumeration is None else [_enc_value(v) for v in s.enumeration],
            "pattern": s.pattern,
        }

    return {
        "schema_version": SCHEMA_VERSION,
        "db_name": catalog.db_name,
        "sets": [
            {"name": s.name, "kind": s.kind, "rel_sorts": [list(r) for r in s.rel_sorts],
             "value_spec": spec(s.value_spec), "computed_formula": s.computed_formula}
            for s in catalog.sets
        ],
        "mappings": [
            {"name": m.name, "kind": m.kind, "domain": m.domain, "codomain": m.codomain,
             "default_value": _enc_value(m.default_value), "formula": m.formula}
            for m in catalog.mappings
        ],
        "constraints": [
            {"name": c.name, "ctype": c.ctype, "operands": [_enc_operand(o) for o in c.operands],
             "origin": c.origin, "theorem": c.theorem}
            for c in catalog.constraints
        ],
        "programs": [
            {"name": p.name, "kind": p.kind,
             "rules": [{"head": _enc_atom(r.head), "body": [_enc_body(b) for b in r.body]} for r in p.rules]}
            for p in catalog.programs
        ],
        "diagrams": [{"name": d.name, "sets": list(d.sets)} for d in catalog.diagrams],
    }


def catalog_from_dict(data: dict) -> Catalog:
    version = data.get("schema_version") if isinstance(data, dict) else None
    if not isinstance(version, int) or isinstance(version, bool):
        raise Corrupt("missing or malformed schema_version")
    if version > SCHEMA_VERSION or version < 1:
        raise UnsupportedVersion(f"catalog schema_version {version}; this build reads {SCHEMA_VERSION}")
    try:
        def spec(d):
            if d is None:
                return None
            enum = d["enumeration"]
            return ValueTypeSpec(d["base"], _dec_value(d["min"]), _dec_value(d["max"]),
                                 None if enum is None else tuple(_dec_value(v) for v in enum), d["pattern"])

        return Catalog(
            data["db_name"],
            tuple(SetDef(s["name"], s["kind"], tuple(tuple(r) for r in s["rel_sorts"]),
                         spec(s["value_spec"]), s["computed_formula"]) for s in data["sets"]),
            tuple(MappingDef(m["name"], m["kind"], m["domain"], m["codomain"],
                             _dec_value(m["default_value"]), m["formula"]) for m in data["mappings"]),
            tuple(ConstraintDef(c["name"], c["ctype"], tuple(_dec_operand(o) for o in c["operands"]),
                                c["origin"], c["theorem"]) for c in data["constraints"]),
            tuple(DatalogProgramDef(p["name"], tuple(
                Rule(_dec_atom(r["head"]), tuple(_dec_body(b) for b in r["body"])) for r in p["rules"]
            ), p["kind"]) for p in data["programs"]),
            tuple(DiagramDef(d["name"], tuple(d["sets"])) for d in data["diagrams"]),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise Corrupt(f"malformed catalog document: {exc!r}") from None


def dumps_catalog(catalog: Catalog) -> str:
    return json.dumps(catalog_to_dict(catalog), indent=2, ensure_ascii=False) + "\n"


def loads_catalog(raw: bytes | str) -> Catalog:
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise Corrupt("invalid UTF-8", exc.start) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise Corrupt(exc.msg, len(text[: exc.pos].encode("utf-8"))) from None
    return catalog_from_dict(data)


def save_catalog(catalog: Catalog, path: str | os.PathLike) -> None:
    """Write atomically: a temp file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".catalog-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps_catalog(catalog))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_catalog(path: str | os.PathLike) -> Catalog:
    with open(path, "rb") as fh:
        return loads_catalog(fh.read())


# ------------------------------------------------------------ meta-schema


def meta_schema_text() -> str:
    return resources.files("emdm").joinpath("data/meta.emdm").read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def meta_schema() -> Catalog:
    from .dsl import parse_schema

    return parse_schema(meta_schema_text())


def _implications(catalog: Catalog) -> list[tuple[str, str]]:
    """Pairs (c, c2) of distinct constraints where c alone implies c2."""
    from .analysis import _canon, closure_facts

    canon = {c.name: _canon(catalog, c) for c in catalog.constraints}
    out = []
    for c in catalog.constraints:
        if canon[c.name] is None:
            continue
        facts = closure_facts(replace(catalog, constraints=(c,)))
        for c2 in catalog.constraints:
            if c2.name != c.name and canon[c2.name] is not None and canon[c2.name] in facts:
                out.append((c.name, c2.name))
    return out


def _spec_text(s: ValueTypeSpec | None) -> str | None:
    if s is None:
        return None
    parts = [s.base]
    if s.min is not None or s.max is not None:
        lo = "" if s.min is None else format_literal(s.min)
        hi = "" if s.max is None else format_literal(s.max)
        parts.append(f"[{lo} .. {hi}]")
    if s.enumeration is not None:
        parts.append("in {" + ", ".join(format_literal(v) for v in s.enumeration) + "}")
    if s.pattern is not None:
        parts.append("pattern " + json.dumps(s.pattern))
    return " ".join(parts)


def reflect_rows(catalog: Catalog) -> dict[str, list[dict]]:
    """Meta-instance rows as plain JSON-able dicts, ids 1..n per meta-set."""
    from .analysis import default_theorems

    set_id = {s.name: i for i, s in enumerate(catalog.sets, 1)}
    rows: dict[str, list[dict]] = {name: [] for name in (
        "SETS", "FUNCTIONS", "REL_SORTS", "CONSTRAINT_CATEGS", "CONSTRAINT_SUBCATEGS", "CONSTRAINT_TYPES",
        "THEOREMS", "CONSTRAINTSET", "IMPLICATIONS", "PROGRAMS", "PREDICATES", "INF_RULES", "DIAGRAMS")}

    for s in catalog.sets:
        rows["SETS"].append({
            "id": set_id[s.name], "set_name": s.name, "set_kind": s.kind,
            "base": s.value_spec.base if s.value_spec else None,
            "value_spec": _spec_text(s.value_spec), "set_formula": s.computed_formula,
        })
        for pos, (role, target) in enumerate(s.rel_sorts, 1):
            rows["REL_SORTS"].append({
                "id": len(rows["REL_SORTS"]) + 1, "owner": set_id[s.name], "sort": set_id.get(target),
                "role_name": role, "role_position": pos,
            })
    for i, m in enumerate(catalog.mappings, 1):
        rows["FUNCTIONS"].append({
            "id": i, "fn_name": m.name, "fn_kind": m.kind, "domain": set_id.get(m.domain),
            "codomain": set_id.get(m.codomain), "codomain_name": m.codomain,
            "default_value": None if m.default_value is None else format_literal(m.default_value),
            "fn_formula": m.formula,
        })

    used = sorted({c.ctype for c in catalog.constraints if c.ctype in registry.BY_TAG},
                  key=[i.tag for i in registry.REGISTRY].index)
    subcats = [s for s, _ in registry.SUBCATEGORIES if any(registry.lookup(t).subcategory == s for t in used)]
    parent = dict(registry.SUBCATEGORIES)
    categs = [c for c in registry.CATEGORIES if any(parent[s] == c for s in subcats)]
    categ_id = {c: i for i, c in enumerate(categs, 1)}
    subcat_id = {s: i for i, s in enumerate(subcats, 1)}
    type_id = {t: i for i, t in enumerate(used, 1)}
    rows["CONSTRAINT_CATEGS"] = [{"id": categ_id[c], "categ_name": c} for c in categs]
    rows["CONSTRAINT_SUBCATEGS"] = [
        {"id": subcat_id[s], "subcateg_name": s, "categ": categ_id[parent[s]]} for s in subcats
    ]
    for t in used:
        info = registry.lookup(t)
        rows["CONSTRAINT_TYPES"].append({
            "id": type_id[t], "tag": t, "abbreviation": info.abbreviation, "subcateg": subcat_id[info.subcategory],
            "fundamental": info.fundamental, "type_description": info.description or None,
        })

    shipped = {th.name: th for th in default_theorems()}
    cited = []
    for c in catalog.constraints:
        if c.theorem is not None and c.theorem not in cited:
            cited.append(c.theorem)
    theorem_id = {name: i for i, name in enumerate(cited, 1)}
    for name in cited:
        th = shipped.get(name)
        rows["THEOREMS"].append({
            "id": theorem_id[name], "theorem_name": name,
            "theorem_kind": th.kind if th else None, "family": th.family if th else None,
            "certificate": th.certificate if th else None,
        })

    cons_id = {c.name: i for i, c in enumerate(catalog.constraints, 1)}
    for c in catalog.constraints:
        rows["CONSTRAINTSET"].append({
            "id": cons_id[c.name], "constraint_name": c.name, "ctype": type_id.get(c.ctype),
            "operands": c.operand_text(), "origin": c.origin,
            "theorem": theorem_id.get(c.theorem) if c.theorem else None,
        })
    for premise, consequence in _implications(catalog):
        rows["IMPLICATIONS"].append({
            "id": len(rows["IMPLICATIONS"]) + 1, "premise": cons_id[premise], "consequence": cons_id[consequence],
        })

    for pi, p in enumerate(catalog.programs, 1):
        rows["PROGRAMS"].append({"id": pi, "program_name": p.name, "program_kind": p.kind})
        for pred in p.intensional():
            arity = next(r.head.arity for r in p.rules if r.head.pred == pred)
            rows["PREDICATES"].append({
                "id": len(rows["PREDICATES"]) + 1, "pred_name": pred, "program": pi, "arity": arity,
            })
        for pos, r in enumerate(p.rules, 1):
            rows["INF_RULES"].append({
                "id": len(rows["INF_RULES"]) + 1, "rule_program": pi, "rule_position": pos, "rule_text": str(r),
            })
    for i, d in enumerate(catalog.diagrams, 1):
        rows["DIAGRAMS"].append({"id": i, "diagram_name": d.name, "diagram_sets": ", ".join(d.sets) or None})
    return rows


def reflect(catalog: Catalog) -> InstanceDB:
    """`catalog` as an instance of the meta-schema."""
    from .instance import parse_instance

    return parse_instance(json.dumps(reflect_rows(catalog)), meta_schema(), strict=False)
