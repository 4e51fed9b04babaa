"""Relational translation: generic SQL DDL via the Key Propagation Principle."""

from __future__ import annotations

import datetime as _dt
import sqlite3
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any

from .errors import IncoherentInput
from .model import Catalog, InstanceDB, ValueTypeSpec
from .resolve import ClauseOp, KeyOp, MappingOp, ResolvedPath, ResolveError, resolve_constraint

SQL_TYPES = {"Boolean": "BOOLEAN", "Integer": "BIGINT", "Decimal": "NUMERIC", "Text": "VARCHAR", "Date": "DATE"}

_RESERVED = {
    "ALL", "ALTER", "AND", "AS", "ASC", "BETWEEN", "BY", "CASE", "CHECK", "COLUMN", "CONSTRAINT", "CREATE",
    "CROSS", "DEFAULT", "DELETE", "DESC", "DISTINCT", "DROP", "ELSE", "END", "EXISTS", "FOREIGN", "FROM",
    "FULL", "GROUP", "HAVING", "IN", "INDEX", "INNER", "INSERT", "INTO", "IS", "JOIN", "KEY", "LEFT",
    "LIKE", "LIMIT", "NOT", "NULL", "OFFSET", "ON", "OR", "ORDER", "OUTER", "PRIMARY", "REFERENCES",
    "RIGHT", "SELECT", "SET", "TABLE", "THEN", "TO", "UNION", "UNIQUE", "UPDATE", "USER", "VALUES",
    "VIEW", "WHEN", "WHERE", "WITH",
}


def ident(name: str) -> str:
    return f'"{name}"' if name.upper() in _RESERVED else name


def sql_literal(v: Any) -> str:
    if v is None:
        return "NULL"
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, (int, Decimal)):
        return str(v)
    if isinstance(v, _dt.date):
        return "'" + v.isoformat() + "'"
    return "'" + str(v).replace("'", "''") + "'"


@dataclass(frozen=True)
class CoverageEntry:
    constraint: str
    ctype: str
    status: str  # relational | engine-only
    statement: str | None = None

    def to_json(self) -> dict:
        return {"constraint": self.constraint, "ctype": self.ctype, "status": self.status,
                "statement": self.statement}


@dataclass
class DdlScript:
    statements: list[str] = field(default_factory=list)
    coverage: list[CoverageEntry] = field(default_factory=list)

    def text(self) -> str:
        return "".join(s + ";\n" for s in self.statements)

    @property
    def relational_count(self) -> int:
        return sum(1 for c in self.coverage if c.status == "relational")

    @property
    def engine_only_count(self) -> int:
        return sum(1 for c in self.coverage if c.status == "engine-only")

    def coverage_json(self) -> dict:
        return {
            "relational_count": self.relational_count,
            "engine_only_count": self.engine_only_count,
            "constraints": [c.to_json() for c in self.coverage],
        }


def _domain_check(column: str, spec: ValueTypeSpec) -> str | None:
    parts = []
    c = ident(column)
    if spec.min is not None:
        parts.append(f"{c} >= {sql_literal(spec.min)}")
    if spec.max is not None:
        parts.append(f"{c} <= {sql_literal(spec.max)}")
    if spec.enumeration is not None:
        parts.append(f"{c} IN ({', '.join(sql_literal(v) for v in spec.enumeration)})")
    return " AND ".join(parts) if parts else None


_SQL_OPS = {"=": "=", "!=": "<>", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _const_fits(base: str, v: Any) -> bool:
    if base == "Boolean":
        return isinstance(v, bool)
    if base in ("Integer", "Decimal"):
        return isinstance(v, (int, Decimal)) and not isinstance(v, bool)
    if base == "Date":
        return isinstance(v, _dt.date)
    return isinstance(v, str)


def _row_local_check(catalog: Catalog, op: ClauseOp) -> tuple[str, str] | None:
    """(column, CHECK body) for a clause over one attribute compared to constants."""
    column = None
    terms = []
    for lit in op.literals:
        sides = (lit.left, lit.right)
        paths = [s for s in sides if isinstance(s, ResolvedPath)]
        if len(paths) != 1 or len(paths[0].steps) != 1:
            return None
        step = paths[0].steps[0]
        if step.kind not in ("attr", "sys"):
            return None
        if column not in (None, step.name):
            return None
        column = step.name
        spec = catalog.value_spec(step.codomain)
        const = next(s for s in sides if not isinstance(s, ResolvedPath))
        if spec is None or not _const_fits(spec.base, const.value):
            return None
        left = ident(step.name) if sides[0] is paths[0] else sql_literal(const.value)
        right = sql_literal(const.value) if sides[0] is paths[0] else ident(step.name)
        atom = f"{left} {_SQL_OPS[lit.op]} {right}"
        terms.append(atom if lit.positive else f"NOT ({atom})")
    return (column, " OR ".join(terms)) if column else None


def translate(catalog: Catalog) -> DdlScript:
    """DDL plus per-constraint coverage, without a coherence check."""
    tables = sorted((s for s in catalog.object_sets()), key=lambda s: s.name)
    table_names = {s.name for s in tables}
    column_defs: dict[str, list[str]] = {s.name: [] for s in tables}
    not_null: dict[tuple[str, str], str] = {}
    extras: dict[str, list[str]] = {s.name: [] for s in tables}
    domain_checks: dict[str, list[str]] = {s.name: [] for s in tables}
    fks: list[str] = []
    coverage: dict[str, CoverageEntry] = {}

    for c in catalog.constraints:
        try:
            r = resolve_constraint(catalog, c)
        except ResolveError:
            coverage[c.name] = CoverageEntry(c.name, c.ctype, "engine-only")
            continue
        entry = CoverageEntry(c.name, c.ctype, "engine-only")
        if c.ctype == "map_totality" and isinstance(r, MappingOp) and r.mapping.kind in ("attr", "fn", "sys", "role"):
            m = r.mapping
            not_null[(m.domain, m.name)] = c.name
            entry = CoverageEntry(c.name, c.ctype, "relational", f"{m.domain}.{m.name} NOT NULL")
        elif c.ctype == "map_one_to_one" and isinstance(r, MappingOp) and r.mapping.kind != "comp":
            m = r.mapping
            cname = f"{m.domain}_{m.name}_oneone"
            extras[m.domain].append(f"CONSTRAINT {cname} UNIQUE ({ident(m.name)})")
            entry = CoverageEntry(c.name, c.ctype, "relational", cname)
        elif c.ctype == "fp_key" and isinstance(r, KeyOp) and all(i.kind != "comp" for i in r.items):
            names = [i.name for i in r.items]
            cname = f"{r.source}_{'_'.join(names)}_key"
            extras[r.source].append(f"CONSTRAINT {cname} UNIQUE ({', '.join(ident(n) for n in names)})")
            entry = CoverageEntry(c.name, c.ctype, "relational", cname)
        elif c.ctype == "object" and isinstance(r, ClauseOp) and r.anchor in table_names:
            found = _row_local_check(catalog, r)
            if found is not None:
                column, body = found
                cname = f"{r.anchor}_{column}_object"
                k = 2
                while any(x.startswith(f"CONSTRAINT {cname} ") for x in extras[r.anchor]):
                    cname = f"{r.anchor}_{column}_object_{k}"
                    k += 1
                extras[r.anchor].append(f"CONSTRAINT {cname} CHECK ({body})")
                entry = CoverageEntry(c.name, c.ctype, "relational", cname)
        coverage[c.name] = entry

    for s in tables:
        cols = column_defs[s.name]
        cols.append("id BIGINT NOT NULL PRIMARY KEY")
        for role, target in s.rel_sorts:
            nn = " NOT NULL" if (s.name, role) in not_null else ""
            cols.append(f"{ident(role)} BIGINT{nn}")
            fks.append(f"ALTER TABLE {ident(s.name)} ADD CONSTRAINT {s.name}_{role}_refint "
                       f"FOREIGN KEY ({ident(role)}) REFERENCES {ident(target)} (id)")
        for m in catalog.mappings_of(s.name):
            if m.kind == "Computed":
                continue
            nn = " NOT NULL" if (s.name, m.name) in not_null else ""
            default = f" DEFAULT {sql_literal(m.default_value)}" if m.default_value is not None else ""
            if m.codomain in table_names:
                cols.append(f"{ident(m.name)} BIGINT{default}{nn}")
                fks.append(f"ALTER TABLE {ident(s.name)} ADD CONSTRAINT {s.name}_{m.name}_refint "
                           f"FOREIGN KEY ({ident(m.name)}) REFERENCES {ident(m.codomain)} (id)")
                continue
            spec = catalog.value_spec(m.codomain)
            if spec is None:
                continue
            cols.append(f"{ident(m.name)} {SQL_TYPES[spec.base]}{default}{nn}")
            check = _domain_check(m.name, spec)
            if check:
                domain_checks[s.name].append(f"CONSTRAINT {s.name}_{m.name}_domain CHECK ({check})")

    statements = []
    for s in tables:
        body = ",\n  ".join(column_defs[s.name] + domain_checks[s.name] + extras[s.name])
        statements.append(f"CREATE TABLE {ident(s.name)} (\n  {body}\n)")
    statements.extend(fks)
    return DdlScript(statements, [coverage[c.name] for c in catalog.constraints])


def emit_ddl(catalog: Catalog) -> DdlScript:
    """DDL for a coherent catalog; raises IncoherentInput otherwise."""
    from .analysis import detect_incoherence

    incs = detect_incoherence(catalog)
    if incs:
        raise IncoherentInput(incs)
    return translate(catalog)


def coverage_report(catalog: Catalog) -> dict:
    return translate(catalog).coverage_json()


# ------------------------------------------------------------ interpreter


def _sqlite_value(v: Any) -> Any:
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, Decimal):
        return str(v)
    if isinstance(v, _dt.date):
        return v.isoformat()
    if isinstance(v, int):
        return int(v)
    return v


def run_ddl(script: DdlScript, catalog: Catalog, instance: InstanceDB) -> list[str]:
    """Evaluate the emitted DDL over `instance` with sqlite3; returns failures.

    CREATE TABLE statements are executed as written and rows are inserted one
    by one.  sqlite cannot add constraints by ALTER TABLE, so each emitted
    foreign key is evaluated as an equivalent anti-join query instead; its
    targets are the instance's ids, so a row rejected by one constraint does
    not make references to it fail as well.
    """
    con = sqlite3.connect(":memory:")
    failures: list[str] = []
    try:
        alters = []
        for stmt in script.statements:
            if stmt.startswith("ALTER TABLE"):
                alters.append(stmt)
            else:
                con.execute(stmt)
        con.execute("CREATE TABLE _ids (tbl VARCHAR, id BIGINT)")
        con.executemany("INSERT INTO _ids VALUES (?, ?)",
                        [(s.name, row.id) for s in catalog.object_sets() for row in instance.of(s.name).rows])
        for s in sorted(catalog.object_sets(), key=lambda s: s.name):
            cols = ["id"] + [c for c in catalog.columns_of(s.name)
                             if not any(m.name == c and m.kind == "Computed" for m in catalog.mappings_of(s.name))]
            sql = (f"INSERT INTO {ident(s.name)} ({', '.join(ident(c) for c in cols)}) "
                   f"VALUES ({', '.join('?' for _ in cols)})")
            for row in instance.of(s.name).rows:
                vals = [row.id] + [_sqlite_value(row.get(c)) for c in cols[1:]]
                try:
                    con.execute(sql, vals)
                except sqlite3.IntegrityError as exc:
                    failures.append(f"{s.name}#{row.id}: {exc}")
        for stmt in alters:
            words = stmt.split()
            table = words[2]
            column = stmt.split("FOREIGN KEY (")[1].split(")")[0]
            target = stmt.split("REFERENCES ")[1].split(" ")[0].strip('"')
            q = (f"SELECT id FROM {table} WHERE {column} IS NOT NULL "
                 f"AND {column} NOT IN (SELECT id FROM _ids WHERE tbl = ?) ORDER BY id")
            for (rid,) in con.execute(q, (target,)):
                failures.append(f"{table.strip(chr(34))}#{rid}: foreign key {words[5]} fails")
    finally:
        con.close()
    return failures
