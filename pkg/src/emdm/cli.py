"""emdm command line: batch validation, analysis and export.

Exit codes: 0 clean, 1 findings in the user's schema or data, 2 usage or
IO error, 3 internal invariant breach.  Machine output goes to stdout
(JSON, or SQL/DOT for ddl/erd); diagnostics and --pretty tables go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from typing import Any, Callable

from . import analysis, ddl, erd, store
from .datalog.engine import evaluate, iteration_stats
from .dsl import parse_schema, serialize_schema
from .errors import (
    Corrupt,
    IllFormedCatalog,
    IllFormedProgram,
    IncoherentInput,
    InstanceError,
    NotStratified,
    ParseFailure,
    TooManyMappings,
    UnsupportedVersion,
)
from .instance import instance_to_json, parse_instance
from .model import Catalog
from .validate import validate_schema
from .validator import discover_keys, validate_instance

EXIT_CLEAN, EXIT_FINDINGS, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class Findings(Exception):
    """The input has problems; `payload` is still printed to stdout."""

    def __init__(self, message: str, payload: Any = None):
        super().__init__(message)
        self.payload = payload


class UsageError(Exception):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_schema(path: str) -> Catalog:
    """A .emdm schema, or a saved catalog (.json)."""
    if path.endswith(".json"):
        try:
            return store.load_catalog(path)
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        except (Corrupt, UnsupportedVersion) as exc:
            raise Findings(f"{path}: {exc}") from None
    try:
        return parse_schema(_read(path))
    except ParseFailure as exc:
        raise Findings(f"{path}: {len(exc.errors)} parse error(s)",
                       {"parse_errors": [e.to_json() for e in exc.errors]}) from None


def _wellformed(catalog: Catalog, path: str) -> Catalog:
    defects = validate_schema(catalog)
    if defects:
        raise Findings(f"{path}: {len(defects)} schema defect(s)", {"defects": [d.to_json() for d in defects]})
    return catalog


def load_instance(path: str, catalog: Catalog):
    try:
        return parse_instance(_read(path), catalog, strict=False)
    except InstanceError as exc:
        raise Findings(f"{path}: {len(exc.errors)} instance error(s)",
                       {"instance_errors": [e.to_json() for e in exc.errors]}) from None


# ----------------------------------------------------------------- pretty


def _table(rows: list[list[Any]], header: list[str]) -> str:
    cells = [header] + [[("" if c is None else str(c)) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- commands


def cmd_validate(args) -> tuple[str, int, str | None]:
    try:
        catalog = load_schema(args.schema)
    except Findings as exc:
        print(f"emdm: {exc}", file=sys.stderr)
        payload = {"well_formed": False, "coherent": None, **(exc.payload or {})}
        return dumps(payload), EXIT_FINDINGS, None
    defects = validate_schema(catalog)
    out: dict[str, Any] = {"well_formed": not defects, "defects": [d.to_json() for d in defects]}
    if defects:
        out.update(coherent=None, incoherences=[], warnings=[])
    else:
        incs = analysis.detect_incoherence(catalog)
        out.update(coherent=not incs, incoherences=[i.to_json() for i in incs],
                   warnings=[w.to_json() for w in analysis.analysis_warnings(catalog)])
    pretty = _table([[d.code, d.where, d.message] for d in defects], ["defect", "where", "message"])
    pretty += _table([[i["theorem"], ", ".join(i["constraints"])] for i in out["incoherences"]],
                     ["theorem", "constraints"])
    return dumps(out), (EXIT_CLEAN if out["well_formed"] and out["coherent"] else EXIT_FINDINGS), pretty


def cmd_check(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    report = validate_instance(catalog, load_instance(args.instance, catalog))
    pretty = _table([[v.constraint, v.ctype, "; ".join(f"{w.set}#{w.row}" for w in v.witness), v.explanation]
                     for v in report], ["constraint", "type", "witnesses", "explanation"])
    return dumps(report.to_json()), (EXIT_FINDINGS if report else EXIT_CLEAN), pretty


def cmd_analyze(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    report = analysis.analyze(catalog)
    data = report.to_json()
    pretty = _table([[d["name"], d["text"], d["theorem"]] for d in data["derived"]], ["derived", "text", "theorem"])
    pretty += _table([[r["constraint"], r["theorem"]] for r in data["redundancies"]], ["redundant", "theorem"])
    return dumps(data), (EXIT_CLEAN if report.clean else EXIT_FINDINGS), pretty


def cmd_minimize(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    try:
        minimal, removed = analysis.minimize(catalog)
    except IncoherentInput as exc:
        raise Findings("schema is incoherent", {"incoherences": [i.to_json() for i in exc.incoherences]}) from None
    text = serialize_schema(minimal)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc.strerror}") from None
    out = {"removed": [r.to_json() for r in removed], "remaining": len(minimal.constraints)}
    if not args.output:
        out["schema"] = text
    pretty = _table([[r.constraint, r.theorem] for r in removed], ["removed", "theorem"])
    return dumps(out), EXIT_CLEAN, pretty


def cmd_cycles(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    graph = erd.build_graph(catalog)
    cycles = erd.enumerate_cycles(graph, args.max_cycles)
    items = []
    for c in cycles:
        item = c.to_json()
        if args.suggest:
            item["suggestions"] = erd.suggest_constraints(graph, c)
        items.append(item)
    pretty = _table([[c.length, c.classification, " ".join(c.mappings)] for c in cycles],
                    ["length", "class", "mappings"])
    if cycles.truncated:
        pretty += f"truncated at {len(cycles)} cycles\n"
    return dumps({"cycles": items, "truncated": cycles.truncated}), EXIT_CLEAN, pretty


def cmd_keys(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    if not catalog.has_set(args.set) or not catalog.lookup_set(args.set).is_object:
        raise UsageError(f"no object set named {args.set!r}")
    inst = load_instance(args.instance, catalog)
    try:
        keys = discover_keys(catalog, inst, args.set)
    except TooManyMappings as exc:
        raise UsageError(str(exc)) from None
    pretty = _table([[", ".join(k)] for k in keys], ["key"])
    return dumps({"set": args.set, "keys": keys}), EXIT_CLEAN, pretty


def cmd_ddl(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    try:
        script = ddl.emit_ddl(catalog)
    except IncoherentInput as exc:
        raise Findings("schema is incoherent", {"incoherences": [i.to_json() for i in exc.incoherences]}) from None
    cov = script.coverage_json()
    if args.coverage_json:
        try:
            with open(args.coverage_json, "w", encoding="utf-8") as fh:
                fh.write(dumps(cov))
        except OSError as exc:
            raise UsageError(f"cannot write {args.coverage_json}: {exc.strerror}") from None
    lines = [f"-- {catalog.db_name}: {cov['relational_count']} constraint(s) enforced relationally, "
             f"{cov['engine_only_count']} engine-only"]
    for c in script.coverage:
        lines.append(f"-- {c.constraint} ({c.ctype}): {c.status}" + (f" via {c.statement}" if c.statement else ""))
    pretty = _table([[c.constraint, c.ctype, c.status, c.statement] for c in script.coverage],
                    ["constraint", "type", "status", "statement"])
    return "\n".join(lines) + "\n" + script.text(), EXIT_CLEAN, pretty


def cmd_erd(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    return erd.export_dot(catalog), EXIT_CLEAN, None


def cmd_datalog(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    try:
        program = catalog.lookup_program(args.program)
    except Exception:
        raise UsageError(f"no program named {args.program!r}") from None
    inst = load_instance(args.instance, catalog)
    try:
        ev = evaluate(catalog, inst, program, "naive" if args.naive else "seminaive")
    except NotStratified as exc:
        raise Findings(str(exc), {"defects": [{"code": "NotStratified", "message": str(exc)}]}) from None
    except IllFormedProgram as exc:
        raise Findings(str(exc), {"defects": [d.to_json() for d in exc.defects]}) from None
    out: dict[str, Any] = {"program": program.name, "mode": ev.mode, "results": ev.to_json()}
    if args.ra:
        out["ra"] = ev.system.to_json()
    if args.stats:
        out["stats"] = iteration_stats(ev)
    pretty = _table([[p, len(rows)] for p, rows in ev.results.items()], ["predicate", "tuples"])
    if args.ra:
        pretty += ev.system.text()
    return dumps(out), EXIT_CLEAN, pretty


def cmd_reflect(args):
    catalog = _wellformed(load_schema(args.schema), args.schema)
    inst = store.reflect(catalog)
    data = instance_to_json(inst, store.meta_schema())
    pretty = _table([[k, len(v["rows"])] for k, v in data.items()], ["meta-set", "rows"])
    return dumps(data), EXIT_CLEAN, pretty


def selfcheck_results() -> list[dict]:
    """Bootstrap fixpoint plus oracle certification of every shipped theorem."""
    checks: list[dict] = []

    def record(name: str, ok: bool, detail: str = "") -> None:
        checks.append({"check": name, "ok": bool(ok), "detail": detail})

    meta = store.meta_schema()
    defects = validate_schema(meta)
    record("meta-schema well formed", not defects, "; ".join(str(d) for d in defects))
    incs = analysis.detect_incoherence(meta)
    record("meta-schema coherent", not incs, "; ".join(i.explanation for i in incs))
    inst = store.reflect(meta)
    violations = validate_instance(meta, inst)
    record("meta-schema reflects onto itself", not violations, f"{len(violations)} violation(s)")
    counts = {"SETS": len(meta.sets), "FUNCTIONS": len(meta.mappings), "CONSTRAINTSET": len(meta.constraints)}
    got = {k: len(inst.of(k)) for k in counts}
    record("reflection row counts", got == counts, json.dumps(got, sort_keys=True))
    restored = store.loads_catalog(store.dumps_catalog(meta))
    record("catalog store round trip", restored == meta)
    started = time.perf_counter()
    bad = []
    theorems = analysis.default_theorems()
    for th in theorems:
        result = analysis.oracle_certify(th)
        if not isinstance(result, analysis.Certificate):
            bad.append(th.name)
    record("theorem certification", not bad,
           f"{len(theorems) - len(bad)}/{len(theorems)} certified in {time.perf_counter() - started:.1f}s"
           + (f"; failed: {', '.join(bad)}" if bad else ""))
    return checks


def cmd_selfcheck(args):
    checks = selfcheck_results()
    ok = all(c["ok"] for c in checks)
    # timing detail varies run to run; keep stdout byte-stable
    stable = [{"check": c["check"], "ok": c["ok"]} for c in checks]
    pretty = _table([[c["check"], "ok" if c["ok"] else "FAIL", c["detail"]] for c in checks],
                    ["check", "status", "detail"])
    return dumps({"ok": ok, "checks": stable}), (EXIT_CLEAN if ok else EXIT_INTERNAL), pretty


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="also print a human-readable table to stderr")

    p = argparse.ArgumentParser(prog="emdm", description="(E)MDM schema engine", parents=[common])
    sub = p.add_subparsers(dest="command", metavar="command", required=True)

    def add(name: str, fn: Callable, help_text: str, *positionals: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text, parents=[common])
        for pos in positionals:
            sp.add_argument(pos)
        sp.set_defaults(func=fn)
        return sp

    add("validate", cmd_validate, "well-formedness and coherence report", "schema")
    add("check", cmd_check, "validate an instance against a schema", "schema", "instance")
    add("analyze", cmd_analyze, "closure, incoherences and redundancies", "schema")
    sp = add("minimize", cmd_minimize, "drop constraints implied by the others", "schema")
    sp.add_argument("-o", "--output", help="write the minimized schema here")
    sp = add("cycles", cmd_cycles, "enumerate and classify E-R diagram cycles", "schema")
    sp.add_argument("--suggest", action="store_true", help="list candidate constraints per cycle")
    sp.add_argument("--max-cycles", type=int, default=None, help="cap (default: $EMDM_MAX_CYCLES or 10000)")
    add("keys", cmd_keys, "discover minimal keys of an object set", "schema", "instance", "set")
    sp = add("ddl", cmd_ddl, "emit SQL DDL with constraint coverage", "schema")
    sp.add_argument("--coverage-json", metavar="PATH", help="also write the coverage report as JSON")
    add("erd", cmd_erd, "export the E-R diagram as DOT", "schema")
    sp = add("datalog", cmd_datalog, "evaluate a Datalog program", "schema", "instance", "program")
    sp.add_argument("--ra", action="store_true", help="include the relational-algebra equation system")
    sp.add_argument("--stats", action="store_true", help="include naive vs semi-naive iteration statistics")
    sp.add_argument("--naive", action="store_true", help="evaluate naively instead of semi-naively")
    add("reflect", cmd_reflect, "export the schema as a meta-schema instance", "schema")
    add("selfcheck", cmd_selfcheck, "bootstrap fixpoint and theorem certification")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_CLEAN
    if getattr(args, "max_cycles", None) is not None and args.max_cycles <= 0:
        print("emdm: --max-cycles must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        out, code, pretty = args.func(args)
    except UsageError as exc:
        print(f"emdm: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Findings as exc:
        if exc.payload is not None:
            sys.stdout.write(dumps(exc.payload))
        print(f"emdm: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except (IllFormedCatalog, IncoherentInput) as exc:
        print(f"emdm: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except Exception:
        traceback.print_exc(file=sys.stderr)
        return EXIT_INTERNAL
    sys.stdout.write(out)
    if args.pretty and pretty:
        sys.stderr.write(pretty)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
