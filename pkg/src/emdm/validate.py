"""Schema well-formedness: closure and kind checks over a Catalog."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from . import registry
from .model import UNITY, Catalog, mapping_problems
from .resolve import ResolveError, constraint_mappings, resolve_constraint


@dataclass(frozen=True)
class Defect:
    code: str  # UnknownReference | KindMismatch | ArityMismatch | DuplicateName | AmbiguousReference | Datalog
    message: str
    where: str = ""

    def __str__(self) -> str:
        return f"{self.code} at {self.where}: {self.message}" if self.where else f"{self.code}: {self.message}"

    def to_json(self) -> dict:
        return {"code": self.code, "where": self.where, "message": self.message}


def validate_schema(catalog: Catalog) -> list[Defect]:
    """Every violated catalog invariant, as data; [] iff well formed."""
    out: list[Defect] = []

    for name, n in Counter(s.name for s in catalog.sets).items():
        if n > 1:
            out.append(Defect("DuplicateName", f"set {name!r} declared {n} times", name))
    for s in catalog.sets:
        for p in s.problems():
            out.append(Defect("KindMismatch", p, s.name))
        for role, target in s.rel_sorts:
            if not catalog.has_set(target):
                out.append(Defect("UnknownReference", f"role {role} targets unknown set {target!r}", s.name))
            elif not catalog.lookup_set(target).is_object:
                out.append(Defect("KindMismatch", f"role {role} targets non-object set {target}", s.name))

    for (dom, name), n in Counter((m.domain, m.name) for m in catalog.mappings).items():
        if n > 1:
            out.append(Defect("DuplicateName", f"mapping {dom}::{name} declared {n} times", f"{dom}::{name}"))
    for m in catalog.mappings:
        where = f"{m.domain}::{m.name}"
        if m.name == UNITY:
            out.append(Defect("DuplicateName", f"{UNITY!r} is the reserved unity mapping", where))
        if catalog.has_set(m.domain) and m.name in (r for r, _ in catalog.lookup_set(m.domain).rel_sorts):
            out.append(Defect("DuplicateName", f"{m.name!r} is also a role of {m.domain}", where))
        for p in mapping_problems(catalog, m):
            code = "UnknownReference" if "unknown" in p else "KindMismatch"
            out.append(Defect(code, p, where))

    for name, n in Counter(c.name for c in catalog.constraints).items():
        if n > 1:
            out.append(Defect("DuplicateName", f"constraint {name!r} declared {n} times", name))
    for c in catalog.constraints:
        if c.ctype not in registry.BY_TAG:
            out.append(Defect("UnknownReference", f"unknown constraint type {c.ctype!r}", c.name))
            continue
        if registry.lookup(c.ctype).category == "relational":
            out.append(Defect("KindMismatch", "relational constraints are implicit", c.name))
            continue
        try:
            resolve_constraint(catalog, c)
        except ResolveError as exc:
            out.append(Defect(exc.code, str(exc), c.name))
            continue
        if c.ctype == "fd_generalized_commutativity":
            out.extend(_gencomm_defects(catalog, c))

    for name, n in Counter(d.name for d in catalog.diagrams).items():
        if n > 1:
            out.append(Defect("DuplicateName", f"diagram {name!r} declared {n} times", name))
    for d in catalog.diagrams:
        for s in d.sets:
            if not catalog.has_set(s):
                out.append(Defect("UnknownReference", f"diagram lists unknown set {s!r}", d.name))

    for name, n in Counter(p.name for p in catalog.programs).items():
        if n > 1:
            out.append(Defect("DuplicateName", f"program {name!r} declared {n} times", name))
    from .datalog.checks import check_program

    for p in catalog.programs:
        for d in check_program(catalog, p):
            out.append(Defect("Datalog", str(d), f"program {p.name}"))
    return out


def _gencomm_defects(catalog: Catalog, c) -> list[Defect]:
    """Generalized commutativity may only mention mappings of one general cycle."""
    from .erd import build_graph, enumerate_cycles

    mentioned = constraint_mappings(catalog, c)
    graph = build_graph(catalog)
    for cyc in enumerate_cycles(graph).cycles:
        if cyc.classification != "general":
            continue
        on_cycle = {(graph.edge(e).source, graph.edge(e).mapping) for e in cyc.edges}
        if mentioned and mentioned <= on_cycle:
            return []
    return [Defect("KindMismatch",
                   "generalized commutativity must only mention mappings of one general E-RD cycle",
                   c.name)]
