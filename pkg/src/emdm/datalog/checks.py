"""Static checks: predicate resolution, arity, safety, stratification."""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from ..model import Catalog
from .syntax import DatalogProgramDef, Var


@dataclass(frozen=True)
class DatalogDefect:
    code: str  # Unsafe | NotStratified | ArityMismatch | UnknownPredicate | ExtensionalHead
    message: str
    rule: int | None = None  # 0-based index into program.rules

    def __str__(self) -> str:
        at = f"rule {self.rule + 1}: " if self.rule is not None else ""
        return f"{self.code}: {at}{self.message}"

    def to_json(self) -> dict:
        return {"code": self.code, "rule": self.rule, "message": self.message}


def extensional_arities(catalog: Catalog) -> dict[str, int]:
    """Object set S binds predicate S with columns (id, roles..., mappings...)."""
    return {s.name: 1 + len(catalog.columns_of(s.name)) for s in catalog.object_sets()}


def dependency_graph(program: DatalogProgramDef) -> nx.MultiDiGraph:
    """Edges body predicate -> head predicate, attribute `negative`."""
    g = nx.MultiDiGraph()
    for p in program.intensional():
        g.add_node(p)
    for r in program.rules:
        for lit in r.body:
            atom = getattr(lit, "atom", None)
            if atom is not None:
                g.add_edge(atom.pred, r.head.pred, negative=not lit.positive)
    return g


def negative_cycle(program: DatalogProgramDef) -> list[str] | None:
    """A predicate cycle through negation, or None when stratifiable."""
    g = dependency_graph(program)
    comp_of = {}
    for i, comp in enumerate(nx.strongly_connected_components(g)):
        for n in comp:
            comp_of[n] = i
    for u, v, data in sorted(g.edges(data=True), key=lambda e: (e[0], e[1])):
        if data["negative"] and comp_of[u] == comp_of[v]:
            if u == v:
                return [u, u]
            back = nx.shortest_path(g, v, u)
            return [u] + back
    return None


def check_program(catalog: Catalog, program: DatalogProgramDef) -> list[DatalogDefect]:
    out: list[DatalogDefect] = []
    ext = extensional_arities(catalog)
    heads = set(program.intensional())
    arity: dict[str, tuple[int, int]] = {}  # pred -> (arity, first rule)

    for i, r in enumerate(program.rules):
        if r.head.pred in ext:
            out.append(DatalogDefect("ExtensionalHead",
                                     f"{r.head.pred} is an object set and cannot be derived", i))
        atoms = [r.head] + [lit.atom for lit in r.body if hasattr(lit, "atom")]
        for a in atoms:
            if a.pred in ext and a.pred not in heads:
                if a.arity != ext[a.pred]:
                    out.append(DatalogDefect("ArityMismatch",
                                             f"{a.pred} has arity {ext[a.pred]}, used with {a.arity}", i))
                continue
            if a.pred not in heads:
                out.append(DatalogDefect("UnknownPredicate", f"{a.pred} is neither an object set nor derived", i))
                continue
            if a.pred in arity and arity[a.pred][0] != a.arity:
                out.append(DatalogDefect("ArityMismatch",
                                         f"{a.pred} used with arity {a.arity} and {arity[a.pred][0]}", i))
            arity.setdefault(a.pred, (a.arity, i))

        bound = {v for a in r.positive_atoms() for v in a.variables()}
        for t in r.head.terms:
            if isinstance(t, Var) and t.anonymous:
                out.append(DatalogDefect("Unsafe", "anonymous variable in rule head", i))
        for v in r.head.variables():
            if v not in bound:
                out.append(DatalogDefect("Unsafe", f"head variable {v} is not bound by a positive atom", i))
        for a in r.negative_atoms():
            for v in a.variables():
                if v not in bound:
                    out.append(DatalogDefect("Unsafe", f"variable {v} of negated {a.pred} is unbound", i))
        for c in r.comparisons():
            for v in c.variables():
                if v not in bound:
                    out.append(DatalogDefect("Unsafe", f"variable {v} in comparison {c} is unbound", i))
            if any(isinstance(t, Var) and t.anonymous for t in (c.left, c.right)):
                out.append(DatalogDefect("Unsafe", f"anonymous variable in comparison {c}", i))

    cyc = negative_cycle(program)
    if cyc is not None:
        out.append(DatalogDefect("NotStratified", "recursion through negation: " + " -> ".join(cyc)))
    return out
