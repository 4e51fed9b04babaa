"""E-R diagram graph, elementary cycle enumeration and classification, DOT export."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable

from . import registry
from .model import Catalog, Path

DEFAULT_MAX_CYCLES = 10000


@dataclass(frozen=True)
class ErdEdge:
    id: int
    mapping: str
    source: str  # domain node
    target: str  # codomain node
    kind: str  # function | role

    def other(self, node: str) -> str:
        return self.target if node == self.source else self.source


@dataclass(frozen=True)
class ErdGraph:
    name: str
    nodes: tuple[str, ...]
    kinds: tuple[tuple[str, str], ...]  # (node, Entity | Relationship)
    edges: tuple[ErdEdge, ...]
    attributes: tuple[tuple[str, str, str], ...] = ()  # (set, attribute, codomain)

    def edge(self, edge_id: int) -> ErdEdge:
        return self.edges[edge_id]

    def kind_of(self, node: str) -> str:
        return dict(self.kinds)[node]

    def incident(self, node: str) -> list[ErdEdge]:
        return [e for e in self.edges if node in (e.source, e.target)]


def build_graph(catalog: Catalog) -> ErdGraph:
    """Object sets are nodes; roles and object-to-object mappings are edges."""
    objs = [s for s in catalog.sets if s.is_object]
    names = {s.name for s in objs}
    edges: list[ErdEdge] = []
    for s in objs:
        for role, target in s.rel_sorts:
            if target in names:
                edges.append(ErdEdge(len(edges), role, s.name, target, "role"))
    attrs = []
    for m in catalog.mappings:
        if m.domain not in names:
            continue
        if m.codomain in names:
            edges.append(ErdEdge(len(edges), m.name, m.domain, m.codomain, "function"))
        else:
            attrs.append((m.domain, m.name, m.codomain))
    return ErdGraph(catalog.db_name, tuple(s.name for s in objs), tuple((s.name, s.kind) for s in objs),
                    tuple(edges), tuple(attrs))


# ------------------------------------------------------------------ cycles


@dataclass(frozen=True)
class CycleReport:
    edges: tuple[int, ...]  # canonical: least rotation/reflection
    nodes: tuple[str, ...]  # nodes[i] is where edges[i] starts when walking the cycle
    mappings: tuple[str, ...]
    roles: tuple[tuple[str, str], ...]
    classification: str

    @property
    def length(self) -> int:
        return len(self.edges)

    def role_of(self, node: str) -> str:
        return dict(self.roles)[node]

    def census(self) -> dict[str, int]:
        out = {"source": 0, "destination": 0, "intermediate": 0}
        for _, r in self.roles:
            out[r] += 1
        return out

    def to_json(self) -> dict:
        return {
            "edges": list(self.edges),
            "nodes": list(self.nodes),
            "mappings": list(self.mappings),
            "length": self.length,
            "roles": {n: r for n, r in self.roles},
            "class": self.classification,
        }


class CycleList(list):
    """CycleReports in deterministic order plus a truncation flag."""

    def __init__(self, cycles: Iterable[CycleReport] = (), truncated: bool = False):
        super().__init__(cycles)
        self.truncated = truncated

    @property
    def cycles(self) -> list[CycleReport]:
        return list(self)

    def to_json(self) -> dict:
        return {"cycles": [c.to_json() for c in self], "truncated": self.truncated}


def canonical_rotation(seq: tuple[int, ...]) -> tuple[int, ...]:
    """Lexicographically least rotation or reflection of a cyclic sequence."""
    k = len(seq)
    best = None
    for s in (tuple(seq), tuple(reversed(seq))):
        for i in range(k):
            cand = s[i:] + s[:i]
            if best is None or cand < best:
                best = cand
    return best


def _walk(graph: ErdGraph, edges: tuple[int, ...]) -> tuple[str, ...]:
    """Node sequence for a closed walk along `edges` in the given order."""
    es = [graph.edge(e) for e in edges]
    if len(es) == 1:
        return (es[0].source,)
    if len(es) == 2:
        return (es[0].source, es[0].target)
    first, second = es[0], es[1]
    start = first.source if first.source not in (second.source, second.target) else first.target
    nodes = [start]
    cur = start
    for e in es[:-1]:
        cur = e.other(cur)
        nodes.append(cur)
    return tuple(nodes)


def classify(graph: ErdGraph, edges: tuple[int, ...]) -> CycleReport:
    edges = canonical_rotation(edges)
    nodes = _walk(graph, edges)
    k = len(edges)
    roles = []
    for i, node in enumerate(nodes):
        incident = (graph.edge(edges[i - 1]), graph.edge(edges[i])) if k > 1 else (graph.edge(edges[0]),) * 2
        outgoing = [e.source == node for e in incident]
        if k == 1:
            role = "intermediate"
        elif all(outgoing):
            role = "source"
        elif not any(outgoing):
            role = "destination"
        else:
            role = "intermediate"
        roles.append((node, role))
    sources = sum(1 for _, r in roles if r == "source")
    dests = sum(1 for _, r in roles if r == "destination")
    if k == 1:
        cls = "autofunction"
    elif sources == 1 and dests == 1:
        cls = "commutative"
    elif sources == 0 and dests == 0:
        cls = "circular"
    else:
        cls = "general"
    return CycleReport(edges, nodes, tuple(graph.edge(e).mapping for e in edges), tuple(roles), cls)


def max_cycles_default() -> int:
    raw = os.environ.get("EMDM_MAX_CYCLES")
    if raw:
        try:
            value = int(raw)
            if value > 0:
                return value
        except ValueError:
            pass
    return DEFAULT_MAX_CYCLES


def enumerate_cycles(graph: ErdGraph, max_cycles: int | None = None) -> CycleList:
    """All elementary cycles of the undirected multigraph, each once.

    DFS from every node s, only visiting nodes after s in node order, so
    each cycle is discovered from its least node (twice, once per
    direction; duplicates collapse under canonicalisation).
    """
    if max_cycles is None:
        max_cycles = max_cycles_default()
    order = {n: i for i, n in enumerate(graph.nodes)}
    adj: dict[str, list[ErdEdge]] = {n: [] for n in graph.nodes}
    found: dict[tuple[int, ...], None] = {}
    truncated = False

    for e in graph.edges:
        if e.source == e.target:
            found.setdefault((e.id,), None)
        else:
            adj[e.source].append(e)
            adj[e.target].append(e)

    def add(cyc: tuple[int, ...]) -> bool:
        nonlocal truncated
        key = canonical_rotation(cyc)
        if key in found:
            return True
        if len(found) >= max_cycles:
            truncated = True
            return False
        found[key] = None
        return True

    if len(found) > max_cycles:
        truncated = True
        found = dict(list(found.items())[:max_cycles])

    for s in graph.nodes:
        if truncated:
            break
        stack = [(s, iter(adj[s]))]
        path_edges: list[int] = []
        on_path = {s}
        while stack and not truncated:
            node, it = stack[-1]
            advanced = False
            for e in it:
                if e.id in path_edges:
                    continue
                w = e.other(node)
                if w == s and path_edges:
                    if not add(tuple(path_edges + [e.id])):
                        break
                elif order[w] > order[s] and w not in on_path:
                    path_edges.append(e.id)
                    on_path.add(w)
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            if path_edges:
                path_edges.pop()
            on_path.discard(node)

    reports = [classify(graph, c) for c in found]
    reports.sort(key=lambda r: (r.length, r.edges))
    return CycleList(reports, truncated)


# ------------------------------------------------------------- suggestions

AUTOFUNCTION_TAGS = tuple(i.tag for i in registry.REGISTRY if i.subcategory == "autofunction")
LOCAL_TAGS = tuple(registry.LOCAL_TO_AUTO)


def suggest_cycle_constraints(cycle: CycleReport) -> list[str]:
    """Candidate constraint types for a classified cycle (nothing is declared)."""
    if cycle.classification == "autofunction":
        return list(AUTOFUNCTION_TAGS)
    if cycle.classification == "commutative":
        return ["fd_commutativity", "fd_anti_commutativity"]
    if cycle.classification == "circular":
        return list(LOCAL_TAGS)
    return ["fd_generalized_commutativity"]


def _directed_path(graph: ErdGraph, cycle: CycleReport, start: str, first_edge: int, stop: str) -> Path:
    steps = []
    node = start
    k = cycle.length
    i = cycle.edges.index(first_edge)
    step = 1 if cycle.nodes[i] == node else -1
    while True:
        e = graph.edge(cycle.edges[i])
        if e.source != node:
            raise ValueError(f"edge {e.id} is not oriented away from {node}")
        steps.append(e.mapping)
        node = e.target
        if node == stop:
            break
        i = (i + step) % k
    return Path(tuple(steps), start)


def commutative_paths(graph: ErdGraph, cycle: CycleReport) -> tuple[Path, Path]:
    """The two source-to-destination paths of a commutative cycle."""
    if cycle.classification != "commutative":
        raise ValueError("not a commutative cycle")
    src = next(n for n, r in cycle.roles if r == "source")
    dst = next(n for n, r in cycle.roles if r == "destination")
    i = cycle.nodes.index(src)
    k = cycle.length
    forward = cycle.edges[i]
    backward = cycle.edges[(i - 1) % k]
    p = _directed_path(graph, cycle, src, forward, dst)
    q = _directed_path(graph, cycle, src, backward, dst)
    return tuple(sorted((p, q), key=lambda x: x.steps))


def circular_path(graph: ErdGraph, cycle: CycleReport) -> Path:
    """The composed autofunction around a circular cycle, from its least node."""
    if cycle.classification not in ("circular", "autofunction"):
        raise ValueError("not a circular cycle")
    start = min(cycle.nodes, key=graph.nodes.index)
    out_edge = next(e for e in cycle.edges if graph.edge(e).source == start)
    return _directed_path(graph, cycle, start, out_edge, start)


def suggest_constraints(graph: ErdGraph, cycle: CycleReport) -> list[dict]:
    """Suggested types with ready-to-declare operand text."""
    tags = suggest_cycle_constraints(cycle)
    if cycle.classification == "commutative":
        p, q = commutative_paths(graph, cycle)
        operands = f"{p}, {q}"
    elif cycle.classification in ("circular", "autofunction"):
        operands = str(circular_path(graph, cycle))
    else:
        operands = None
    out = []
    for t in tags:
        abbr = registry.lookup(t).abbreviation
        out.append({"ctype": t, "abbreviation": abbr,
                    "text": f"{abbr}({operands})" if operands is not None else None})
    return out


# --------------------------------------------------------------------- DOT


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(source: ErdGraph | Catalog) -> str:
    graph = source if isinstance(source, ErdGraph) else build_graph(source)
    lines = [f"digraph {_q(graph.name)} {{", '  node [fontname="Helvetica"];']
    for node, kind in graph.kinds:
        shape = "diamond" if kind == "Relationship" else "box"
        lines.append(f"  {_q(node)} [shape={shape}];")
    for dom, attr, codomain in graph.attributes:
        aid = f"{dom}.{attr}"
        lines.append(f"  {_q(aid)} [shape=ellipse, label={_q(attr)}, tooltip={_q(codomain)}];")
    for dom, attr, _ in graph.attributes:
        lines.append(f"  {_q(dom)} -> {_q(dom + '.' + attr)} [dir=none];")
    for e in graph.edges:
        style = ", style=dashed" if e.kind == "role" else ""
        lines.append(f"  {_q(e.source)} -> {_q(e.target)} [label={_q(e.mapping)}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
