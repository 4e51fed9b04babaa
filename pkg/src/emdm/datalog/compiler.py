"""Datalog rules to relational-algebra equations, programs to stratified systems.

Expressions carry named columns.  Atom leaves are renamed to their rule
variables, positive atoms are natural-joined, comparisons become selections,
negated atoms become antijoins (L − π_L(L ⋈ N)), and a final projection
builds the positional head columns #0..#k-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from ..errors import IllFormedProgram, NotStratified
from ..model import Catalog
from .checks import check_program, dependency_graph, extensional_arities
from .syntax import Atom, Compare, Const, DatalogProgramDef, PredLiteral, Rule, Var


def col(i: int) -> str:
    return f"#{i}"


class Expr:
    columns: tuple[str, ...]


@dataclass(frozen=True)
class Rel(Expr):
    pred: str
    arity: int
    version: str = "full"  # full | delta | old

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(col(i) for i in range(self.arity))

    def __str__(self) -> str:
        return {"full": self.pred, "delta": f"Δ{self.pred}", "old": f"{self.pred}°"}[self.version]


@dataclass(frozen=True)
class Values(Expr):
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __str__(self) -> str:
        if not self.columns:
            return "{()}"
        rows = ", ".join("(" + ", ".join(str(Const(v)) for v in r) + ")" for r in self.rows)
        return "{" + rows + "}"


@dataclass(frozen=True)
class Rename(Expr):
    child: Expr
    names: tuple[str, ...]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.names

    def __str__(self) -> str:
        return f"ρ[{','.join(self.names)}]({self.child})"


@dataclass(frozen=True)
class Select(Expr):
    child: Expr
    conds: tuple[tuple[str, str, object], ...]  # (column, op, column name | Const)

    @property
    def columns(self) -> tuple[str, ...]:
        return self.child.columns

    def __str__(self) -> str:
        cs = ", ".join(f"{a} {op} {b}" for a, op, b in self.conds)
        return f"σ[{cs}]({self.child})"


@dataclass(frozen=True)
class Project(Expr):
    child: Expr
    items: tuple[tuple[str, object], ...]  # (output column, column name | Const)

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(o for o, _ in self.items)

    def __str__(self) -> str:
        parts = []
        for out, src in self.items:
            parts.append(str(src) if out == src or out.startswith("#") else f"{out}:={src}")
        return f"π[{', '.join(parts)}]({self.child})"


@dataclass(frozen=True)
class Join(Expr):
    left: Expr
    right: Expr

    @property
    def columns(self) -> tuple[str, ...]:
        left = self.left.columns
        return left + tuple(c for c in self.right.columns if c not in left)

    def __str__(self) -> str:
        return f"{self.left} ⋈ {self.right}"


@dataclass(frozen=True)
class Union(Expr):
    children: tuple[Expr, ...]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.children[0].columns

    def __str__(self) -> str:
        return " ∪ ".join(str(c) for c in self.children)


@dataclass(frozen=True)
class Difference(Expr):
    left: Expr
    right: Expr

    @property
    def columns(self) -> tuple[str, ...]:
        return self.left.columns

    def __str__(self) -> str:
        return f"({self.left} − {self.right})"


# ---------------------------------------------------------------- compile


def _atom_expr(atom: Atom, arity: int, version: str = "full") -> Expr:
    leaf = Rel(atom.pred, arity, version)
    names = [t.name if isinstance(t, Var) else None for t in atom.terms]
    if all(n is not None and n != "_" for n in names) and len(set(names)) == len(names):
        return Rename(leaf, tuple(names))
    conds = []
    first: dict[str, int] = {}
    for i, t in enumerate(atom.terms):
        if isinstance(t, Const):
            conds.append((col(i), "=", t))
        elif not t.anonymous:
            if t.name in first:
                conds.append((col(first[t.name]), "=", col(i)))
            else:
                first[t.name] = i
    expr: Expr = Select(leaf, tuple(conds)) if conds else leaf
    return Project(expr, tuple((v, col(i)) for v, i in first.items()))


def _term_ref(t) -> object:
    return t if isinstance(t, Const) else t.name


def compile_rule(rule: Rule, arities: dict[str, int], versions: dict[int, str] | None = None) -> Expr:
    """RA expression for one rule; `versions` maps positive-atom index -> full|delta|old."""
    versions = versions or {}
    expr: Expr | None = None
    for k, atom in enumerate(rule.positive_atoms()):
        e = _atom_expr(atom, arities[atom.pred], versions.get(k, "full"))
        expr = e if expr is None else Join(expr, e)
    if expr is None:
        expr = Values((), ((),))
    comps = rule.comparisons()
    if comps:
        expr = Select(expr, tuple((_term_ref(c.left), c.op, _term_ref(c.right)) for c in comps))
    for atom in rule.negative_atoms():
        neg = _atom_expr(atom, arities[atom.pred])
        keep = expr.columns
        expr = Difference(expr, Project(Join(expr, neg), tuple((c, c) for c in keep)))
    head_items = tuple((col(i), _term_ref(t)) for i, t in enumerate(rule.head.terms))
    return Project(expr, head_items)


@dataclass(frozen=True)
class RaEquation:
    pred: str
    arity: int
    rules: tuple[Rule, ...]
    expr: Expr

    def __str__(self) -> str:
        return f"{self.pred} = {self.expr}"


@dataclass(frozen=True)
class RaEquationSystem:
    program: DatalogProgramDef
    arities: dict = field(hash=False, compare=False)
    strata: tuple[tuple[str, ...], ...]
    equations: tuple[RaEquation, ...]

    def equation(self, pred: str) -> RaEquation:
        return next(e for e in self.equations if e.pred == pred)

    def recursive(self, stratum: tuple[str, ...]) -> bool:
        members = set(stratum)
        return any(
            a.pred in members
            for p in stratum
            for r in self.equation(p).rules
            for a in r.positive_atoms()
        )

    def text(self) -> str:
        lines = []
        for i, stratum in enumerate(self.strata, 1):
            tag = "recursive" if self.recursive(stratum) else "non-recursive"
            lines.append(f"stratum {i} ({tag}): {', '.join(stratum)}")
            for p in stratum:
                lines.append(f"  {self.equation(p)}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_json(self) -> dict:
        return {
            "program": self.program.name,
            "strata": [
                {"predicates": list(s), "recursive": self.recursive(s),
                 "equations": {p: str(self.equation(p).expr) for p in s}}
                for s in self.strata
            ],
        }


def strata_of(program: DatalogProgramDef) -> tuple[tuple[str, ...], ...]:
    """SCCs of the intensional dependency graph, dependencies first, ties by name."""
    idb = set(program.intensional())
    g = dependency_graph(program).subgraph(idb)
    cond = nx.condensation(nx.DiGraph(g))
    members = cond.graph["mapping"]
    comps: dict[int, list[str]] = {}
    for node, c in members.items():
        comps.setdefault(c, []).append(node)
    label = {c: min(ns) for c, ns in comps.items()}
    order = nx.lexicographical_topological_sort(cond, key=lambda c: label[c])
    return tuple(tuple(sorted(comps[c])) for c in order)


def compile_to_ra(catalog: Catalog, program: DatalogProgramDef) -> RaEquationSystem:
    defects = check_program(catalog, program)
    strat = [d for d in defects if d.code == "NotStratified"]
    if strat:
        raise NotStratified(strat[0].message)
    if defects:
        raise IllFormedProgram(defects)
    arities = dict(extensional_arities(catalog))
    for r in program.rules:
        arities[r.head.pred] = r.head.arity
    equations = []
    for pred in program.intensional():
        rules = tuple(r for r in program.rules if r.head.pred == pred)
        exprs = tuple(compile_rule(r, arities) for r in rules)
        expr = exprs[0] if len(exprs) == 1 else Union(exprs)
        equations.append(RaEquation(pred, arities[pred], rules, expr))
    return RaEquationSystem(program, arities, strata_of(program), tuple(equations))


__all__ = [
    "Compare", "Const", "Difference", "Expr", "Join", "PredLiteral", "Project", "RaEquation",
    "RaEquationSystem", "Rel", "Rename", "Select", "Union", "Values", "compile_rule", "compile_to_ra",
    "strata_of",
]
