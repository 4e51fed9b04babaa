"""Bottom-up evaluation of a compiled equation system, naive or semi-naive."""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Callable

from ..model import Catalog, InstanceDB
from .compiler import (
    Difference,
    Expr,
    Join,
    Project,
    RaEquationSystem,
    Rel,
    Rename,
    Select,
    Union,
    Values,
    compile_rule,
    compile_to_ra,
)
from .syntax import Const, DatalogProgramDef


def normalize(v: Any) -> int | str:
    """Datalog values are integers or text."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return int(v)
    if isinstance(v, Decimal):
        return int(v) if v == v.to_integral_value() else str(v)
    if isinstance(v, _dt.date):
        return v.isoformat()
    return str(v)


def sort_key(v: int | str) -> tuple:
    return (0, v, "") if isinstance(v, int) else (1, 0, v)


def tuple_key(t: tuple) -> tuple:
    return tuple(sort_key(v) for v in t)


def extensional_relation(catalog: Catalog, instance: InstanceDB, set_name: str) -> set[tuple]:
    cols = catalog.columns_of(set_name)
    out = set()
    for r in instance.of(set_name).rows:
        vals = [r.get(c) for c in cols]
        if any(v is None for v in vals):
            continue  # Datalog has no nulls
        out.add((r.id,) + tuple(normalize(v) for v in vals))
    return out


_OPS: dict[str, Callable[[Any, Any], bool]] = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: sort_key(a) < sort_key(b),
    "<=": lambda a, b: sort_key(a) <= sort_key(b),
    ">": lambda a, b: sort_key(a) > sort_key(b),
    ">=": lambda a, b: sort_key(a) >= sort_key(b),
}



class _Evaluator:
    def __init__(self, lookup: Callable[[str, str], set[tuple]]):
        self.lookup = lookup
        self.work = 0

    def run(self, e: Expr) -> set[tuple]:
        if isinstance(e, Rel):
            return self.lookup(e.pred, e.version)
        if isinstance(e, Values):
            return set(e.rows)
        if isinstance(e, Rename):
            return self.run(e.child)
        if isinstance(e, Select):
            rows = self.run(e.child)
            idx = {c: i for i, c in enumerate(e.child.columns)}

            def val(row, ref):
                return normalize(ref.value) if isinstance(ref, Const) else row[idx[ref]]

            return {r for r in rows if all(_OPS[op](val(r, a), val(r, b)) for a, op, b in e.conds)}
        if isinstance(e, Project):
            rows = self.run(e.child)
            idx = {c: i for i, c in enumerate(e.child.columns)}
            getters = [
                (lambda r, v=normalize(src.value): v) if isinstance(src, Const) else (lambda r, i=idx[src]: r[i])
                for _, src in e.items
            ]
            return {tuple(g(r) for g in getters) for r in rows}
        if isinstance(e, Join):
            left, right = self.run(e.left), self.run(e.right)
            lc, rc = e.left.columns, e.right.columns
            shared = [c for c in rc if c in lc]
            li = [lc.index(c) for c in shared]
            ri = [rc.index(c) for c in shared]
            extra = [i for i, c in enumerate(rc) if c not in lc]
            index: dict[tuple, list[tuple]] = {}
            for r in right:
                index.setdefault(tuple(r[i] for i in ri), []).append(r)
            out = set()
            for l in left:
                for r in index.get(tuple(l[i] for i in li), ()):
                    out.add(l + tuple(r[i] for i in extra))
            self.work += len(out)
            return out
        if isinstance(e, Union):
            out = set()
            for c in e.children:
                out |= self.run(c)
            return out
        if isinstance(e, Difference):
            return self.run(e.left) - self.run(e.right)
        raise TypeError(f"unknown RA node {type(e).__name__}")


@dataclass
class Evaluation:
    system: RaEquationSystem
    mode: str
    results: dict[str, list[tuple]]
    rounds: list[int]  # per stratum
    deltas: list[list[int]]  # new tuples per round, per stratum
    work: int
    catalog: Catalog = field(repr=False, default=None)
    instance: InstanceDB = field(repr=False, default=None)

    @property
    def iterations(self) -> int:
        return max(self.rounds, default=0)

    def to_json(self) -> dict:
        return {p: [list(t) for t in rows] for p, rows in self.results.items()}


def evaluate(catalog: Catalog, instance: InstanceDB, program: DatalogProgramDef | RaEquationSystem,
             mode: str = "seminaive") -> Evaluation:
    """Least fixpoint, stratum by stratum; results sorted (integers before text)."""
    if mode not in ("seminaive", "naive"):
        raise ValueError(f"unknown evaluation mode {mode!r}")
    system = program if isinstance(program, RaEquationSystem) else compile_to_ra(catalog, program)
    edb: dict[str, set[tuple]] = {}
    full: dict[str, set[tuple]] = {p: set() for p in system.program.intensional()}
    delta: dict[str, set[tuple]] = {p: set() for p in full}
    old: dict[str, set[tuple]] = {p: set() for p in full}

    def lookup(pred: str, version: str) -> set[tuple]:
        if pred in full:
            return {"full": full, "delta": delta, "old": old}[version][pred]
        if pred not in edb:
            edb[pred] = extensional_relation(catalog, instance, pred)
        return edb[pred]

    ev = _Evaluator(lookup)
    rounds: list[int] = []
    deltas: list[list[int]] = []

    for stratum in system.strata:
        eqs = [system.equation(p) for p in stratum]
        if not system.recursive(stratum):
            for eq in eqs:
                full[eq.pred] = ev.run(eq.expr)
            rounds.append(1)
            deltas.append([sum(len(full[p]) for p in stratum)])
            continue
        counts: list[int] = []
        if mode == "naive":
            while True:
                new = {eq.pred: ev.run(eq.expr) for eq in eqs}
                grown = sum(len(new[p] - full[p]) for p in stratum)
                counts.append(grown)
                for p in stratum:
                    full[p] = new[p]
                if grown == 0:
                    break
        else:
            members = set(stratum)
            for eq in eqs:
                delta[eq.pred] = ev.run(eq.expr)
                full[eq.pred] = set(delta[eq.pred])
            counts.append(sum(len(delta[p]) for p in stratum))
            variants = []
            for eq in eqs:
                for rule in eq.rules:
                    pos = [k for k, a in enumerate(rule.positive_atoms()) if a.pred in members]
                    for j, k in enumerate(pos):
                        versions = {pk: "old" for pk in pos[:j]}
                        versions[k] = "delta"
                        variants.append((eq.pred, compile_rule(rule, system.arities, versions)))
            while counts[-1]:
                for p in stratum:
                    old[p] = full[p] - delta[p]
                new = {p: set() for p in stratum}
                for pred, expr in variants:
                    new[pred] |= ev.run(expr)
                for p in stratum:
                    new[p] -= full[p]
                    full[p] = full[p] | new[p]
                    delta[p] = new[p]
                counts.append(sum(len(new[p]) for p in stratum))
        rounds.append(len(counts))
        deltas.append(counts)

    results = {p: sorted(full[p], key=tuple_key) for p in system.program.intensional()}
    return Evaluation(system, mode, results, rounds, deltas, ev.work, catalog, instance)


def iteration_stats(evaluation: Evaluation) -> dict:
    """Compare the evaluation with the other mode on the same inputs."""
    other_mode = "naive" if evaluation.mode == "seminaive" else "seminaive"
    other = evaluate(evaluation.catalog, evaluation.instance, evaluation.system, other_mode)
    semi, naive = (evaluation, other) if evaluation.mode == "seminaive" else (other, evaluation)
    return {
        "naive_iterations": naive.iterations,
        "seminaive_iterations": semi.iterations,
        "tuples_per_iteration": semi.deltas,
        "naive_tuples_per_iteration": naive.deltas,
        "naive_work": naive.work,
        "seminaive_work": semi.work,
        "identical": naive.results == semi.results,
    }
