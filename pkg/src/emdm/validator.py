"""Instance validation against declared and implicit constraints.

Every check returns Violation records that carry a minimal witness: the
rows (set, id, relevant values) that falsify the constraint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Callable, Iterable

from .errors import TooManyMappings, UnknownConstraint
from .instance import column_types, to_json_value
from .model import (
    UNITY,
    Catalog,
    ConstraintDef,
    Const,
    InstanceDB,
    Row,
    same_value,
    value_key,
)
from .resolve import (
    AutoOp,
    ClauseOp,
    DiagramOp,
    DyadicOp,
    ExistsOp,
    HbfpOp,
    KeyOp,
    MappingInfo,
    MappingOp,
    ResolvedPath,
    SetsOp,
    constraint_mappings,
    resolve_constraint,
)

MAX_VIOLATIONS = 1000
MAX_KEY_CANDIDATES = 20


@dataclass(frozen=True)
class Witness:
    set: str
    row: int
    values: tuple[tuple[str, Any], ...] = ()

    def to_json(self) -> dict:
        return {"set": self.set, "row": self.row,
                "values": {k: to_json_value(v) for k, v in self.values}}


@dataclass(frozen=True)
class Violation:
    constraint: str
    ctype: str
    witness: tuple[Witness, ...]
    explanation: str

    def to_json(self) -> dict:
        return {
            "constraint": self.constraint,
            "ctype": self.ctype,
            "witnesses": [w.to_json() for w in self.witness],
            "explanation": self.explanation,
        }

    @property
    def coordinates(self) -> list[tuple[str, int]]:
        return [(w.set, w.row) for w in self.witness]


class ValidationReport(list):
    """List of Violations in deterministic order."""

    def to_json(self) -> list:
        return [v.to_json() for v in self]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False)


def _fmt(v: Any) -> str:
    return "null" if v is None else str(to_json_value(v))


# ---------------------------------------------------------------- context


class _Ctx:
    def __init__(self, catalog: Catalog, instance: InstanceDB):
        self.catalog = catalog
        self.instance = instance

    def rows(self, set_name: str) -> list[Row]:
        return sorted(self.instance.of(set_name).rows, key=lambda r: r.id)

    def row(self, set_name: str, rid: Any) -> Row | None:
        return self.instance.of(set_name).get(rid)

    def follow(self, rp: ResolvedPath, row: Row | None) -> Any:
        cur = row
        val = None
        for i, step in enumerate(rp.steps):
            if cur is None:
                return None
            val = cur.get(step.name)
            if val is None:
                return None
            if i < len(rp.steps) - 1:
                cur = self.row(step.codomain, val)
        return val

    @staticmethod
    def wit(set_name: str, row: Row, cols: Iterable[str] = ()) -> Witness:
        return Witness(set_name, row.id, tuple((c, row.get(c)) for c in cols))


# ------------------------------------------------------ pair-level checks

PairMap = dict  # (x, y) -> list[Witness]


def _sorted_pairs(pairs: PairMap) -> list[tuple[Any, Any]]:
    return sorted(pairs, key=lambda p: (value_key(p[0]), value_key(p[1])))


def _dedupe(ws: Iterable[Witness]) -> tuple[Witness, ...]:
    out: list[Witness] = []
    for w in ws:
        if w not in out:
            out.append(w)
    return tuple(out)


def pair_violations(
    prop: str,
    pairs: PairMap,
    carrier: list,
    carrier_wit: Callable[[Any], list[Witness]],
) -> list[tuple[tuple[Witness, ...], str]]:
    """Violations of one pair-level property of relation `pairs` over `carrier`."""
    out: list[tuple[tuple[Witness, ...], str]] = []
    ordered = _sorted_pairs(pairs)
    succ: dict = {}
    for x, y in ordered:
        succ.setdefault(x, []).append(y)
    present = set(pairs)

    def has(a, b) -> bool:
        return (a, b) in present

    if prop == "reflexivity":
        for x in carrier:
            if not has(x, x):
                out.append((_dedupe(carrier_wit(x)), f"({_fmt(x)}, {_fmt(x)}) is missing"))
    elif prop == "irreflexivity":
        for x, y in ordered:
            if same_value(x, y):
                out.append((_dedupe(pairs[(x, y)]), f"({_fmt(x)}, {_fmt(x)}) is present"))
    elif prop == "symmetry":
        for x, y in ordered:
            if not has(y, x):
                out.append((_dedupe(pairs[(x, y)]),
                            f"({_fmt(x)}, {_fmt(y)}) is present but ({_fmt(y)}, {_fmt(x)}) is missing"))
    elif prop == "asymmetry":
        for x, y in ordered:
            if has(y, x) and value_key(x) <= value_key(y):
                ws = list(pairs[(x, y)]) + (list(pairs[(y, x)]) if (y, x) != (x, y) else [])
                out.append((_dedupe(ws), f"both ({_fmt(x)}, {_fmt(y)}) and ({_fmt(y)}, {_fmt(x)}) are present"))
    elif prop == "transitivity":
        missing: dict = {}
        for x, y in ordered:
            for z in succ.get(y, ()):
                if not has(x, z) and (x, z) not in missing:
                    missing[(x, z)] = (_dedupe(list(pairs[(x, y)]) + list(pairs[(y, z)])),
                                       f"({_fmt(x)}, {_fmt(y)}) and ({_fmt(y)}, {_fmt(z)}) are present "
                                       f"but ({_fmt(x)}, {_fmt(z)}) is missing")
        out.extend(missing[k] for k in _sorted_pairs(missing))
    elif prop == "intransitivity":
        bad: dict = {}
        for x, y in ordered:
            for z in succ.get(y, ()):
                if has(x, z) and (x, z) not in bad:
                    bad[(x, z)] = (_dedupe(list(pairs[(x, y)]) + list(pairs[(y, z)]) + list(pairs[(x, z)])),
                                   f"({_fmt(x)}, {_fmt(y)}), ({_fmt(y)}, {_fmt(z)}) and ({_fmt(x)}, {_fmt(z)}) "
                                   "are all present")
        out.extend(bad[k] for k in _sorted_pairs(bad))
    elif prop == "euclideanity":
        missing = {}
        for x, y in ordered:
            for z in succ.get(x, ()):
                if not has(y, z) and (y, z) not in missing:
                    missing[(y, z)] = (_dedupe(list(pairs[(x, y)]) + list(pairs[(x, z)])),
                                       f"({_fmt(x)}, {_fmt(y)}) and ({_fmt(x)}, {_fmt(z)}) are present "
                                       f"but ({_fmt(y)}, {_fmt(z)}) is missing")
        out.extend(missing[k] for k in _sorted_pairs(missing))
    elif prop == "ineuclideanity":
        bad = {}
        for x, y in ordered:
            for z in succ.get(x, ()):
                if has(y, z) and (y, z) not in bad:
                    bad[(y, z)] = (_dedupe(list(pairs[(x, y)]) + list(pairs[(x, z)]) + list(pairs[(y, z)])),
                                   f"({_fmt(x)}, {_fmt(y)}), ({_fmt(x)}, {_fmt(z)}) and ({_fmt(y)}, {_fmt(z)}) "
                                   "are all present")
        out.extend(bad[k] for k in _sorted_pairs(bad))
    elif prop == "equivalence":
        for sub in ("reflexivity", "symmetry", "transitivity"):
            out.extend((w, f"not {sub[:-3]}ive: {e}" if sub != "symmetry" else f"not symmetric: {e}")
                       for w, e in pair_violations(sub, pairs, carrier, carrier_wit))
    elif prop == "acyclicity":
        for cycle in _cycles_by_component(ordered, succ):
            ws: list[Witness] = []
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                ws.extend(pairs[(a, b)])
            text = " -> ".join(_fmt(v) for v in cycle + cycle[:1])
            out.append((_dedupe(ws), f"cycle {text}"))
    elif prop == "connectivity":
        for x, y in combinations(carrier, 2):
            if not has(x, y) and not has(y, x):
                out.append((_dedupe(carrier_wit(x) + carrier_wit(y)),
                            f"neither ({_fmt(x)}, {_fmt(y)}) nor ({_fmt(y)}, {_fmt(x)}) is present"))
    else:
        raise ValueError(f"unknown pair property {prop!r}")
    return out


def _cycles_by_component(ordered: list, succ: dict) -> list[list]:
    """One witness cycle per cyclic strongly connected component."""
    nodes: list = []
    for x, y in ordered:
        for v in (x, y):
            if v not in nodes:
                nodes.append(v)
    nodes.sort(key=value_key)
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    comps: list[list] = []
    counter = [0]

    def strong(v):
        # iterative Tarjan
        work = [(v, iter(succ.get(v, ())))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                comps.append(comp)

    for v in nodes:
        if v not in index:
            strong(v)

    cycles = []
    for comp in comps:
        members = set(comp)
        start = min(comp, key=value_key)
        if len(comp) == 1 and start not in succ.get(start, ()):
            continue
        # shortest cycle back to start inside the component (BFS)
        prev = {start: None}
        queue = [start]
        found = None
        while queue and found is None:
            nxt = []
            for u in queue:
                for w in succ.get(u, ()):
                    if w == start:
                        found = u
                        break
                    if w in members and w not in prev:
                        prev[w] = u
                        nxt.append(w)
                if found is not None:
                    break
            queue = nxt
        path = [found]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        cycles.append(list(reversed(path)))
    cycles.sort(key=lambda c: value_key(c[0]))
    return cycles


# ------------------------------------------------------------- per family


def _check_sets(ctx: _Ctx, tag: str, op: SetsOp):
    ids = {s: set(ctx.instance.of(s).ids()) for s in op.sets}
    out = []

    def not_in(a: str, b_sets: list[str], label: str):
        union = set().union(*(ids[b] for b in b_sets))
        for rid in sorted(ids[a] - union):
            out.append(((Witness(a, rid),), f"{a}#{rid} is not in {label}"))

    def overlap(parts: tuple[str, ...]):
        for a, b in combinations(parts, 2):
            for rid in sorted(ids[a] & ids[b]):
                out.append(((Witness(a, rid), Witness(b, rid)), f"#{rid} is in both {a} and {b}"))

    if tag == "set_inclusion":
        s, t = op.sets
        not_in(s, [t], t)
    elif tag == "set_equality":
        s, t = op.sets
        not_in(s, [t], t)
        not_in(t, [s], s)
    elif tag == "set_disjointness":
        overlap(op.sets)
    elif tag in ("set_union", "set_direct_sum"):
        u, parts = op.sets[0], list(op.sets[1:])
        not_in(u, parts, " ∪ ".join(parts))
        for p in parts:
            not_in(p, [u], u)
        if tag == "set_direct_sum":
            overlap(tuple(parts))
    return out


def _check_dyadic(ctx: _Ctx, prop: str, op: DyadicOp):
    pairs: PairMap = {}
    for r in ctx.rows(op.rel):
        x, y = r.get(op.left), r.get(op.right)
        if x is None or y is None:
            continue
        pairs.setdefault((x, y), [ctx.wit(op.rel, r, (op.left, op.right))])
    carrier = sorted(ctx.instance.of(op.carrier).ids())
    return pair_violations(prop, pairs, carrier, lambda x: [Witness(op.carrier, x)])


_HBFP_NULL_STRICT = {"symmetry", "transitivity", "euclideanity", "equivalence"}


def _check_hbfp(ctx: _Ctx, tag: str, op: HbfpOp):
    prop = tag[len("hbfp_"):]
    cols = (op.f.name, op.g.name)
    out = []
    pairs: PairMap = {}
    first_seen: dict = {}
    rows = ctx.rows(op.source)
    for r in rows:
        fv, gv = r.get(op.f.name), r.get(op.g.name)
        if fv is None or gv is None:
            if prop in _HBFP_NULL_STRICT:
                out.append(((ctx.wit(op.source, r, cols),),
                            f"null value in ({op.f.name}, {op.g.name}) on {op.source}#{r.id}"))
            continue
        if prop == "null_reflexivity":
            if not same_value(fv, gv):
                out.append(((ctx.wit(op.source, r, cols),),
                            f"{op.f.name} = {_fmt(fv)} differs from {op.g.name} = {_fmt(gv)}"))
            continue
        pairs.setdefault((fv, gv), [ctx.wit(op.source, r, cols)])
        for v in (fv, gv):
            first_seen.setdefault(v, ctx.wit(op.source, r, cols))
    if prop == "null_reflexivity":
        return out
    base = prop[len("null_"):] if prop.startswith("null_") else prop
    carrier = sorted(first_seen, key=value_key)
    out.extend(pair_violations(base, pairs, carrier, lambda v: [first_seen[v]]))
    return out


def _check_auto(ctx: _Ctx, prop: str, op: AutoOp):
    rp = op.path
    a = op.carrier
    label = str(rp)
    rows = ctx.rows(a)
    out = []

    def w(row: Row, value: Any) -> Witness:
        return Witness(a, row.id, ((label, value),))

    image = {}
    fmap = {}
    for r in rows:
        fmap[r.id] = ctx.follow(rp, r)
    for r in rows:
        fx = fmap[r.id]
        x = r.id
        if fx is not None:
            image.setdefault(fx, r)
        target = ctx.row(a, fx) if fx is not None else None
        ffx = fmap.get(target.id) if target is not None else None
        ws = [w(r, fx)] + ([w(target, ffx)] if target is not None and target.id != x else [])
        if prop in ("reflexivity", "symmetry", "idempotency") and fx is None:
            out.append(((w(r, fx),), f"{label}({x}) is null"))
            continue
        if prop in ("reflexivity", "null_reflexivity"):
            if fx is not None and not same_value(fx, x):
                out.append(((w(r, fx),), f"{label}({x}) = {_fmt(fx)}, not {x}"))
        elif prop == "irreflexivity":
            if fx is not None and same_value(fx, x):
                out.append(((w(r, fx),), f"{label}({x}) = {x}"))
        elif prop in ("symmetry", "null_symmetry"):
            if fx is not None and not same_value(ffx, x):
                out.append((tuple(ws), f"{label}({label}({x})) = {_fmt(ffx)}, not {x}"))
        elif prop == "asymmetry":
            if fx is not None and same_value(ffx, x) and x <= fx:
                out.append((tuple(ws), f"{label}({x}) = {_fmt(fx)} and {label}({_fmt(fx)}) = {x}"))
        elif prop in ("idempotency", "null_idempotency"):
            if fx is not None and not same_value(ffx, fx):
                out.append((tuple(ws), f"{label}({label}({x})) = {_fmt(ffx)}, not {_fmt(fx)}"))
        elif prop == "anti_idempotency":
            if fx is not None and ffx is not None and same_value(ffx, fx):
                out.append((tuple(ws), f"{label}({label}({x})) = {label}({x}) = {_fmt(fx)}"))
    if prop == "acyclicity":
        by_id = {r.id: r for r in rows}
        state: dict = {}
        for r in rows:
            trail = []
            cur = r.id
            while cur is not None and cur in by_id and cur not in state:
                state[cur] = r.id
                trail.append(cur)
                cur = fmap[cur]
            if cur is not None and state.get(cur) == r.id and cur in trail:
                cyc = trail[trail.index(cur):]
                k = cyc.index(min(cyc))
                cyc = cyc[k:] + cyc[:k]
                text = " -> ".join(_fmt(v) for v in cyc + cyc[:1])
                out.append((tuple(w(by_id[v], fmap[v]) for v in cyc), f"cycle {text}"))
    elif prop == "canonical_surjectivity":
        for r in rows:
            if not any(same_value(v, r.id) for v in image):
                out.append(((Witness(a, r.id),), f"{a}#{r.id} is not in the image of {label}"))
    return out


def _check_mapping(ctx: _Ctx, c: ConstraintDef, m: MappingInfo):
    tag = c.ctype
    rows = ctx.rows(m.domain)
    out = []
    if tag == "map_totality":
        for r in rows:
            if r.get(m.name) is None:
                out.append(((ctx.wit(m.domain, r, (m.name,)),), f"{m.name} is null"))
    if tag in ("map_one_to_one", "map_bijectivity"):
        groups: dict = {}
        for r in rows:
            v = r.get(m.name)
            if v is not None:
                groups.setdefault(value_key(v), []).append(r)
        for key in sorted(groups):
            rs = groups[key]
            if len(rs) > 1:
                out.append((tuple(ctx.wit(m.domain, r, (m.name,)) for r in rs),
                            f"{len(rs)} rows share {m.name} = {_fmt(rs[0].get(m.name))}"))
    if tag in ("map_ontoness", "map_bijectivity"):
        image = {value_key(r.get(m.name)) for r in rows if r.get(m.name) is not None}
        cat = ctx.catalog
        if cat.has_set(m.codomain) and cat.lookup_set(m.codomain).is_object:
            for rid in sorted(ctx.instance.of(m.codomain).ids()):
                if value_key(rid) not in image:
                    out.append(((Witness(m.codomain, rid),),
                                f"{m.codomain}#{rid} is not the {m.name} of any {m.domain}"))
        else:
            spec = cat.value_spec(m.codomain)
            universe = spec.enumeration if spec.enumeration is not None else (False, True)
            for v in universe:
                if value_key(v) not in image:
                    out.append(((), f"value {_fmt(v)} of {m.codomain} is not taken by {m.name}"))
    if tag == "map_nonprimeness":
        for other in ctx.catalog.constraints:
            if other.ctype not in ("fp_key", "map_one_to_one", "map_bijectivity"):
                continue
            try:
                names = constraint_mappings(ctx.catalog, other)
            except Exception:
                continue
            if (m.domain, m.name) in names:
                out.append(((), f"{m.name} is declared nonprime but is part of key {other.name}"))
    if tag == "map_default_value":
        mdef = next((x for x in ctx.catalog.mappings if x.domain == m.domain and x.name == m.name), None)
        default = mdef.default_value if mdef else None
        if default is None:
            out.append(((), f"{m.name} declares no default value"))
        else:
            spec = ctx.catalog.value_spec(m.codomain)
            if spec is not None:
                reason = spec.violation(default)
                if reason:
                    out.append(((), f"default of {m.name}: {reason}"))
            elif isinstance(default, bool) or not isinstance(default, int):
                out.append(((), f"default of {m.name} must be a row id of {m.codomain}"))
    return out


def _check_key(ctx: _Ctx, c: ConstraintDef, op: KeyOp):
    out = []
    names = [i.name for i in op.items]
    mine = set(names)
    for other in ctx.catalog.constraints:
        if other.name == c.name:
            continue
        try:
            r = resolve_constraint(ctx.catalog, other)
        except Exception:
            continue
        sub = None
        if isinstance(r, KeyOp) and r.source == op.source:
            sub = {i.name for i in r.items}
        elif isinstance(r, MappingOp) and other.ctype in ("map_one_to_one", "map_bijectivity") \
                and r.mapping.domain == op.source:
            sub = {r.mapping.name}
        if sub is not None and sub < mine:
            out.append(((), f"key ({', '.join(names)}) is not minimal: {other.name} "
                            f"already makes ({', '.join(sorted(sub))}) a key"))
    groups: dict = {}
    for r in ctx.rows(op.source):
        vals = [r.get(n) for n in names]
        if any(v is None for v in vals):
            continue
        groups.setdefault(tuple(value_key(v) for v in vals), []).append(r)
    for key in sorted(groups):
        rs = groups[key]
        if len(rs) > 1:
            shown = ", ".join(f"{n} = {_fmt(rs[0].get(n))}" for n in names)
            out.append((tuple(ctx.wit(op.source, r, names) for r in rs),
                        f"{len(rs)} rows share ({shown})"))
    return out


def _check_exists(ctx: _Ctx, tag: str, op: ExistsOp):
    out = []
    cols = [op.f.name] + [g.name for g in op.givens if g.name != UNITY]
    given = ", ".join(g.name for g in op.givens)
    for r in ctx.rows(op.source):
        if any(r.get(g.name) is None for g in op.givens):
            continue
        fv = r.get(op.f.name)
        if tag == "fp_existence" and fv is None:
            out.append(((ctx.wit(op.source, r, cols),), f"{op.f.name} is null although {given} is not"))
        if tag == "fp_nonexistence" and fv is not None:
            out.append(((ctx.wit(op.source, r, cols),), f"{op.f.name} is not null although {given} is not"))
    return out


def _check_diagram(ctx: _Ctx, tag: str, op: DiagramOp):
    out = []
    src = op.p.source
    for r in ctx.rows(src):
        pv, qv = ctx.follow(op.p, r), ctx.follow(op.q, r)
        equal = same_value(pv, qv)
        w = Witness(src, r.id, ((str(op.p), pv), (str(op.q), qv)))
        if tag == "fd_commutativity" and not equal:
            out.append(((w,), f"{op.p} = {_fmt(pv)} but {op.q} = {_fmt(qv)}"))
        if tag == "fd_anti_commutativity" and equal:
            out.append(((w,), f"{op.p} = {op.q} = {_fmt(pv)}"))
    return out


_ORDERING = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def compare3(left: Any, op: str, right: Any) -> bool | None:
    """Three-valued comparison: None when either side is null or incomparable."""
    import datetime as _dt

    if left is None or right is None:
        return None
    if isinstance(left, _dt.date) and isinstance(right, str):
        try:
            right = _dt.date.fromisoformat(right)
        except ValueError:
            return None
    if isinstance(right, _dt.date) and isinstance(left, str):
        try:
            left = _dt.date.fromisoformat(left)
        except ValueError:
            return None
    lk, rk = value_key(left), value_key(right)
    if lk[0] != rk[0]:
        return None
    if op == "=":
        return lk == rk
    if op == "!=":
        return lk != rk
    return _ORDERING[op](lk[1], rk[1])


def eval_clause(ctx: _Ctx, op: ClauseOp, row: Row) -> tuple[bool | None, dict]:
    seen: dict = {}
    result: bool | None = False
    for lit in op.literals:
        sides = []
        for side in (lit.left, lit.right):
            if isinstance(side, ResolvedPath):
                v = ctx.follow(side, row)
                seen[str(side)] = v
                sides.append(v)
            else:
                sides.append(side.value if isinstance(side, Const) else side)
        truth = compare3(sides[0], lit.op, sides[1])
        if truth is not None and not lit.positive:
            truth = not truth
        if truth is True:
            result = True
        elif truth is None and result is False:
            result = None
    return result, seen


def _check_clause(ctx: _Ctx, op: ClauseOp):
    out = []
    for r in ctx.rows(op.anchor):
        truth, seen = eval_clause(ctx, op, r)
        if truth is False:
            out.append(((Witness(op.anchor, r.id, tuple(seen.items())),),
                        f"clause is false for {op.anchor}#{r.id}"))
    return out


def _raw_violations(catalog: Catalog, instance: InstanceDB, c: ConstraintDef):
    from . import registry

    ctx = _Ctx(catalog, instance)
    r = resolve_constraint(catalog, c)
    tag = c.ctype
    if isinstance(r, SetsOp):
        return _check_sets(ctx, tag, r)
    if isinstance(r, DyadicOp):
        return _check_dyadic(ctx, registry.PAIR_PROPERTY[tag], r)
    if isinstance(r, HbfpOp):
        return _check_hbfp(ctx, tag, r)
    if isinstance(r, AutoOp):
        auto_tag = registry.LOCAL_TO_AUTO.get(tag, tag)
        return _check_auto(ctx, auto_tag[len("auto_"):], r)
    if isinstance(r, MappingOp):
        return _check_mapping(ctx, c, r.mapping)
    if isinstance(r, KeyOp):
        return _check_key(ctx, c, r)
    if isinstance(r, ExistsOp):
        return _check_exists(ctx, tag, r)
    if isinstance(r, DiagramOp):
        return _check_diagram(ctx, tag, r)
    if isinstance(r, ClauseOp):
        return _check_clause(ctx, r)
    raise UnknownConstraint(f"cannot check {tag}")


def _finish(name: str, ctype: str, raw) -> list[Violation]:
    vs = [Violation(name, ctype, w, e) for w, e in raw]
    vs.sort(key=lambda v: ([(x.set, x.row) for x in v.witness], v.explanation))
    if len(vs) > MAX_VIOLATIONS:
        extra = len(vs) - MAX_VIOLATIONS
        vs = vs[:MAX_VIOLATIONS]
        vs.append(Violation(name, ctype, (), f"truncated: {extra} further violation(s) omitted"))
    return vs


def check_constraint(catalog: Catalog, instance: InstanceDB, constraint_name: str) -> list[Violation]:
    """Violations of one declared constraint; [] iff it holds on `instance`."""
    try:
        c = catalog.lookup_constraint(constraint_name)
    except Exception:
        raise UnknownConstraint(f"no constraint named {constraint_name!r}") from None
    return _finish(c.name, c.ctype, _raw_violations(catalog, instance, c))


def check_definition(catalog: Catalog, instance: InstanceDB, c: ConstraintDef) -> list[Violation]:
    """Like check_constraint, for a ConstraintDef not (necessarily) in the catalog."""
    return _finish(c.name, c.ctype, _raw_violations(catalog, instance, c))


def relational_violations(catalog: Catalog, instance: InstanceDB) -> list[Violation]:
    """The implicit domain and referential-integrity checks, domain first."""
    domain: list[Violation] = []
    refs: list[Violation] = []
    for sdef in catalog.object_sets():
        inst = instance.of(sdef.name)
        if not len(inst):
            continue
        cols = column_types(catalog, sdef.name)
        for col, (kind, target) in cols.items():
            dom_raw, ref_raw = [], []
            for r in sorted(inst.rows, key=lambda r: r.id):
                v = r.get(col)
                if v is None:
                    continue
                w = (Witness(sdef.name, r.id, ((col, v),)),)
                if kind == "ref":
                    if isinstance(v, bool) or not isinstance(v, int):
                        dom_raw.append((w, f"{_fmt(v)} is not a row id of {target}"))
                    elif instance.of(target).get(v) is None:
                        ref_raw.append((w, f"{col} = {v} does not exist in {target}"))
                else:
                    spec = catalog.value_spec(target)
                    reason = spec.violation(v) if spec is not None else None
                    if reason:
                        dom_raw.append((w, reason))
            domain.extend(_finish(f"{sdef.name}_{col}_domain", "rel_domain", dom_raw))
            refs.extend(_finish(f"{sdef.name}_{col}_refint", "rel_referential_integrity", ref_raw))
    return domain + refs


def validate_instance(catalog: Catalog, instance: InstanceDB) -> ValidationReport:
    report = ValidationReport()
    for c in catalog.constraints:
        report.extend(check_constraint(catalog, instance, c.name))
    report.extend(relational_violations(catalog, instance))
    return report


# ------------------------------------------------------------ key discovery


def _unique(rows: list[Row], cols: tuple[str, ...]) -> bool:
    seen = set()
    for r in rows:
        vals = [r.get(c) for c in cols]
        if any(v is None for v in vals):
            continue
        k = tuple(value_key(v) for v in vals)
        if k in seen:
            return False
        seen.add(k)
    return True


def key_candidates(catalog: Catalog, set_name: str) -> list[str]:
    from .resolve import constraint_mappings

    nonprime = set()
    for c in catalog.constraints:
        if c.ctype == "map_nonprimeness":
            try:
                nonprime |= constraint_mappings(catalog, c)
            except Exception:
                pass
    return [c for c in catalog.columns_of(set_name) if (set_name, c) not in nonprime]


def discover_keys(catalog: Catalog, instance: InstanceDB, set_name: str) -> list[list[str]]:
    """All subset-minimal one-to-one mapping products on `set_name`.

    Levelwise search; supersets of found keys are pruned, which is sound
    because null-exempt uniqueness is monotone in the column set.
    """
    catalog.lookup_set(set_name)
    cands = key_candidates(catalog, set_name)
    if len(cands) > MAX_KEY_CANDIDATES:
        raise TooManyMappings(f"{set_name} has {len(cands)} key candidates (limit {MAX_KEY_CANDIDATES})")
    rows = list(instance.of(set_name).rows)
    found: list[frozenset] = []
    for size in range(1, len(cands) + 1):
        for combo in combinations(cands, size):
            s = frozenset(combo)
            if any(k <= s for k in found):
                continue
            if _unique(rows, combo):
                found.append(s)
    keys = [sorted(k) for k in found]
    keys.sort(key=lambda k: (len(k), k))
    return keys
