"""Independent reference implementations used as test oracles.

Nothing here imports emdm: each oracle restates a definition as directly as
possible (quantifier loops, edge-subset enumeration, ground substitution,
breadth-first search) so that agreement with the engine means something.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterable

# ------------------------------------------------------------ pair level


def _closure(pairs: set, carrier: Iterable) -> set:
    """Transitive closure by Warshall's loops."""
    nodes = sorted(set(carrier) | {x for p in pairs for x in p})
    reach = {(x, y) for x, y in pairs}
    for k in nodes:
        for i in nodes:
            if (i, k) in reach:
                for j in nodes:
                    if (k, j) in reach:
                        reach.add((i, j))
    return reach


def pair_property(prop: str, pairs: set, carrier: Iterable) -> bool:
    """Quantifier expansion of a pair-level property of R=pairs over carrier."""
    C = sorted(set(carrier))
    R = set(pairs)
    if prop == "reflexivity":
        return all((x, x) in R for x in C)
    if prop == "irreflexivity":
        return all((x, x) not in R for x in C)
    if prop == "symmetry":
        return all((y, x) in R for x in C for y in C if (x, y) in R)
    if prop == "asymmetry":
        return all((y, x) not in R for x in C for y in C if (x, y) in R)
    if prop == "transitivity":
        return all((x, z) in R for x in C for y in C for z in C if (x, y) in R and (y, z) in R)
    if prop == "intransitivity":
        return all((x, z) not in R for x in C for y in C for z in C if (x, y) in R and (y, z) in R)
    if prop == "euclideanity":
        return all((y, z) in R for x in C for y in C for z in C if (x, y) in R and (x, z) in R)
    if prop == "ineuclideanity":
        return all((y, z) not in R for x in C for y in C for z in C if (x, y) in R and (x, z) in R)
    if prop == "equivalence":
        return all(pair_property(p, R, C) for p in ("reflexivity", "symmetry", "transitivity"))
    if prop == "acyclicity":
        return all((x, x) not in _closure(R, C) for x in C)
    if prop == "connectivity":
        return all((x, y) in R or (y, x) in R for x in C for y in C if x != y)
    raise ValueError(prop)


PAIR_PROPERTIES = (
    "reflexivity", "irreflexivity", "symmetry", "asymmetry", "transitivity", "intransitivity",
    "euclideanity", "ineuclideanity", "equivalence", "acyclicity", "connectivity",
)


def euclidean_missing(pairs: set) -> set:
    """Pairs (y, z) demanded by Euclideanity but absent."""
    return {(y, z) for (x, y) in pairs for (x2, z) in pairs if x == x2 and (y, z) not in pairs}


def all_relations(n: int):
    """Every relation on {1..n} as a frozenset of pairs, in bit order i*n+j."""
    cells = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    for mask in range(1 << len(cells)):
        yield frozenset(c for k, c in enumerate(cells) if mask >> k & 1)


# --------------------------------------------------------- autofunctions


def auto_property(prop: str, f: dict) -> bool:
    """Autofunction property of a partial map f (None = null), plain variants fail on null."""
    xs = sorted(f)

    def ap(x):
        return None if x is None else f.get(x)

    if prop == "reflexivity":
        return all(f[x] == x for x in xs)
    if prop == "irreflexivity":
        return all(f[x] != x for x in xs if f[x] is not None)
    if prop == "null_reflexivity":
        return all(f[x] == x for x in xs if f[x] is not None)
    if prop == "symmetry":
        return all(f[x] is not None and ap(f[x]) == x for x in xs)
    # null variants: R keeps only rows whose f(x) is non-null, then the plain
    # relational property is checked on R (a null f(f(x)) means a missing pair)
    if prop == "null_symmetry":
        return all(ap(f[x]) == x for x in xs if f[x] is not None)
    if prop == "asymmetry":
        return all(ap(f[x]) != x for x in xs if f[x] is not None)
    if prop == "idempotency":
        return all(f[x] is not None and ap(f[x]) == f[x] for x in xs)
    if prop == "null_idempotency":
        return all(ap(f[x]) == f[x] for x in xs if f[x] is not None)
    if prop == "anti_idempotency":
        return all(ap(f[x]) != f[x] for x in xs if f[x] is not None)
    if prop == "acyclicity":
        for x in xs:
            seen, cur = set(), x
            while cur is not None:
                if cur in seen:
                    return False
                seen.add(cur)
                cur = f.get(cur)
        return True
    if prop == "canonical_surjectivity":
        return {v for v in f.values() if v is not None} == set(xs)
    raise ValueError(prop)


# --------------------------------------------------------------- cycles


def brute_force_cycles(nodes: list, edges: list[tuple[int, str, str]]) -> set[frozenset]:
    """Elementary cycles of an undirected multigraph as sets of edge ids.

    An edge subset is an elementary cycle iff it is a self-loop on its own,
    or every touched node has degree exactly 2 and the subset is connected.
    """
    out = set()
    for eid, a, b in edges:
        if a == b:
            out.add(frozenset([eid]))
    plain = [e for e in edges if e[1] != e[2]]
    for k in range(2, len(plain) + 1):
        for subset in itertools.combinations(plain, k):
            deg: dict = {}
            for _, a, b in subset:
                deg[a] = deg.get(a, 0) + 1
                deg[b] = deg.get(b, 0) + 1
            if any(d != 2 for d in deg.values()):
                continue
            start = subset[0][1]
            seen = {start}
            todo = [start]
            while todo:
                n = todo.pop()
                for _, a, b in subset:
                    for u, v in ((a, b), (b, a)):
                        if u == n and v not in seen:
                            seen.add(v)
                            todo.append(v)
            if seen == set(deg):
                out.add(frozenset(e[0] for e in subset))
    return out


def cycle_roles(edges: list[tuple[str, str]]) -> dict[str, str]:
    """Node roles from the (source, target) pairs of an elementary cycle."""
    nodes = {x for e in edges for x in e}
    roles = {}
    for n in nodes:
        outs = sum(1 for s, _ in edges if s == n)
        ins = sum(1 for _, t in edges if t == n)
        roles[n] = "source" if outs == 2 and ins == 0 else "destination" if ins == 2 and outs == 0 else "intermediate"
    return roles


def classify_roles(length: int, roles: dict[str, str]) -> str:
    if length == 1:
        return "autofunction"
    census = list(roles.values())
    if census.count("source") == 1 and census.count("destination") == 1:
        return "commutative"
    if census.count("source") == 0 and census.count("destination") == 0:
        return "circular"
    return "general"


# -------------------------------------------------------------- datalog


def reachability(edges: set[tuple[int, int]]) -> set[tuple[int, int]]:
    succ: dict = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
    out = set()
    for s in succ:
        q = deque(succ[s])
        seen = set()
        while q:
            n = q.popleft()
            if n in seen:
                continue
            seen.add(n)
            out.add((s, n))
            q.extend(succ.get(n, ()))
    return out


def same_generation(parent: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """sg(x, y): x and y are at the same depth below a common ancestor."""
    up = {c: p for p, c in parent}
    nodes = {x for e in parent for x in e}

    def ancestors(x):
        chain = [x]
        while chain[-1] in up:
            chain.append(up[chain[-1]])
        return chain

    out = set()
    for x in nodes:
        for y in nodes:
            ax, ay = ancestors(x), ancestors(y)
            if any(ax[d] == ay[d] for d in range(1, min(len(ax), len(ay)))):
                out.add((x, y))
    return out


OPS = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _order(v):
    return (0, v, "") if isinstance(v, int) else (1, 0, v)


def ground_evaluate(rules, facts: dict[str, set[tuple]]) -> dict[str, set[tuple]]:
    """Stratified least model by exhaustive grounding over the active domain.

    `rules` is a list of (head, body) with head = (pred, terms) and body
    items ("pos"|"neg", pred, terms) or ("cmp", left, op, right); terms are
    ("var", name) or ("const", value).  Variables named "_" are fresh.
    """
    idb = {h[0] for h, _ in rules}
    level = {p: 0 for p in idb}
    changed = True
    while changed:
        changed = False
        for (hp, _), body in rules:
            for item in body:
                if item[0] in ("pos", "neg") and item[1] in idb:
                    need = level[item[1]] + (1 if item[0] == "neg" else 0)
                    if level[hp] < need:
                        level[hp] = need
                        changed = True
                        if need > len(idb):
                            raise ValueError("not stratifiable")

    domain = set()
    for rows in facts.values():
        for t in rows:
            domain.update(t)
    for (_, terms), body in rules:
        for t in terms:
            if t[0] == "const":
                domain.add(t[1])
        for item in body:
            ts = item[2] if item[0] in ("pos", "neg") else (item[1], item[3])
            for t in ts:
                if t[0] == "const":
                    domain.add(t[1])
    domain = sorted(domain, key=_order)

    db = {p: set(v) for p, v in facts.items()}
    for p in idb:
        db.setdefault(p, set())

    def rename(rule, idx):
        (hp, hterms), body = rule
        k = itertools.count()

        def fix(t):
            if t[0] == "var" and t[1] == "_":
                return ("var", f"_{idx}_{next(k)}")
            return t

        body2 = []
        for item in body:
            if item[0] in ("pos", "neg"):
                body2.append((item[0], item[1], tuple(fix(t) for t in item[2])))
            else:
                body2.append(item)
        return (hp, tuple(hterms)), body2

    rules = [rename(r, i) for i, r in enumerate(rules)]

    def value(t, sub):
        return sub[t[1]] if t[0] == "var" else t[1]

    for lvl in sorted(set(level.values())):
        layer = [r for r in rules if level[r[0][0]] == lvl]
        while True:
            new = False
            for (hp, hterms), body in layer:
                vs = sorted({t[1] for item in body if item[0] in ("pos", "neg") for t in item[2] if t[0] == "var"}
                            | {t[1] for item in body if item[0] == "cmp" for t in (item[1], item[3]) if t[0] == "var"}
                            | {t[1] for t in hterms if t[0] == "var"})
                for combo in itertools.product(domain, repeat=len(vs)):
                    sub = dict(zip(vs, combo))
                    ok = True
                    for item in body:
                        if item[0] == "pos":
                            ok = tuple(value(t, sub) for t in item[2]) in db.get(item[1], set())
                        elif item[0] == "neg":
                            ok = tuple(value(t, sub) for t in item[2]) not in db.get(item[1], set())
                        else:
                            a, b = value(item[1], sub), value(item[3], sub)
                            if type(a) is not type(b) and item[2] not in ("=", "!="):
                                ok = OPS[item[2]](_order(a), _order(b))
                            else:
                                ok = OPS[item[2]](a, b) if type(a) is type(b) else OPS[item[2]](_order(a), _order(b))
                        if not ok:
                            break
                    if ok:
                        t = tuple(value(x, sub) for x in hterms)
                        if t not in db[hp]:
                            db[hp].add(t)
                            new = True
            if not new:
                break
    return {p: db[p] for p in idb}


# ------------------------------------------------------------------ keys


def exhaustive_keys(rows: list[dict], candidates: list[str]) -> list[list[str]]:
    """All subset-minimal column sets unique over rows without nulls in them."""
    unique = []
    for k in range(1, len(candidates) + 1):
        for combo in itertools.combinations(sorted(candidates), k):
            seen = set()
            ok = True
            for r in rows:
                t = tuple(r.get(c) for c in combo)
                if any(v is None for v in t):
                    continue
                if t in seen:
                    ok = False
                    break
                seen.add(t)
            if ok:
                unique.append(frozenset(combo))
    minimal = [u for u in unique if not any(v < u for v in unique)]
    return sorted((sorted(m) for m in minimal), key=lambda m: (len(m), m))
