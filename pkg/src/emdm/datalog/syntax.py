"""Datalog abstract syntax: terms, atoms, literals, rules, programs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Var:
    name: str

    @property
    def anonymous(self) -> bool:
        return self.name == "_"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: int | str

    def __str__(self) -> str:
        if isinstance(self.value, int):
            return str(self.value)
        if self.value.isidentifier() and self.value[:1].islower() and self.value not in ("not",):
            return self.value
        return json.dumps(self.value, ensure_ascii=False)


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    pred: str
    terms: tuple[Term, ...]

    @property
    def arity(self) -> int:
        return len(self.terms)

    def variables(self) -> list[str]:
        return [t.name for t in self.terms if isinstance(t, Var) and not t.anonymous]

    def __str__(self) -> str:
        return f"{self.pred}({', '.join(str(t) for t in self.terms)})"


@dataclass(frozen=True)
class PredLiteral:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        return ("" if self.positive else "!") + str(self.atom)


@dataclass(frozen=True)
class Compare:
    left: Term
    op: str
    right: Term

    def variables(self) -> list[str]:
        return [t.name for t in (self.left, self.right) if isinstance(t, Var)]

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


BodyLiteral = Union[PredLiteral, Compare]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[BodyLiteral, ...] = ()

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}"
        return f"{self.head} :- {', '.join(str(b) for b in self.body)}"

    def positive_atoms(self) -> list[Atom]:
        return [b.atom for b in self.body if isinstance(b, PredLiteral) and b.positive]

    def negative_atoms(self) -> list[Atom]:
        return [b.atom for b in self.body if isinstance(b, PredLiteral) and not b.positive]

    def comparisons(self) -> list[Compare]:
        return [b for b in self.body if isinstance(b, Compare)]


@dataclass(frozen=True)
class DatalogProgramDef:
    name: str
    rules: tuple[Rule, ...] = ()
    kind: str = "user"

    def intensional(self) -> list[str]:
        seen: list[str] = []
        for r in self.rules:
            if r.head.pred not in seen:
                seen.append(r.head.pred)
        return seen
