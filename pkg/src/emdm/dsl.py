"""The .emdm schema language: tokenizer, parser and canonical serializer.

The grammar is documented in docs/grammar.md.  Parsing is all-or-nothing:
either a Catalog comes back or ParseFailure carries every error found, each
with a source span.  Name resolution happens later (validate_schema).
"""

from __future__ import annotations

import datetime as _dt
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any

from . import registry
from .datalog.syntax import (
    Atom,
    Compare,
    Const as DConst,
    DatalogProgramDef,
    PredLiteral,
    Rule,
    Var,
)
from .errors import IllFormedCatalog, ParseFailure
from .model import (
    BASES,
    BUILTIN_VALUE_TYPES,
    Catalog,
    Comparison,
    ConstraintDef,
    Const,
    DiagramDef,
    HornClause,
    Literal,
    MappingDef,
    Path,
    Product,
    SetDef,
    ValueTypeSpec,
    format_literal,
)

DEFAULT_DB = "db"
DEFAULT_PROGRAM = "main"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"{self.span}: {self.message}{exp}"

    def to_json(self) -> dict:
        return {
            "line": self.span.line,
            "column": self.span.column,
            "length": self.span.length,
            "message": self.message,
            "expected": list(self.expected),
        }


# ----------------------------------------------------------------- tokenizer


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER STRING OP EOF
    text: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, max(1, len(self.text)))


_OPS = sorted(
    [":-", "::", "->", "..", "!=", "<=", ">=", "≠", "≤", "≥", "¬",
     ";", ":", ",", "(", ")", "{", "}", "[", "]", ".", "=", "<", ">", "!", "|", "-"],
    key=len,
    reverse=True,
)
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<number>\d+(?:\.\d+)?)"
    r'|(?P<string>"(?:[^"\\\n]|\\.)*")'
    r"|(?P<op>" + "|".join(re.escape(o) for o in _OPS) + ")"
)


def tokenize(text: str) -> tuple[list[Token], list[ParseError]]:
    tokens: list[Token] = []
    errors: list[ParseError] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            errors.append(ParseError(SourceSpan(line, col, 1), f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        else:
            tokens.append(Token({"ident": "IDENT", "number": "NUMBER", "string": "STRING", "op": "OP"}[kind],
                                chunk, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens, errors


# -------------------------------------------------------------------- parser


class _Error(Exception):
    def __init__(self, token: Token, message: str, expected=()):
        self.error = ParseError(token.span, message, tuple(expected))


@dataclass
class _RawConstraint:
    name: str | None
    abbr: str
    operands: tuple
    derived_by: str | None
    token: Token


@dataclass
class _State:
    db_name: str | None = None
    sets: list = field(default_factory=list)
    mappings: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    diagrams: list = field(default_factory=list)
    programs: dict = field(default_factory=dict)  # name -> [kind, rules]


_CMP = {"=": "=", "!=": "!=", "≠": "!=", "<": "<", "<=": "<=", "≤": "<=",
        ">": ">", ">=": ">=", "≥": ">="}
_MAPPING_KW = {"attr": "Attribute", "fn": "StructuralFunction", "sysmap": "System", "compmap": "Computed"}
_NEG = ("!", "¬")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0
        self.state = _State()
        self.errors: list[ParseError] = []

    # cursor helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, kind: str | None = None) -> bool:
        t = self.tok
        return t.text == text and t.kind in ((kind,) if kind else ("OP", "IDENT"))

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def expect_op(self, text: str) -> Token:
        if self.tok.kind == "OP" and self.tok.text == text:
            return self.advance()
        raise _Error(self.tok, f"expected {text!r}, found {self.describe(self.tok)}", [repr(text)])

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind == "IDENT":
            return self.advance()
        raise _Error(self.tok, f"expected {what}, found {self.describe(self.tok)}", [what])

    def expect_kw(self, word: str) -> Token:
        if self.tok.kind == "IDENT" and self.tok.text == word:
            return self.advance()
        raise _Error(self.tok, f"expected {word!r}, found {self.describe(self.tok)}", [repr(word)])

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "EOF" else repr(t.text)

    def recover(self) -> None:
        while self.tok.kind != "EOF":
            t = self.advance()
            if t.kind == "OP" and t.text == ";":
                return

    # entry point
    def parse(self) -> None:
        while self.tok.kind != "EOF":
            start = self.i
            try:
                self.statement()
            except _Error as exc:
                self.errors.append(exc.error)
                if self.i == start:
                    self.advance()
                self.recover()

    def statement(self) -> None:
        t = self.tok
        if t.kind != "IDENT":
            raise _Error(t, f"expected a declaration, found {self.describe(t)}", ["declaration keyword"])
        kw = t.text
        handler = {
            "database": self.p_database,
            "entity": self.p_entity,
            "relationship": self.p_relationship,
            "valueset": self.p_valueset,
            "computed": self.p_computed,
            "system": self.p_system,
            "constraint": self.p_constraint,
            "diagram": self.p_diagram,
            "program": self.p_program,
            "rule": self.p_rule,
        }.get(kw)
        if handler is None and kw in _MAPPING_KW:
            handler = self.p_mapping
        if handler is None:
            raise _Error(t, f"unknown declaration {kw!r}", ["declaration keyword"])
        self.advance()
        handler(t)

    def end(self) -> None:
        self.expect_op(";")

    # declarations
    def p_database(self, kw: Token) -> None:
        name = self.expect_ident("database name")
        self.end()
        if self.state.db_name is not None:
            raise _Error(kw, "database declared twice")
        self.state.db_name = name.text

    def p_entity(self, kw: Token) -> None:
        name = self.expect_ident("set name")
        self.end()
        self.state.sets.append(SetDef(name.text, "Entity"))

    def p_system(self, kw: Token) -> None:
        name = self.expect_ident("set name")
        self.end()
        self.state.sets.append(SetDef(name.text, "System"))

    def p_computed(self, kw: Token) -> None:
        name = self.expect_ident("set name")
        self.expect_op("=")
        formula = self.p_string()
        self.end()
        self.state.sets.append(SetDef(name.text, "Computed", computed_formula=formula))

    def p_relationship(self, kw: Token) -> None:
        name = self.expect_ident("set name")
        self.expect_op("(")
        roles = []
        while True:
            role = self.expect_ident("role name")
            self.expect_op(":")
            target = self.expect_ident("set name")
            roles.append((role.text, target.text))
            if self.tok.kind == "OP" and self.tok.text == ",":
                self.advance()
                continue
            break
        self.expect_op(")")
        self.end()
        self.state.sets.append(SetDef(name.text, "Relationship", rel_sorts=tuple(roles)))

    def p_valueset(self, kw: Token) -> None:
        name = self.expect_ident("set name")
        self.expect_op(":")
        base_tok = self.expect_ident("base type")
        if base_tok.text not in BUILTIN_VALUE_TYPES:
            raise _Error(base_tok, f"unknown base type {base_tok.text!r}", list(BASES))
        builtin = BUILTIN_VALUE_TYPES[base_tok.text]
        lo, hi = builtin.min, builtin.max
        enumeration = None
        pattern = None
        if self.tok.kind == "OP" and self.tok.text == "[":
            self.advance()
            if not self.at("..", "OP"):
                lo = self.p_literal()
            self.expect_op("..")
            if not self.at("]", "OP"):
                hi = self.p_literal()
            self.expect_op("]")
        if self.at("in", "IDENT"):
            self.advance()
            self.expect_op("{")
            values = [self.p_literal()]
            while self.at(",", "OP"):
                self.advance()
                values.append(self.p_literal())
            self.expect_op("}")
            enumeration = tuple(values)
        if self.at("pattern", "IDENT"):
            self.advance()
            pattern = self.p_string()
        self.end()
        base = builtin.base
        spec = ValueTypeSpec(base, _coerce(base, lo), _coerce(base, hi),
                             tuple(_coerce(base, v) for v in enumeration) if enumeration else None,
                             pattern)
        self.state.sets.append(SetDef(name.text, "Value", value_spec=spec))

    def p_mapping(self, kw: Token) -> None:
        kind = _MAPPING_KW[kw.text]
        name = self.expect_ident("mapping name")
        self.expect_op(":")
        dom = self.expect_ident("domain set")
        self.expect_op("->")
        cod = self.expect_ident("codomain set")
        default = None
        formula = None
        if kind == "Computed":
            self.expect_op("=")
            formula = self.p_string()
        elif self.at("default", "IDENT"):
            self.advance()
            default = self.p_literal()
        self.end()
        self.state.mappings.append(MappingDef(name.text, kind, dom.text, cod.text, default, formula))

    def p_constraint(self, kw: Token) -> None:
        name = None
        if self.tok.kind == "IDENT" and self.peek().kind == "OP" and self.peek().text == ":":
            name = self.advance().text
            self.advance()
        tag_tok = self.expect_ident("constraint type")
        self.expect_op("(")
        operands: tuple = ()
        if not self.at(")", "OP"):
            if self.tok.kind == "IDENT" and self.peek().kind == "OP" and self.peek().text == ":":
                operands = (self.p_clause(),)
            else:
                items = [self.p_operand()]
                while self.at(",", "OP"):
                    self.advance()
                    items.append(self.p_operand())
                operands = tuple(items)
        self.expect_op(")")
        derived = None
        if self.at("derived", "IDENT"):
            self.advance()
            derived = self.expect_ident("theorem name").text
        self.end()
        if tag_tok.text not in registry.BY_TAG and not registry.tags_with_abbreviation(tag_tok.text):
            raise _Error(tag_tok, f"unknown constraint type {tag_tok.text!r}", ["constraint type"])
        self.state.constraints.append(_RawConstraint(name, tag_tok.text, operands, derived, tag_tok))

    def p_operand(self):
        if self.at("(", "OP"):
            self.advance()
            items = [self.p_path()]
            while self.at(",", "OP"):
                self.advance()
                items.append(self.p_path())
            self.expect_op(")")
            return Product(tuple(items))
        return self.p_path()

    def p_path(self) -> Path:
        first = self.expect_ident("mapping or set name")
        qualifier = None
        if self.at("::", "OP"):
            self.advance()
            qualifier = first.text
            first = self.expect_ident("mapping name")
        steps = [first.text]
        while self.at(".", "OP"):
            self.advance()
            steps.append(self.expect_ident("mapping name").text)
        return Path(tuple(steps), qualifier)

    def p_clause(self) -> HornClause:
        anchor = self.expect_ident("anchor set")
        self.expect_op(":")
        lits = [self.p_clause_literal()]
        while self.at("|", "OP"):
            self.advance()
            lits.append(self.p_clause_literal())
        return HornClause(anchor.text, tuple(lits))

    def p_clause_literal(self) -> Literal:
        positive = True
        if (self.tok.kind == "OP" and self.tok.text in _NEG) or (
            self.at("not", "IDENT") and self.peek().kind == "IDENT"
        ):
            self.advance()
            positive = False
        left = self.p_clause_term()
        op = self.p_cmp()
        right = self.p_clause_term()
        return Literal(positive, Comparison(left, op, right))

    def p_clause_term(self):
        t = self.tok
        if t.kind == "IDENT" and t.text not in ("true", "false", "date"):
            return self.p_path()
        return Const(self.p_literal())

    def p_cmp(self) -> str:
        t = self.tok
        if t.kind == "OP" and t.text in _CMP:
            self.advance()
            return _CMP[t.text]
        raise _Error(t, f"expected a comparison operator, found {self.describe(t)}", list(_CMP)[:6])

    def p_literal(self) -> Any:
        t = self.tok
        if t.kind == "OP" and t.text == "-":
            self.advance()
            num = self.tok
            if num.kind != "NUMBER":
                raise _Error(num, "expected a number after '-'", ["number"])
            self.advance()
            return -_number(num.text)
        if t.kind == "NUMBER":
            self.advance()
            return _number(t.text)
        if t.kind == "STRING":
            return self.p_string()
        if t.kind == "IDENT" and t.text in ("true", "false"):
            self.advance()
            return t.text == "true"
        if t.kind == "IDENT" and t.text == "date":
            self.advance()
            s_tok = self.tok
            s = self.p_string()
            try:
                return _dt.date.fromisoformat(s)
            except ValueError:
                raise _Error(s_tok, f"bad date {s!r}", ["YYYY-MM-DD"]) from None
        raise _Error(t, f"expected a literal, found {self.describe(t)}", ["number", "string", "true", "false"])

    def p_string(self) -> str:
        t = self.tok
        if t.kind != "STRING":
            raise _Error(t, f"expected a string, found {self.describe(t)}", ["string"])
        self.advance()
        try:
            return json.loads(t.text)
        except ValueError:
            raise _Error(t, "malformed string escape", ["string"]) from None

    def p_diagram(self, kw: Token) -> None:
        name = self.expect_ident("diagram name")
        sets = []
        if self.at("(", "OP"):
            self.advance()
            sets.append(self.expect_ident("set name").text)
            while self.at(",", "OP"):
                self.advance()
                sets.append(self.expect_ident("set name").text)
            self.expect_op(")")
        self.end()
        self.state.diagrams.append(DiagramDef(name.text, tuple(sets)))

    def p_program(self, kw: Token) -> None:
        name = self.expect_ident("program name")
        kind = "user"
        if self.at("system", "IDENT"):
            self.advance()
            kind = "system"
        self.end()
        if name.text in self.state.programs and self.state.programs[name.text][2]:
            raise _Error(name, f"program {name.text!r} declared twice")
        entry = self.state.programs.setdefault(name.text, ["user", [], False])
        entry[0] = kind
        entry[2] = True

    def p_rule(self, kw: Token) -> None:
        program = DEFAULT_PROGRAM
        if self.tok.kind == "IDENT" and self.peek().kind == "OP" and self.peek().text == ":":
            program = self.advance().text
            self.advance()
        head = self.p_atom()
        body = []
        if self.at(":-", "OP"):
            self.advance()
            body.append(self.p_body_literal())
            while self.at(",", "OP"):
                self.advance()
                body.append(self.p_body_literal())
        self.end()
        entry = self.state.programs.setdefault(program, ["user", [], False])
        entry[1].append(Rule(head, tuple(body)))

    def p_atom(self) -> Atom:
        pred = self.expect_ident("predicate name")
        self.expect_op("(")
        terms = []
        if not self.at(")", "OP"):
            terms.append(self.p_dterm())
            while self.at(",", "OP"):
                self.advance()
                terms.append(self.p_dterm())
        self.expect_op(")")
        return Atom(pred.text, tuple(terms))

    def p_body_literal(self):
        t = self.tok
        negated = False
        if t.kind == "OP" and t.text in _NEG:
            self.advance()
            negated = True
        elif t.kind == "IDENT" and t.text == "not" and self.peek().kind == "IDENT":
            self.advance()
            negated = True
        if negated or (self.tok.kind == "IDENT" and self.peek().kind == "OP" and self.peek().text == "("):
            return PredLiteral(self.p_atom(), not negated)
        left = self.p_dterm()
        op = self.p_cmp()
        right = self.p_dterm()
        return Compare(left, op, right)

    def p_dterm(self):
        t = self.tok
        if t.kind == "IDENT":
            self.advance()
            if t.text[0].isupper() or t.text[0] == "_":
                return Var(t.text)
            return DConst(t.text)
        if t.kind == "STRING":
            return DConst(self.p_string())
        if t.kind == "NUMBER" or (t.kind == "OP" and t.text == "-"):
            lit_tok = self.tok
            v = self.p_literal()
            if not isinstance(v, int):
                raise _Error(lit_tok, "Datalog constants are integers or text", ["integer", "string"])
            return DConst(v)
        raise _Error(t, f"expected a term, found {self.describe(t)}", ["variable", "constant"])


def _number(text: str):
    return Decimal(text) if "." in text else int(text)


def _coerce(base: str, v: Any) -> Any:
    if v is None:
        return None
    if base == "Decimal" and isinstance(v, int) and not isinstance(v, bool):
        return Decimal(v)
    return v


# ----------------------------------------------------------- tag dispatch


def dispatch_tag(abbr: str, operands: tuple, set_names: set[str]) -> str | None:
    """Pick the registry tag for an abbreviation given the operand shape."""
    if abbr in registry.BY_TAG:
        return abbr
    tags = [t for t in registry.tags_with_abbreviation(abbr) if registry.BY_TAG[t].emdm]
    if not tags:
        return None
    if len(tags) == 1:
        return tags[0]
    by_sub = {registry.BY_TAG[t].subcategory: t for t in tags}
    if len(operands) == 1 and isinstance(operands[0], Product):
        order = ("homogeneous binary function product", "autofunction", "dyadic relation")
    elif len(operands) == 1 and isinstance(operands[0], Path) and operands[0].is_name \
            and operands[0].steps[0] in set_names:
        order = ("dyadic relation", "autofunction", "homogeneous binary function product")
    else:
        order = ("autofunction", "dyadic relation", "homogeneous binary function product")
    for sub in order:
        if sub in by_sub:
            return by_sub[sub]
    return tags[0]


def auto_name(ctype: str, operands: tuple) -> str:
    abbr = registry.lookup(ctype).abbreviation
    if operands and isinstance(operands[0], HornClause):
        return f"{abbr}_{operands[0].anchor}"
    text = "_".join(str(o) for o in operands)
    text = re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_")
    return f"{abbr}_{text}" if text else abbr


def parse_schema(text: str) -> Catalog:
    """Parse .emdm text into a Catalog; raises ParseFailure with spans."""
    if not isinstance(text, str):
        text = str(text)
    tokens, errors = tokenize(text)
    parser = _Parser(tokens)
    parser.parse()
    errors.extend(parser.errors)
    st = parser.state
    set_names = {s.name for s in st.sets}

    constraints: list[ConstraintDef] = []
    used: set[str] = {rc.name for rc in st.constraints if rc.name}
    for rc in st.constraints:
        tag = dispatch_tag(rc.abbr, rc.operands, set_names)
        if tag is None:
            errors.append(ParseError(rc.token.span, f"{rc.abbr!r} is not a declarable constraint type",
                                     ("constraint type",)))
            continue
        operands = rc.operands
        if tag == "fp_key" and not (len(operands) == 1 and isinstance(operands[0], Product)):
            if all(isinstance(o, Path) for o in operands):
                operands = (Product(tuple(operands)),)
        name = rc.name
        if name is None:
            base = auto_name(tag, operands)
            name, k = base, 2
            while name in used:
                name, k = f"{base}_{k}", k + 1
            used.add(name)
        origin = "derived" if rc.derived_by else "declared"
        constraints.append(ConstraintDef(name, tag, tuple(operands), origin, rc.derived_by))

    if errors:
        errors.sort(key=lambda e: (e.span.line, e.span.column))
        raise ParseFailure(errors)

    programs = tuple(
        DatalogProgramDef(name, tuple(rules), kind) for name, (kind, rules, _) in st.programs.items()
    )
    return Catalog(
        db_name=st.db_name or DEFAULT_DB,
        sets=tuple(st.sets),
        mappings=tuple(st.mappings),
        constraints=tuple(constraints),
        programs=programs,
        diagrams=tuple(st.diagrams),
    )


def parse_errors(text: str) -> list[ParseError]:
    try:
        parse_schema(text)
    except ParseFailure as exc:
        return exc.errors
    return []


# ---------------------------------------------------------------- serializer


def _set_line(s: SetDef) -> str:
    if s.kind == "Entity":
        return f"entity {s.name};"
    if s.kind == "System":
        return f"system {s.name};"
    if s.kind == "Computed":
        return f"computed {s.name} = {json.dumps(s.computed_formula, ensure_ascii=False)};"
    if s.kind == "Relationship":
        roles = ", ".join(f"{r}: {t}" for r, t in s.rel_sorts)
        return f"relationship {s.name}({roles});"
    spec = s.value_spec
    out = f"valueset {s.name}: {spec.base}"
    if spec.min is not None or spec.max is not None:
        lo = format_literal(spec.min) if spec.min is not None else ""
        hi = format_literal(spec.max) if spec.max is not None else ""
        out += " [" + " ".join(x for x in (lo, "..", hi) if x) + "]"
    if spec.enumeration is not None:
        out += " in {" + ", ".join(format_literal(v) for v in spec.enumeration) + "}"
    if spec.pattern is not None:
        out += f" pattern {json.dumps(spec.pattern, ensure_ascii=False)}"
    return out + ";"


def _mapping_line(m: MappingDef) -> str:
    kw = {v: k for k, v in _MAPPING_KW.items()}[m.kind]
    out = f"{kw} {m.name}: {m.domain} -> {m.codomain}"
    if m.kind == "Computed":
        out += f" = {json.dumps(m.formula, ensure_ascii=False)}"
    elif m.default_value is not None:
        out += f" default {format_literal(m.default_value)}"
    return out + ";"


def _operand_text(ctype: str, operands: tuple) -> str:
    if ctype == "fp_key" and len(operands) == 1 and isinstance(operands[0], Product):
        return ", ".join(str(p) for p in operands[0].items)
    return ", ".join(str(o) for o in operands)


def _constraint_line(c: ConstraintDef, omit_name: bool, set_names: set[str]) -> str:
    abbr = registry.lookup(c.ctype).abbreviation
    if dispatch_tag(abbr, c.operands, set_names) != c.ctype:
        abbr = c.ctype
    head = "constraint " if omit_name else f"constraint {c.name}: "
    out = f"{head}{abbr}({_operand_text(c.ctype, c.operands)})"
    if c.origin == "derived":
        out += f" derived {c.theorem or 'closure'}"
    return out + ";"


def serialize_schema(catalog: Catalog, check: bool = True) -> str:
    """Canonical text: header, sets, mappings, constraints, diagrams, programs.

    Within each group declarations keep catalog order, which carries meaning
    (Datalog column order, minimization scan order).
    """
    if check:
        from .validate import validate_schema

        defects = validate_schema(catalog)
        if defects:
            raise IllFormedCatalog(defects)
    lines = [f"database {catalog.db_name};"]
    lines.extend(_set_line(s) for s in catalog.sets)
    lines.extend(_mapping_line(m) for m in catalog.mappings)
    names = [c.name for c in catalog.constraints]
    set_names = {s.name for s in catalog.sets}
    for c in catalog.constraints:
        base = auto_name(c.ctype, c.operands)
        omit = c.name == base and names.count(base) == 1
        lines.append(_constraint_line(c, omit, set_names))
    for d in catalog.diagrams:
        lines.append(f"diagram {d.name}" + (f"({', '.join(d.sets)})" if d.sets else "") + ";")
    for p in catalog.programs:
        lines.append(f"program {p.name}" + (" system" if p.kind == "system" else "") + ";")
        lines.extend(f"rule {p.name}: {r};" for r in p.rules)
    return "\n".join(lines) + "\n"


def constraint_text(c: ConstraintDef) -> str:
    return f"{registry.lookup(c.ctype).abbreviation}({_operand_text(c.ctype, c.operands)})"
