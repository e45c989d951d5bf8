"""Recursive-descent parser for the SPARQL 1.1 subset this package executes.

Covers: PREFIX declarations, SELECT (DISTINCT, aggregates, expression AS alias,
``*``), WHERE with basic graph patterns, ``a`` shorthand, ``;``/``,`` lists,
OPTIONAL, FILTER (comparisons, logic, arithmetic, regex/string/date builtins),
GROUP BY, ORDER BY, LIMIT/OFFSET, and ASK.  Updates: INSERT DATA, DELETE DATA,
CLEAR.  Prefixed names are expanded at parse time, so an undeclared prefix is a
syntax error.  All failures raise :class:`SparqlSyntaxError`; the parser never
raises anything else on arbitrary input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from ..kg.terms import (
    Literal,
    Triple,
    XSD,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    RDF_TYPE,
)


class SparqlSyntaxError(Exception):
    def __init__(self, message: str, position: int = 0):
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class SyntaxIssue:
    position: int
    message: str


# ---------------------------------------------------------------------------
# Tokens

_IRIREF = re.compile(r'<([^<>"{}|^`\\\x00-\x20]*)>')
_VAR = re.compile(r"[?$]([A-Za-z_][A-Za-z0-9_]*)")
_PNAME = re.compile(
    r"([A-Za-z][A-Za-z0-9_\-]*)?:"
    r"([A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)?"
)
_STRING = re.compile(r'"((?:[^"\\\n]|\\.)*)"' + r"|'((?:[^'\\\n]|\\.)*)'")
_DOUBLE = re.compile(r"[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+)")
_DECIMAL = re.compile(r"[+-]?\d*\.\d+")
_INTEGER = re.compile(r"[+-]?\d+")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_LANGTAG = re.compile(r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*")
_MULTI_PUNCT = ("^^", "&&", "||", "!=", "<=", ">=")
_SINGLE_PUNCT = "{}().;,=<>!+-*/"

_UNESCAPES = {"\\": "\\", '"': '"', "'": "'", "n": "\n", "r": "\r", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str  # iri | pname | var | string | number | word | punct | langtag | eof
    value: object
    pos: int


def _unescape(raw: str, pos: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        c = raw[i]
        if c == "\\":
            if i + 1 >= len(raw):
                raise SparqlSyntaxError("dangling escape in string literal", pos)
            nxt = raw[i + 1]
            if nxt not in _UNESCAPES:
                raise SparqlSyntaxError(f"unsupported escape \\{nxt} in string literal", pos)
            out.append(_UNESCAPES[nxt])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "<":
            m = _IRIREF.match(text, i)
            if m:
                tokens.append(Token("iri", m.group(1), i))
                i = m.end()
                continue
        if c in "?$":
            m = _VAR.match(text, i)
            if not m:
                raise SparqlSyntaxError("invalid variable name", i)
            tokens.append(Token("var", m.group(1), i))
            i = m.end()
            continue
        if c in "\"'":
            m = _STRING.match(text, i)
            if not m:
                raise SparqlSyntaxError("unterminated string literal", i)
            raw = m.group(1) if m.group(1) is not None else m.group(2)
            tokens.append(Token("string", _unescape(raw, i), i))
            i = m.end()
            continue
        if c == "@":
            m = _LANGTAG.match(text, i)
            if not m:
                raise SparqlSyntaxError("invalid language tag", i)
            tokens.append(Token("langtag", m.group(0)[1:], i))
            i = m.end()
            continue
        if c.isdigit() or (c in "+-." and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] == ".")):
            for pattern, sub in ((_DOUBLE, "double"), (_DECIMAL, "decimal"), (_INTEGER, "integer")):
                m = pattern.match(text, i)
                if m:
                    tokens.append(Token("number", (sub, m.group(0)), i))
                    i = m.end()
                    break
            else:
                tokens.append(Token("punct", c, i))
                i += 1
            continue
        two = text[i : i + 2]
        if two in _MULTI_PUNCT:
            tokens.append(Token("punct", two, i))
            i += 2
            continue
        m = _PNAME.match(text, i)
        if m and ":" in text[i : m.end()]:
            tokens.append(Token("pname", (m.group(1) or "", m.group(2) or ""), i))
            i = m.end()
            continue
        m = _WORD.match(text, i)
        if m:
            tokens.append(Token("word", m.group(0), i))
            i = m.end()
            continue
        if c in _SINGLE_PUNCT:
            tokens.append(Token("punct", c, i))
            i += 1
            continue
        raise SparqlSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(Token("eof", None, n))
    return tokens


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Var:
    name: str


PatternTerm = Union[Var, str, Literal]  # str is an expanded IRI


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm


@dataclass
class OptionalGroup:
    elements: list


@dataclass
class FilterClause:
    expr: "Expr"


@dataclass(frozen=True)
class EVar:
    name: str


@dataclass(frozen=True)
class EConst:
    term: Union[str, Literal]


@dataclass(frozen=True)
class ECall:
    name: str  # lowercased builtin name, or full IRI for xsd casts
    args: tuple


@dataclass(frozen=True)
class EAgg:
    func: str  # count | sum | avg | min | max
    arg: Optional["Expr"]  # None means COUNT(*)
    distinct: bool = False


@dataclass(frozen=True)
class EUnary:
    op: str  # ! | -
    operand: "Expr"


@dataclass(frozen=True)
class EBin:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[EVar, EConst, ECall, EAgg, EUnary, EBin]


@dataclass(frozen=True)
class SelectStar:
    pass


@dataclass(frozen=True)
class SelectVar:
    name: str


@dataclass(frozen=True)
class SelectExpr:
    expr: Expr
    alias: str


Projection = Union[SelectStar, SelectVar, SelectExpr]


@dataclass
class SelectQuery:
    projection: list[Projection]
    where: list
    distinct: bool = False
    group_by: list[str] = field(default_factory=list)
    order_by: list[tuple[Expr, bool]] = field(default_factory=list)  # (expr, ascending)
    limit: Optional[int] = None
    offset: Optional[int] = None


@dataclass
class AskQuery:
    where: list


@dataclass
class InsertData:
    triples: list[Triple]


@dataclass
class DeleteData:
    triples: list[Triple]


@dataclass
class ClearOp:
    pass


_AGGREGATES = {"count", "sum", "avg", "min", "max"}
_BUILTINS = {
    "regex", "str", "lang", "datatype", "bound", "contains", "strstarts",
    "strends", "strlen", "lcase", "ucase", "abs", "ceil", "floor", "round",
    "year", "month", "day", "hours", "minutes", "seconds", "isiri", "isuri",
    "isliteral", "isnumeric", "isblank",
}
_XSD_CASTS = {XSD + local for local in ("integer", "decimal", "double", "float",
                                        "string", "boolean", "dateTime", "date")}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}

    # -- token helpers ---------------------------------------------------
    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise SparqlSyntaxError(message, tok.pos)

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "word" and tok.value.lower() in words

    def expect_word(self, word: str):
        tok = self.next()
        if tok.kind != "word" or tok.value.lower() != word:
            self.fail(f"expected {word.upper()}", tok)

    def at_punct(self, *values: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value in values

    def expect_punct(self, value: str):
        tok = self.next()
        if tok.kind != "punct" or tok.value != value:
            self.fail(f"expected {value!r}", tok)

    def resolve_pname(self, tok: Token) -> str:
        prefix, local = tok.value
        if prefix not in self.prefixes:
            self.fail(f"undeclared prefix {prefix!r}", tok)
        return self.prefixes[prefix] + local

    # -- prologue ---------------------------------------------------------
    def parse_prologue(self):
        while self.at_word("prefix", "base"):
            kw = self.next().value.lower()
            if kw == "base":
                tok = self.next()
                if tok.kind != "iri":
                    self.fail("expected IRI after BASE", tok)
                continue
            name_tok = self.next()
            if name_tok.kind != "pname" or name_tok.value[1]:
                self.fail("expected prefix name ending in ':'", name_tok)
            iri_tok = self.next()
            if iri_tok.kind != "iri":
                self.fail("expected IRI in PREFIX declaration", iri_tok)
            self.prefixes[name_tok.value[0]] = iri_tok.value

    # -- query ------------------------------------------------------------
    def parse_query(self) -> Union[SelectQuery, AskQuery]:
        self.parse_prologue()
        if self.at_word("select"):
            query = self.parse_select()
        elif self.at_word("ask"):
            self.next()
            query = AskQuery(where=self.parse_group())
        else:
            self.fail("expected SELECT or ASK")
        tok = self.peek()
        if tok.kind != "eof":
            self.fail("unexpected trailing content", tok)
        return query

    def parse_select(self) -> SelectQuery:
        self.expect_word("select")
        distinct = False
        if self.at_word("distinct"):
            self.next()
            distinct = True
        elif self.at_word("reduced"):
            self.next()
        projection: list[Projection] = []
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "*":
                self.next()
                projection.append(SelectStar())
            elif tok.kind == "var":
                self.next()
                projection.append(SelectVar(tok.value))
            elif tok.kind == "punct" and tok.value == "(":
                self.next()
                expr = self.parse_expr()
                self.expect_word("as")
                var_tok = self.next()
                if var_tok.kind != "var":
                    self.fail("expected variable after AS", var_tok)
                self.expect_punct(")")
                projection.append(SelectExpr(expr, var_tok.value))
            else:
                break
        if not projection:
            self.fail("SELECT needs at least one projection")
        if self.at_word("where"):
            self.next()
        where = self.parse_group()
        query = SelectQuery(projection=projection, where=where, distinct=distinct)
        self.parse_modifiers(query)
        return query

    def parse_modifiers(self, query: SelectQuery):
        while True:
            if self.at_word("group"):
                self.next()
                self.expect_word("by")
                grouped = []
                while self.peek().kind == "var":
                    grouped.append(self.next().value)
                if not grouped:
                    self.fail("GROUP BY needs at least one variable")
                query.group_by = grouped
            elif self.at_word("order"):
                self.next()
                self.expect_word("by")
                conds: list[tuple[Expr, bool]] = []
                while True:
                    if self.at_word("asc", "desc"):
                        asc = self.next().value.lower() == "asc"
                        self.expect_punct("(")
                        conds.append((self.parse_expr(), asc))
                        self.expect_punct(")")
                    elif self.peek().kind == "var":
                        conds.append((EVar(self.next().value), True))
                    else:
                        break
                if not conds:
                    self.fail("ORDER BY needs at least one condition")
                query.order_by = conds
            elif self.at_word("limit"):
                self.next()
                query.limit = self._expect_nonneg_int()
            elif self.at_word("offset"):
                self.next()
                query.offset = self._expect_nonneg_int()
            elif self.at_word("having"):
                self.fail("HAVING is not supported")
            else:
                return

    def _expect_nonneg_int(self) -> int:
        tok = self.next()
        if tok.kind != "number" or tok.value[0] != "integer" or tok.value[1].startswith("-"):
            self.fail("expected a non-negative integer", tok)
        return int(tok.value[1])

    # -- graph patterns ----------------------------------------------------
    def parse_group(self) -> list:
        self.expect_punct("{")
        elements: list = []
        while True:
            if self.at_punct("}"):
                self.next()
                return elements
            if self.peek().kind == "eof":
                self.fail("unbalanced braces: expected '}'")
            if self.at_word("optional"):
                self.next()
                elements.append(OptionalGroup(self.parse_group()))
            elif self.at_word("filter"):
                self.next()
                elements.append(FilterClause(self.parse_filter_constraint()))
            elif self.at_word("union"):
                self.fail("UNION is not supported")
            elif self.at_punct("{"):
                self.fail("nested group patterns are not supported")
            else:
                elements.extend(self.parse_triples_same_subject())
                if self.at_punct("."):
                    self.next()

    def parse_filter_constraint(self) -> Expr:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "(":
            self.next()
            expr = self.parse_expr()
            self.expect_punct(")")
            return expr
        if tok.kind == "word" or tok.kind == "pname" or tok.kind == "iri":
            return self.parse_primary()
        self.fail("expected bracketed expression or function call after FILTER", tok)

    def parse_triples_same_subject(self) -> list[TriplePattern]:
        subject = self.parse_term(position="subject")
        patterns: list[TriplePattern] = []
        while True:
            predicate = self.parse_predicate()
            while True:
                obj = self.parse_term(position="object")
                patterns.append(TriplePattern(subject, predicate, obj))
                if self.at_punct(","):
                    self.next()
                    continue
                break
            if self.at_punct(";"):
                self.next()
                if self.at_punct(".", "}"):
                    break  # dangling ';' before terminator
                continue
            break
        return patterns

    def parse_predicate(self) -> PatternTerm:
        tok = self.peek()
        if tok.kind == "word" and tok.value == "a":
            self.next()
            return RDF_TYPE
        term = self.parse_term(position="predicate")
        if isinstance(term, Literal):
            self.fail("literal cannot be used as predicate", tok)
        return term

    def parse_term(self, position: str) -> PatternTerm:
        tok = self.next()
        if tok.kind == "var":
            return Var(tok.value)
        if tok.kind == "iri":
            return tok.value
        if tok.kind == "pname":
            return self.resolve_pname(tok)
        if tok.kind == "string":
            return self._finish_string_literal(tok)
        if tok.kind == "number":
            return _number_literal(tok.value)
        if tok.kind == "word" and tok.value.lower() in ("true", "false"):
            return Literal(tok.value.lower(), XSD_BOOLEAN)
        if tok.kind == "word" and tok.value.startswith("_"):
            self.fail("blank nodes are not supported", tok)
        self.fail(f"expected a term in {position} position", tok)

    def _finish_string_literal(self, tok: Token) -> Literal:
        if self.at_punct("^^"):
            self.next()
            dt_tok = self.next()
            if dt_tok.kind == "iri":
                return Literal(tok.value, dt_tok.value)
            if dt_tok.kind == "pname":
                return Literal(tok.value, self.resolve_pname(dt_tok))
            self.fail("expected datatype IRI after '^^'", dt_tok)
        if self.peek().kind == "langtag":
            self.fail("language-tagged literals are not supported", self.peek())
        return Literal(tok.value, XSD_STRING)

    # -- expressions --------------------------------------------------------
    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at_punct("||"):
            self.next()
            left = EBin("||", left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_relational()
        while self.at_punct("&&"):
            self.next()
            left = EBin("&&", left, self.parse_relational())
        return left

    def parse_relational(self) -> Expr:
        left = self.parse_additive()
        if self.at_punct("=", "!=", "<", "<=", ">", ">="):
            op = self.next().value
            return EBin(op, left, self.parse_additive())
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while self.at_punct("+", "-"):
            op = self.next().value
            left = EBin(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while self.at_punct("*", "/"):
            op = self.next().value
            left = EBin(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.at_punct("!"):
            self.next()
            return EUnary("!", self.parse_unary())
        if self.at_punct("-"):
            self.next()
            return EUnary("-", self.parse_unary())
        if self.at_punct("+"):
            self.next()
            return self.parse_unary()
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "(":
            self.next()
            expr = self.parse_expr()
            self.expect_punct(")")
            return expr
        if tok.kind == "var":
            self.next()
            return EVar(tok.value)
        if tok.kind == "string":
            self.next()
            return EConst(self._finish_string_literal(tok))
        if tok.kind == "number":
            self.next()
            return EConst(_number_literal(tok.value))
        if tok.kind == "iri":
            self.next()
            if self.at_punct("("):
                return self._finish_call(tok.value, tok)
            return EConst(tok.value)
        if tok.kind == "pname":
            resolved = self.resolve_pname(tok)
            self.next()
            if self.at_punct("("):
                return self._finish_call(resolved, tok)
            return EConst(resolved)
        if tok.kind == "word":
            word = tok.value.lower()
            if word in ("true", "false"):
                self.next()
                return EConst(Literal(word, XSD_BOOLEAN))
            if word in _AGGREGATES:
                return self.parse_aggregate()
            if word in _BUILTINS:
                self.next()
                return self._finish_call(word, tok)
            self.fail(f"unknown function or keyword {tok.value!r}", tok)
        self.fail("expected an expression", tok)

    def _finish_call(self, name: str, tok: Token) -> Expr:
        if name.startswith("http") and name not in _XSD_CASTS:
            self.fail(f"unsupported function <{name}>", tok)
        self.expect_punct("(")
        args: list[Expr] = []
        if not self.at_punct(")"):
            args.append(self.parse_expr())
            while self.at_punct(","):
                self.next()
                args.append(self.parse_expr())
        self.expect_punct(")")
        return ECall(name, tuple(args))

    def parse_aggregate(self) -> Expr:
        func = self.next().value.lower()
        self.expect_punct("(")
        distinct = False
        if self.at_word("distinct"):
            self.next()
            distinct = True
        if self.at_punct("*"):
            self.next()
            if func != "count":
                self.fail(f"{func.upper()}(*) is not valid")
            self.expect_punct(")")
            return EAgg("count", None, distinct)
        arg = self.parse_expr()
        self.expect_punct(")")
        return EAgg(func, arg, distinct)

    # -- updates -------------------------------------------------------------
    def parse_update(self) -> list:
        self.parse_prologue()
        ops: list = []
        while self.peek().kind != "eof":
            if self.at_word("insert"):
                self.next()
                self.expect_word("data")
                ops.append(InsertData(self.parse_data_block()))
            elif self.at_word("delete"):
                self.next()
                self.expect_word("data")
                ops.append(DeleteData(self.parse_data_block()))
            elif self.at_word("clear"):
                self.next()
                if self.at_word("all", "default"):
                    self.next()
                ops.append(ClearOp())
            else:
                self.fail("expected INSERT DATA, DELETE DATA or CLEAR")
            if self.at_punct(";"):
                self.next()
                self.parse_prologue()
        if not ops:
            self.fail("empty update request")
        return ops

    def parse_data_block(self) -> list[Triple]:
        self.expect_punct("{")
        triples: list[Triple] = []
        while not self.at_punct("}"):
            if self.peek().kind == "eof":
                self.fail("unbalanced braces in data block")
            start = self.peek()
            for pattern in self.parse_triples_same_subject():
                if any(isinstance(t, Var) for t in (pattern.subject, pattern.predicate, pattern.object)):
                    self.fail("variables are not allowed in a data block", start)
                try:
                    triples.append(Triple(pattern.subject, pattern.predicate, pattern.object))
                except ValueError as exc:
                    self.fail(str(exc), start)
            if self.at_punct("."):
                self.next()
        self.next()
        return triples


def _number_literal(value: tuple[str, str]) -> Literal:
    sub, lexical = value
    datatype = {"integer": XSD_INTEGER, "decimal": XSD_DECIMAL, "double": XSD_DOUBLE}[sub]
    return Literal(lexical, datatype)


def parse_query(text: str) -> Union[SelectQuery, AskQuery]:
    """Parse a query string, raising SparqlSyntaxError on any defect."""
    if not text or not text.strip():
        raise SparqlSyntaxError("empty query", 0)
    try:
        return _Parser(text).parse_query()
    except SparqlSyntaxError:
        raise
    except RecursionError:
        raise SparqlSyntaxError("expression nesting too deep", 0) from None


def parse_update(text: str) -> list:
    if not text or not text.strip():
        raise SparqlSyntaxError("empty update", 0)
    try:
        return _Parser(text).parse_update()
    except SparqlSyntaxError:
        raise
    except RecursionError:
        raise SparqlSyntaxError("expression nesting too deep", 0) from None


def validate_sparql(query: str) -> Optional[SyntaxIssue]:
    """Local syntactic pre-check; returns None when the query parses cleanly."""
    try:
        parse_query(query)
        return None
    except SparqlSyntaxError as exc:
        return SyntaxIssue(position=exc.position, message=str(exc))
