"""The SQL-like query language: lexer, parser, schema binding, printer.

Grammar (keywords case-insensitive, AND-conjunctions only):

    query  := SELECT select_list FROM table
              [WHERE pred (AND pred)*] [GROUP BY qattr (',' qattr)*]
    select_list := '*' | item (',' item)*
    item   := qattr | agg '(' qattr ')'     agg := sum|avg|count|min|max
    pred   := qattr op literal              op  := = != < <= > >=
    qattr  := [table '.'] name
    literal := number | 'single-quoted text' | YYYY-MM-DD

``table`` is the fact name (star query) or a dimension name. Parsing binds
against the dataset schema: unqualified names resolve to measures in a star
query and to the dimension's own attributes in a dimension query; aggregates
and GROUP BY are star-only. Syntax errors carry a character offset.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import KindMismatchError, QuerySyntaxError, UnknownNameError
from .preferences import Operator
from .values import Kind, Value, compatible, format_literal, kind_of, parse_literal
from .warehouse import Dataset

AGGREGATES = ("sum", "avg", "count", "min", "max")
_KEYWORDS = frozenset({"select", "from", "where", "and", "group", "by"})

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<date>\d{4}-\d{2}-\d{2})
      | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
      | (?P<string>'(?:[^']|'')*')
      | (?P<ident>[A-Za-z_]\w*)
      | (?P<op>>=|<=|!=|=|<|>)
      | (?P<star>\*)
      | (?P<comma>,)
      | (?P<dot>\.)
      | (?P<lparen>\()
      | (?P<rparen>\))
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", position=pos)
        if m.lastgroup != "ws":
            tokens.append(Token(kind=m.lastgroup, text=m.group(), position=pos))
        pos = m.end()
    tokens.append(Token(kind="eof", text="", position=len(text)))
    return tokens


@dataclass(frozen=True)
class ColumnRef:
    """A bound column: a dimension attribute or a fact measure."""

    table: Optional[str]  # stored-case dimension name; None for measures
    name: str  # stored-case attribute or measure name
    kind: Kind

    @property
    def is_measure(self) -> bool:
        return self.table is None

    @property
    def canonical(self) -> str:
        return self.name if self.table is None else f"{self.table}.{self.name}"


@dataclass(frozen=True)
class AggregateItem:
    func: str  # sum | avg | count | min | max
    column: ColumnRef

    @property
    def canonical(self) -> str:
        return f"{self.func}({self.column.canonical})"


SelectItem = Union[ColumnRef, AggregateItem]


@dataclass(frozen=True)
class QueryPredicate:
    column: ColumnRef
    operator: Operator
    value: Value


@dataclass(frozen=True)
class Query:
    source: str  # stored-case table name
    is_star: bool
    projection: Optional[tuple[SelectItem, ...]]  # None means '*'
    predicates: tuple[QueryPredicate, ...]
    group_by: tuple[ColumnRef, ...]


class _Parser:
    def __init__(self, text: str, ds: Dataset):
        self.text = text
        self.ds = ds
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token plumbing ------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> QuerySyntaxError:
        tok = tok or self.peek()
        return QuerySyntaxError(message, position=tok.position)

    def expect_keyword(self, word: str) -> Token:
        tok = self.advance()
        if tok.kind != "ident" or tok.text.casefold() != word:
            raise self.error(f"expected {word.upper()}", tok)
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text.casefold() == word

    def expect(self, kind: str, what: str) -> Token:
        tok = self.advance()
        if tok.kind != kind:
            raise self.error(f"expected {what}", tok)
        return tok

    # -- grammar --------------------------------------------------------

    def parse(self) -> Query:
        self.expect_keyword("select")
        raw_items = self._select_list()
        self.expect_keyword("from")
        table_tok = self.expect("ident", "a table name")

        raw_preds: list[tuple[tuple, Token, Operator, Value]] = []
        if self.at_keyword("where"):
            self.advance()
            raw_preds.append(self._predicate())
            while self.at_keyword("and"):
                self.advance()
                raw_preds.append(self._predicate())

        raw_group: list[tuple[tuple, Token]] = []
        if self.at_keyword("group"):
            self.advance()
            self.expect_keyword("by")
            raw_group.append(self._qattr())
            while self.peek().kind == "comma":
                self.advance()
                raw_group.append(self._qattr())

        tok = self.peek()
        if tok.kind != "eof":
            raise self.error(f"unexpected trailing input {tok.text!r}", tok)

        return self._bind(table_tok, raw_items, raw_preds, raw_group)

    def _select_list(self):
        if self.peek().kind == "star":
            self.advance()
            return None
        items = [self._select_item()]
        while self.peek().kind == "comma":
            self.advance()
            items.append(self._select_item())
        return items

    def _select_item(self):
        tok = self.peek()
        if (
            tok.kind == "ident"
            and tok.text.casefold() in AGGREGATES
            and self.tokens[self.pos + 1].kind == "lparen"
        ):
            func = self.advance().text.casefold()
            self.advance()  # (
            ref = self._qattr()
            self.expect("rparen", "')'")
            return ("agg", func, ref)
        return ("col", self._qattr())

    def _qattr(self):
        first = self.expect("ident", "an attribute name")
        if self.peek().kind == "dot":
            self.advance()
            second = self.expect("ident", "an attribute name after '.'")
            return ((first.text, second.text), first)
        return ((None, first.text), first)

    def _predicate(self):
        ref, tok = self._qattr()
        op_tok = self.expect("op", "a comparison operator")
        operator = Operator(op_tok.text)
        lit_tok = self.advance()
        if lit_tok.kind == "string":
            value: Value = parse_literal(lit_tok.text)
        elif lit_tok.kind == "date":
            value = parse_literal(lit_tok.text)
        elif lit_tok.kind == "number":
            value = parse_literal(lit_tok.text)
        else:
            raise self.error("expected a literal (number, 'text', or date)", lit_tok)
        return (ref, tok, operator, value)

    # -- binding ----------------------------------------------------------

    def _bind(self, table_tok, raw_items, raw_preds, raw_group) -> Query:
        ds = self.ds
        name = table_tok.text
        if ds.is_fact(name):
            source, is_star = ds.fact.name, True
        elif ds.has_dimension(name):
            source, is_star = ds.dimension(name).name, False
        else:
            raise self.error(f"unknown table {name!r}", table_tok)

        def bind_ref(ref: tuple, tok: Token) -> ColumnRef:
            table, attr = ref
            try:
                return bind_column(ds, source, is_star, table, attr)
            except UnknownNameError as exc:
                raise self.error(str(exc), tok) from None

        projection = None
        has_aggregate = False
        if raw_items is not None:
            bound_items: list[SelectItem] = []
            for item in raw_items:
                if item[0] == "agg":
                    _, func, (ref, tok) = item
                    if not is_star:
                        raise self.error("aggregates need a star query", tok)
                    column = bind_ref(ref, tok)
                    if not column.is_measure:
                        raise self.error(
                            f"aggregate over non-measure {column.canonical!r}", tok
                        )
                    has_aggregate = True
                    bound_items.append(AggregateItem(func=func, column=column))
                else:
                    _, (ref, tok) = item
                    bound_items.append(bind_ref(ref, tok))
            projection = tuple(bound_items)

        group_by: list[ColumnRef] = []
        for ref, tok in raw_group:
            if not is_star:
                raise self.error("GROUP BY needs a star query", tok)
            column = bind_ref(ref, tok)
            if column.is_measure:
                raise self.error("GROUP BY must name dimension attributes", tok)
            group_by.append(column)

        if group_by and projection is None:
            raise self.error("GROUP BY requires an explicit select list", table_tok)
        if has_aggregate or group_by:
            keys = {c.canonical for c in group_by}
            for item in projection or ():
                if isinstance(item, ColumnRef) and item.canonical not in keys:
                    raise self.error(
                        f"{item.canonical!r} must appear in GROUP BY", table_tok
                    )

        predicates = []
        for ref, tok, operator, value in raw_preds:
            column = bind_ref(ref, tok)
            if not compatible(column.kind, kind_of(value)):
                raise KindMismatchError(
                    f"predicate on {column.canonical} ({column.kind.value}) "
                    f"has a {kind_of(value).value} literal"
                )
            predicates.append(
                QueryPredicate(column=column, operator=operator, value=value)
            )

        return Query(
            source=source,
            is_star=is_star,
            projection=projection,
            predicates=tuple(predicates),
            group_by=tuple(group_by),
        )


def bind_column(
    ds: Dataset, source: str, is_star: bool, table: Optional[str], attr: str
) -> ColumnRef:
    """Resolve a possibly-qualified name against the query's source table."""
    if is_star:
        if table is None or ds.is_fact(table):
            measure = ds.fact.measure(attr)  # raises UnknownNameError
            return ColumnRef(table=None, name=measure.name, kind=measure.kind)
        dim = ds.dimension(table)
        a = dim.attribute(attr)
        return ColumnRef(table=dim.name, name=a.name, kind=a.kind)
    dim = ds.dimension(source)
    if table is not None and table.casefold() != dim.name.casefold():
        raise UnknownNameError(
            f"query over {dim.name!r} cannot reference table {table!r}"
        )
    a = dim.attribute(attr)
    return ColumnRef(table=dim.name, name=a.name, kind=a.kind)


def parse_query(text: str, ds: Dataset) -> Query:
    """Parse and bind query text. Raises QuerySyntaxError (with position) or
    KindMismatchError."""
    return _Parser(text, ds).parse()


def print_query(q: Query) -> str:
    """Canonical text form; reparsing yields an equal Query."""
    if q.projection is None:
        select = "*"
    else:
        select = ", ".join(item.canonical for item in q.projection)
    parts = [f"SELECT {select} FROM {q.source}"]
    if q.predicates:
        preds = " AND ".join(
            f"{p.column.canonical} {p.operator.symbol} {format_literal(p.value)}"
            for p in q.predicates
        )
        parts.append(f"WHERE {preds}")
    if q.group_by:
        parts.append("GROUP BY " + ", ".join(c.canonical for c in q.group_by))
    return " ".join(parts)
