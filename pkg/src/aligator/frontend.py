"""Loop language: tokenizer, recursive-descent parser, printer and path flattening.

The accepted language is a small Julia-like subset::

    while true
        if x > 0
            r = r - v; v = v + 2
        else
            r = r + u; u = u + 2
        end
    end

Guards are parsed and thrown away; loops are treated as non-deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterator, Union

from .errors import LoopSyntaxError, ReservedIdentifier, UnsupportedConstruct

KEYWORDS = {"while", "if", "else", "elseif", "end", "true", "false", "do", "then"}

_COUNTER_RE = re.compile(r"n\d+$")
_BASESEQ_RE = re.compile(r"t\d+$")


def is_counter_name(name: str) -> bool:
    return bool(_COUNTER_RE.match(name))


def initial_name(var: str) -> str:
    return f"{var}_0"


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Union[Num, Var, BinOp, Neg, Pow]


@dataclass(frozen=True)
class Assign:
    var: str
    rhs: Expr


@dataclass(frozen=True)
class If:
    then_body: tuple
    else_body: tuple = ()


Stmt = Union[Assign, If]


@dataclass(frozen=True)
class LoopAst:
    """Body of the single top-level ``while`` loop."""

    body: tuple


AssignSeq = tuple  # tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class PathSystem:
    variables: tuple[str, ...]
    paths: tuple[AssignSeq, ...]

    @property
    def uses_counter(self) -> bool:
        return any(
            is_counter_name(v) for path in self.paths for _, e in path for v in expr_vars(e)
        )


# --- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*/^()=;<>!\[\],{}.%])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if not m:
            raise LoopSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "newline":
            tokens.append(Token("newline", text, line, col))
            line += 1
            line_start = m.end()
        elif kind == "ident" and text in KEYWORDS:
            tokens.append(Token("kw", text, line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --- parser ------------------------------------------------------------------

_RELOPS = {"==", "!=", "<", "<=", ">", ">="}


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    # helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            want = text or kind
            self.error(f"expected {want!r}, found {self.tok.text or self.tok.kind!r}")
        return self.advance()

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise LoopSyntaxError(msg, tok.line, tok.col)

    def skip_separators(self):
        while self.at("newline") or self.at("op", ";"):
            self.advance()

    # grammar
    def parse_loop(self) -> LoopAst:
        self.skip_separators()
        self.expect("kw", "while")
        self.parse_guard()
        if self.at("kw", "do"):
            self.advance()
        body = self.parse_stmts(("end",))
        self.expect("kw", "end")
        self.skip_separators()
        if self.at("kw", "while"):
            raise UnsupportedConstruct(
                "MultipleLoops", "only a single top-level while loop is supported",
                self.tok.line, self.tok.col)
        if not self.at("eof"):
            self.error(f"unexpected {self.tok.text!r} after loop")
        return LoopAst(body)

    def parse_stmts(self, terminators: tuple[str, ...]) -> tuple:
        stmts = []
        while True:
            self.skip_separators()
            if self.at("eof") or (self.tok.kind == "kw" and self.tok.text in terminators):
                return tuple(stmts)
            stmts.append(self.parse_stmt())

    def parse_stmt(self) -> Stmt:
        t = self.tok
        if self.at("kw", "if"):
            self.advance()
            self.parse_guard()
            if self.at("kw", "then"):
                self.advance()
            then_body = self.parse_stmts(("else", "elseif", "end"))
            else_body: tuple = ()
            if self.at("kw", "elseif"):
                # elseif chains nest as if/else
                self.tokens[self.i] = Token("kw", "if", self.tok.line, self.tok.col)
                else_body = (self.parse_stmt(),)
                return If(then_body, else_body)
            if self.at("kw", "else"):
                self.advance()
                else_body = self.parse_stmts(("end",))
            self.expect("kw", "end")
            return If(then_body, else_body)
        if self.at("kw", "while"):
            raise UnsupportedConstruct("NestedWhile", "nested while loops are not supported",
                                       t.line, t.col)
        if t.kind == "ident":
            name = self.advance().text
            if self.at("op", "["):
                raise UnsupportedConstruct("ArrayAccess", f"array access on {name!r}",
                                           t.line, t.col)
            if self.at("op", "("):
                raise UnsupportedConstruct("FunctionCall", f"call of {name!r}", t.line, t.col)
            self.check_target(name, t)
            self.expect("op", "=")
            rhs = self.parse_expr()
            if not (self.at("newline") or self.at("op", ";") or self.at("eof") or self.at("kw")
                    or self.at("ident")):
                self.error(f"unexpected {self.tok.text!r} after assignment")
            return Assign(name, rhs)
        self.error(f"expected a statement, found {t.text or t.kind!r}")

    def check_target(self, name: str, tok: Token):
        self.check_identifier(name, tok)
        if is_counter_name(name):
            raise ReservedIdentifier(f"{name!r} is reserved for loop counters", tok.line, tok.col)

    @staticmethod
    def check_identifier(name: str, tok: Token):
        if name.endswith("_0"):
            raise ReservedIdentifier(f"{name!r} is reserved for initial values", tok.line, tok.col)
        if _BASESEQ_RE.match(name):
            raise ReservedIdentifier(f"{name!r} is reserved for exponential sequences",
                                     tok.line, tok.col)
        if "__" in name:
            raise ReservedIdentifier(f"{name!r} is reserved for internal variables",
                                     tok.line, tok.col)

    def parse_guard(self):
        self.parse_guard_atom()
        while self.at("op", "&&") or self.at("op", "||"):
            self.advance()
            self.parse_guard_atom()

    def parse_guard_atom(self):
        if self.at("op", "!"):
            self.advance()
            return self.parse_guard_atom()
        if self.at("kw", "true") or self.at("kw", "false"):
            self.advance()
            return
        self.parse_expr()
        if not (self.tok.kind == "op" and self.tok.text in _RELOPS):
            self.error("expected a comparison in loop or branch condition")
        self.advance()
        self.parse_expr()

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.at("op", "+") or self.at("op", "-"):
            op = self.advance().text
            left = BinOp(op, left, self.parse_term())
        return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while self.at("op", "*") or self.at("op", "/"):
            op_tok = self.advance()
            right = self.parse_factor()
            if op_tok.text == "/":
                bad = [v for v in expr_vars(right) if not is_counter_name(v)]
                if bad:
                    raise UnsupportedConstruct(
                        "DivisionByVariable", f"division by variable {bad[0]!r}",
                        op_tok.line, op_tok.col)
            left = BinOp(op_tok.text, left, right)
        return left

    def parse_factor(self) -> Expr:
        t = self.tok
        if self.at("op", "-"):
            self.advance()
            return Neg(self.parse_factor())
        if self.at("op", "+"):
            self.advance()
            return self.parse_factor()
        base = self.parse_atom()
        if self.at("op", "^"):
            self.advance()
            e = self.expect("number")
            if "." in e.text:
                self.error("exponent must be a nonnegative integer", e)
            return Pow(base, int(e.text))
        return base

    def parse_atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Num(Fraction(t.text))
        if t.kind == "ident":
            self.advance()
            if self.at("op", "("):
                raise UnsupportedConstruct("FunctionCall", f"call of {t.text!r}", t.line, t.col)
            if self.at("op", "["):
                raise UnsupportedConstruct("ArrayAccess", f"array access on {t.text!r}",
                                           t.line, t.col)
            self.check_identifier(t.text, t)
            return Var(t.text)
        if self.at("op", "("):
            self.advance()
            e = self.parse_expr()
            self.expect("op", ")")
            return e
        self.error(f"expected an expression, found {t.text or t.kind!r}")


def parse(source: str) -> LoopAst:
    """Parse loop source text into a :class:`LoopAst`."""
    return Parser(source).parse_loop()


# --- expressions ---------------------------------------------------------------


def expr_vars(e: Expr) -> Iterator[str]:
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, BinOp):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)
    elif isinstance(e, (Neg,)):
        yield from expr_vars(e.operand)
    elif isinstance(e, Pow):
        yield from expr_vars(e.base)


def eval_expr(e: Expr, env) -> Fraction:
    """Exact numeric evaluation; ``env`` maps names to rationals."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -eval_expr(e.operand, env)
    if isinstance(e, Pow):
        return eval_expr(e.base, env) ** e.exponent
    a, b = eval_expr(e.left, env), eval_expr(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0:
        raise ZeroDivisionError("division by zero in loop expression")
    return a / b


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _format_number(v: Fraction, parent: int) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    d = v.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        return str(Decimal(v.numerator) / Decimal(v.denominator))
    s = f"{v.numerator}/{v.denominator}"
    return f"({s})" if parent >= 1 else s


def format_expr(e: Expr, parent: int = 0, right: bool = False) -> str:
    if isinstance(e, Num):
        return _format_number(e.value, parent)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        s = f"-{format_expr(e.operand, 3)}"
        return f"({s})" if parent >= 4 else s
    if isinstance(e, Pow):
        return f"{format_expr(e.base, 4)}^{e.exponent}"
    p = _PREC[e.op]
    s = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p, True)}"
    if p < parent or (p == parent and right):
        return f"({s})"
    return s


def format_loop(ast: LoopAst, indent: str = "    ") -> str:
    lines = ["while true"]

    def emit(stmts, depth):
        for s in stmts:
            pad = indent * depth
            if isinstance(s, Assign):
                lines.append(f"{pad}{s.var} = {format_expr(s.rhs)}")
            else:
                lines.append(f"{pad}if true")
                emit(s.then_body, depth + 1)
                if s.else_body:
                    lines.append(f"{pad}else")
                    emit(s.else_body, depth + 1)
                lines.append(f"{pad}end")

    emit(ast.body, 1)
    lines.append("end")
    return "\n".join(lines) + "\n"


# --- flattening ----------------------------------------------------------------


def _paths(stmts) -> list[tuple]:
    acc: list[tuple] = [()]
    for s in stmts:
        if isinstance(s, Assign):
            acc = [p + ((s.var, s.rhs),) for p in acc]
        else:
            branches = _paths(s.then_body) + _paths(s.else_body)
            acc = [p + q for p in acc for q in branches]
    return acc


def _occurrences(stmts) -> Iterator[str]:
    for s in stmts:
        if isinstance(s, Assign):
            yield s.var
            yield from expr_vars(s.rhs)
        else:
            yield from _occurrences(s.then_body)
            yield from _occurrences(s.else_body)


def program_variables(ast: LoopAst) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for v in _occurrences(ast.body):
        if not is_counter_name(v):
            seen.setdefault(v, None)
    return tuple(seen)


def flatten(ast: LoopAst) -> PathSystem:
    """One straight-line assignment sequence per combination of branch choices."""
    return PathSystem(program_variables(ast), tuple(_paths(ast.body)))


def branch_count(stmts) -> int:
    """Number of paths through ``stmts`` (product over sequential ifs)."""
    total = 1
    for s in stmts:
        if isinstance(s, If):
            total *= branch_count(s.then_body) + branch_count(s.else_body)
    return total


def execute(ast: LoopAst, state: dict, choose, counter: int = 0) -> dict:
    """Run one loop iteration on concrete values.

    ``choose()`` returns True for the then-branch; counter names evaluate to
    the number of completed iterations.
    """
    state = dict(state)

    def run(stmts):
        for s in stmts:
            if isinstance(s, Assign):
                env = _CounterEnv(state, counter)
                state[s.var] = eval_expr(s.rhs, env)
            else:
                run(s.then_body if choose() else s.else_body)

    run(ast.body)
    return state


class _CounterEnv(dict):
    def __init__(self, state, counter):
        super().__init__(state)
        self.counter = counter

    def __missing__(self, key):
        if is_counter_name(key):
            return Fraction(self.counter)
        raise KeyError(key)


__all__ = [
    "Assign", "BinOp", "Expr", "If", "LoopAst", "Neg", "Num", "PathSystem", "Pow", "Var",
    "branch_count", "eval_expr", "execute", "expr_vars", "flatten", "format_expr",
    "format_loop", "initial_name", "is_counter_name", "parse", "program_variables",
    "tokenize",
]
