"""Abstract syntax, parser, pretty-printer, and desugaring for the .pgcl language.

Programs are built from assignments, sequencing, probabilistic choice
``{P} [p] {Q}``, and while loops.  ``skip`` and ``if``/``else`` are surface
sugar and are expanded during parsing, so the core AST only ever contains the
four constructs above.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class PgclSyntaxError(Exception):
    """Raised on malformed input, with 1-based line/column info."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ProbabilityRangeError(PgclSyntaxError):
    """Raised when a choice probability lies outside [0, 1]."""


# ---------- AST ----------

@dataclass(frozen=True)
class Rat:
    """Nonnegative rational literal."""
    value: Fraction

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"negative literal {self.value}")


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / div mod
    left: "ArithExpr"
    right: "ArithExpr"


ArithExpr = Rat | VarRef | BinOp


@dataclass(frozen=True)
class Cmp:
    op: str  # one of < <= = !=
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


BoolExpr = Cmp | And | Or | Not


@dataclass(frozen=True)
class Assign:
    var: str
    expr: ArithExpr


@dataclass(frozen=True)
class Seq:
    first: "Program"
    second: "Program"


@dataclass(frozen=True)
class Choice:
    left: "Program"
    prob: Fraction
    right: "Program"

    def __post_init__(self):
        if not (0 <= self.prob <= 1):
            raise ValueError(f"choice probability {self.prob} outside [0, 1]")


@dataclass(frozen=True)
class While:
    cond: BoolExpr
    body: "Program"


Program = Assign | Seq | Choice | While


def _flatten_seq(p: "Program", out: list["Program"]) -> None:
    if isinstance(p, Seq):
        _flatten_seq(p.first, out)
        _flatten_seq(p.second, out)
    else:
        out.append(p)


def seq_of(stmts: list["Program"]) -> "Program":
    """Right-nested sequence of one or more statements.

    Nested sequences are flattened first, so composites built from composite
    pieces match the shape the parser produces.
    """
    flat: list[Program] = []
    for stmt in stmts:
        _flatten_seq(stmt, flat)
    if not flat:
        raise ValueError("empty statement list")
    result = flat[-1]
    for stmt in reversed(flat[:-1]):
        result = Seq(stmt, result)
    return result


class FreshNames:
    """Allocator for reserved ``__``-prefixed variable names."""

    def __init__(self):
        self._counter = 0

    def fresh(self, tag: str) -> str:
        name = f"__{tag}{self._counter}"
        self._counter += 1
        return name


def make_if(cond: BoolExpr, then: Program, orelse: Program, names: FreshNames) -> Program:
    """Core-language expansion of ``if (cond) {then} else {orelse}``.

    Uses a fresh one-shot flag so that exactly one branch runs once.
    """
    flag = names.fresh("if")
    return seq_of([
        Assign(flag, Rat(Fraction(0))),
        While(And(cond, Cmp("=", VarRef(flag), Rat(Fraction(0)))),
              seq_of([then, Assign(flag, Rat(Fraction(1)))])),
        While(And(Not(cond), Cmp("=", VarRef(flag), Rat(Fraction(0)))),
              seq_of([orelse, Assign(flag, Rat(Fraction(1)))])),
    ])


SKIP_VAR = "__unit"


def make_skip() -> Program:
    return Assign(SKIP_VAR, Rat(Fraction(0)))


# ---------- Lexer ----------

KEYWORDS = {"while", "if", "else", "skip", "div", "mod"}
SYMBOLS = [":=", "<=", ">=", "!=", "&&", "||", "<", ">", "=", "!",
           ";", "{", "}", "[", "]", "(", ")", "+", "-", "*", "/"]


@dataclass
class Token:
    kind: str  # "ident", "number", "symbol", "keyword", "eof"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += i - start
            continue
        if c.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == "." and i + 1 < n and text[i + 1].isdigit():
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            tokens.append(Token("number", text[start:i], line, col))
            col += i - start
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("symbol", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise PgclSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------- Parser ----------

class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.names = FreshNames()

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str) -> PgclSyntaxError:
        tok = self.peek()
        return PgclSyntaxError(message, tok.line, tok.column)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            raise self.error(f"expected {text!r}, found {tok.text!r}")
        return self.advance()

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind != "eof"

    # program := stmt (';' stmt)*
    def program(self) -> Program:
        stmts = [self.statement()]
        while self.at(";"):
            self.advance()
            stmts.append(self.statement())
        return seq_of(stmts)

    def block(self) -> Program:
        self.expect("{")
        body = self.program()
        self.expect("}")
        return body

    def statement(self) -> Program:
        tok = self.peek()
        if tok.text == "skip":
            self.advance()
            return make_skip()
        if tok.text == "while":
            self.advance()
            self.expect("(")
            cond = self.bool_expr()
            self.expect(")")
            return While(cond, self.block())
        if tok.text == "if":
            self.advance()
            self.expect("(")
            cond = self.bool_expr()
            self.expect(")")
            then = self.block()
            self.expect("else")
            orelse = self.block()
            return make_if(cond, then, orelse, self.names)
        if tok.text == "{":
            left = self.block()
            self.expect("[")
            prob_tok = self.peek()
            prob = self.rational()
            self.expect("]")
            right = self.block()
            if not (0 <= prob <= 1):
                raise ProbabilityRangeError(
                    f"choice probability {prob} outside [0, 1]",
                    prob_tok.line, prob_tok.column)
            return Choice(left, prob, right)
        if tok.kind == "ident":
            self.advance()
            self.expect(":=")
            return Assign(tok.text, self.arith_expr())
        raise self.error(f"expected a statement, found {tok.text!r}")

    def rational(self) -> Fraction:
        tok = self.peek()
        if tok.kind != "number":
            raise self.error(f"expected a number, found {tok.text!r}")
        self.advance()
        value = Fraction(tok.text)
        if self.at("/"):
            self.advance()
            den_tok = self.peek()
            if den_tok.kind != "number":
                raise self.error(f"expected a number, found {den_tok.text!r}")
            self.advance()
            den = Fraction(den_tok.text)
            if den == 0:
                raise PgclSyntaxError("zero denominator", den_tok.line, den_tok.column)
            value /= den
        return value

    # arith: additive < multiplicative < atom
    def arith_expr(self) -> ArithExpr:
        left = self.arith_term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = BinOp(op, left, self.arith_term())
        return left

    def arith_term(self) -> ArithExpr:
        left = self.arith_atom()
        while self.at("*") or self.at("/") or self.at("div") or self.at("mod"):
            op = self.advance().text
            right = self.arith_atom()
            if op == "/" and isinstance(left, Rat) and isinstance(right, Rat):
                # literal quotients fold into a single rational literal, so
                # printed fractions like "1/2" re-parse to the same node
                folded = left.value / right.value if right.value != 0 else Fraction(0)
                left = Rat(folded)
            else:
                left = BinOp(op, left, right)
        return left

    def arith_atom(self) -> ArithExpr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Rat(Fraction(tok.text))
        if tok.kind == "ident":
            self.advance()
            return VarRef(tok.text)
        if tok.text == "(":
            self.advance()
            expr = self.arith_expr()
            self.expect(")")
            return expr
        raise self.error(f"expected an expression, found {tok.text!r}")

    # bool: or < and < unary < comparison
    def bool_expr(self) -> BoolExpr:
        left = self.bool_and()
        while self.at("||"):
            self.advance()
            left = Or(left, self.bool_and())
        return left

    def bool_and(self) -> BoolExpr:
        left = self.bool_unary()
        while self.at("&&"):
            self.advance()
            left = And(left, self.bool_unary())
        return left

    def bool_unary(self) -> BoolExpr:
        if self.at("!"):
            self.advance()
            self.expect("(")
            inner = self.bool_expr()
            self.expect(")")
            return Not(inner)
        if self.at("("):
            # lookahead: "(" may open a parenthesized boolean or an arithmetic
            # operand of a comparison; try the boolean reading first
            saved = self.pos
            try:
                self.advance()
                inner = self.bool_expr()
                self.expect(")")
                return inner
            except PgclSyntaxError:
                self.pos = saved
        return self.comparison()

    def comparison(self) -> BoolExpr:
        left = self.arith_expr()
        tok = self.peek()
        if tok.text in ("<", "<=", "=", "!="):
            self.advance()
            return Cmp(tok.text, left, self.arith_expr())
        if tok.text in (">", ">="):
            self.advance()
            flipped = {">": "<", ">=": "<="}[tok.text]
            return Cmp(flipped, self.arith_expr(), left)
        raise self.error(f"expected a comparison operator, found {tok.text!r}")


def parse(text: str) -> Program:
    """Parse .pgcl source text into a core-language AST."""
    parser = _Parser(text)
    program = parser.program()
    if parser.peek().kind != "eof":
        raise parser.error(f"unexpected trailing input {parser.peek().text!r}")
    return program


# ---------- Pretty-printer ----------

_ADD_PREC = 1
_MUL_PREC = 2
_ATOM_PREC = 3


def _fmt_arith(e: ArithExpr, prec: int) -> str:
    if isinstance(e, Rat):
        if e.value.denominator == 1:
            return str(e.value.numerator)
        # printed as a quotient, so it binds like a division
        s = f"{e.value.numerator}/{e.value.denominator}"
        return f"({s})" if prec > _MUL_PREC else s
    if isinstance(e, VarRef):
        return e.name
    my_prec = _ADD_PREC if e.op in ("+", "-") else _MUL_PREC
    left = _fmt_arith(e.left, my_prec)
    right = _fmt_arith(e.right, my_prec + 1)  # left-assoc: parenthesize right ties
    s = f"{left} {e.op} {right}"
    return f"({s})" if prec > my_prec else s


def _fmt_bool(b: BoolExpr, prec: int) -> str:
    # precedence: or=1 < and=2 < atom=3
    if isinstance(b, Cmp):
        return f"{_fmt_arith(b.left, 0)} {b.op} {_fmt_arith(b.right, 0)}"
    if isinstance(b, Not):
        return f"!({_fmt_bool(b.operand, 0)})"
    if isinstance(b, And):
        s = f"{_fmt_bool(b.left, 2)} && {_fmt_bool(b.right, 3)}"
        return f"({s})" if prec > 2 else s
    s = f"{_fmt_bool(b.left, 1)} || {_fmt_bool(b.right, 2)}"
    return f"({s})" if prec > 1 else s


def _fmt_prob(p: Fraction) -> str:
    if p.denominator == 1:
        return str(p.numerator)
    return f"{p.numerator}/{p.denominator}"


def _stmt_list(p: Program) -> list[Program]:
    out: list[Program] = []
    _flatten_seq(p, out)
    return out


def _fmt_stmt(p: Program, indent: str) -> list[str]:
    if isinstance(p, Assign):
        return [f"{indent}{p.var} := {_fmt_arith(p.expr, 0)}"]
    if isinstance(p, While):
        lines = [f"{indent}while ({_fmt_bool(p.cond, 0)}) {{"]
        lines.extend(_fmt_block(p.body, indent + "    "))
        lines.append(f"{indent}}}")
        return lines
    if isinstance(p, Choice):
        if isinstance(p.left, Assign) and isinstance(p.right, Assign):
            left = _fmt_stmt(p.left, "")[0]
            right = _fmt_stmt(p.right, "")[0]
            return [f"{indent}{{{left}}} [{_fmt_prob(p.prob)}] {{{right}}}"]
        lines = [f"{indent}{{"]
        lines.extend(_fmt_block(p.left, indent + "    "))
        lines.append(f"{indent}}} [{_fmt_prob(p.prob)}] {{")
        lines.extend(_fmt_block(p.right, indent + "    "))
        lines.append(f"{indent}}}")
        return lines
    raise TypeError(f"not a statement: {p!r}")


def _fmt_block(p: Program, indent: str) -> list[str]:
    stmts = _stmt_list(p)
    lines = []
    for k, stmt in enumerate(stmts):
        chunk = _fmt_stmt(stmt, indent)
        if k < len(stmts) - 1:
            chunk[-1] += ";"
        lines.extend(chunk)
    return lines


def pretty_print(p: Program) -> str:
    """Render a program as parseable .pgcl text; parse(pretty_print(p)) == p."""
    return "\n".join(_fmt_block(p, ""))


# ---------- Queries ----------

def is_ordinary(p: Program) -> bool:
    """True iff the program contains no probabilistic choice."""
    if isinstance(p, Assign):
        return True
    if isinstance(p, Seq):
        return is_ordinary(p.first) and is_ordinary(p.second)
    if isinstance(p, While):
        return is_ordinary(p.body)
    return False


def _expr_vars(e: ArithExpr, out: list[str]) -> None:
    if isinstance(e, VarRef):
        if e.name not in out:
            out.append(e.name)
    elif isinstance(e, BinOp):
        _expr_vars(e.left, out)
        _expr_vars(e.right, out)


def _bool_vars(b: BoolExpr, out: list[str]) -> None:
    if isinstance(b, Cmp):
        _expr_vars(b.left, out)
        _expr_vars(b.right, out)
    elif isinstance(b, Not):
        _bool_vars(b.operand, out)
    else:
        _bool_vars(b.left, out)
        _bool_vars(b.right, out)


def _prog_vars(p: Program, out: list[str]) -> None:
    if isinstance(p, Assign):
        if p.var not in out:
            out.append(p.var)
        _expr_vars(p.expr, out)
    elif isinstance(p, Seq):
        _prog_vars(p.first, out)
        _prog_vars(p.second, out)
    elif isinstance(p, Choice):
        _prog_vars(p.left, out)
        _prog_vars(p.right, out)
    else:
        _bool_vars(p.cond, out)
        _prog_vars(p.body, out)


def vars_of(p: Program) -> list[str]:
    """Variables occurring in the program, in first-occurrence order."""
    out: list[str] = []
    _prog_vars(p, out)
    return out
