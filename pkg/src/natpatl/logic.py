"""Formulas of NatPATL / NatPATL*: syntax tree, parser, printer, classification.

Concrete grammar, loosest binding first::

    formula  := or
    or       := and ('|' and)*
    and      := until ('&' until)*
    until    := unary ('U' until)?               (right associative)
    unary    := '!' unary | 'X' unary | 'F' unary | 'G' unary
              | '<<' agents '>>' '[' cmp number ',' 'k' '=' int ']' until
              | 'T' | atom | '(' formula ')'

``F f`` is read as ``T U f`` and ``G f`` as ``!(T U !f)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .cgs import Cgs

CMP_OPS = ("<=", "<", ">", ">=")
_CONJUGATE = {"<=": "<", "<": "<=", ">": ">=", ">=": ">"}
_FLIP = {"<=": ">=", "<": ">", ">": "<", ">=": "<="}


def conjugate(op: str) -> str:
    return _CONJUGATE[op]


def flip(op: str) -> str:
    """Operator ``op'`` with ``1 - p op d  iff  p op' 1 - d``."""
    return _FLIP[op]


def compare(p: Fraction, op: str, d: Fraction) -> bool:
    if op == "<=":
        return p <= d
    if op == "<":
        return p < d
    if op == ">":
        return p > d
    if op == ">=":
        return p >= d
    raise ValueError(f"unknown comparison {op!r}")


class Formula:
    """Base class of all syntax-tree nodes."""

    def children(self) -> tuple[Formula, ...]:
        return ()

    def walk(self) -> Iterator[Formula]:
        yield self
        for c in self.children():
            yield from c.walk()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Top(Formula):
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Atom(Formula):
    name: str
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Coalition(Formula):
    agents: tuple[str, ...]
    cmp: str
    threshold: Fraction
    k: int
    body: Formula
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)

    def __post_init__(self):
        if self.cmp not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.cmp!r}")
        if not 0 <= self.threshold <= 1:
            raise ThresholdOutOfRange(self.threshold)
        if self.k < 1:
            raise ValueError("complexity bound k must be at least 1")
        object.__setattr__(self, "agents", tuple(sorted(set(self.agents))))

    def children(self):
        return (self.body,)


BoolFormula = Formula  # Top / Atom / Not / Or / And only
TEMPORAL = (Next, Until)


def F(f: Formula) -> Formula:
    return Until(Top(), f)


def G(f: Formula) -> Formula:
    return Not(Until(Top(), Not(f)))


def conj(*fs: Formula) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


# ---------------------------------------------------------------- errors


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}" + (f": {text!r}" if text else ""))
        self.position = position


class UnknownAgent(ValueError):
    def __init__(self, agent: str):
        super().__init__(f"unknown agent {agent!r} in coalition")
        self.agent = agent


class ThresholdOutOfRange(ValueError):
    def __init__(self, d):
        super().__init__(f"threshold {d} outside [0, 1]")
        self.threshold = d


class UnknownAtom(ValueError):
    def __init__(self, atom: str):
        super().__init__(f"unknown atomic proposition {atom!r}")
        self.atom = atom


# ---------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><<|>>|<=|>=|->|[<>=!&|()\[\],.+*{}:])
    """,
    re.VERBOSE,
)

KEYWORDS = {"T", "X", "F", "G", "U"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError("unexpected character", pos, text[pos])
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


class TokenStream:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def accept(self, text: str) -> Token | None:
        if self.cur.text == text and self.cur.kind != "eof":
            tok = self.cur
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise self.error(f"expected {text!r}")
        return tok

    def expect_kind(self, kind: str) -> Token:
        if self.cur.kind != kind:
            raise self.error(f"expected {kind}")
        tok = self.cur
        self.i += 1
        return tok

    def error(self, message: str) -> FormulaSyntaxError:
        return FormulaSyntaxError(message, self.cur.pos, self.cur.text or "<end>")

    def at_end(self) -> bool:
        return self.cur.kind == "eof"


def parse_number(text: str) -> Fraction:
    return Fraction(text)


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, stream: TokenStream, agents=None, boolean_only=False):
        self.ts = stream
        self.agents = None if agents is None else set(agents)
        self.boolean_only = boolean_only

    def formula(self) -> Formula:
        return self.or_()

    def or_(self) -> Formula:
        start = self.ts.cur.pos
        left = self.and_()
        while self.ts.accept("|"):
            right = self.and_()
            left = Or(left, right, span=(start, self.ts.cur.pos))
        return left

    def and_(self) -> Formula:
        start = self.ts.cur.pos
        left = self.until()
        while self.ts.accept("&"):
            right = self.until()
            left = And(left, right, span=(start, self.ts.cur.pos))
        return left

    def until(self) -> Formula:
        start = self.ts.cur.pos
        left = self.unary()
        if not self.boolean_only and self.ts.cur.kind == "ident" and self.ts.cur.text == "U":
            self.ts.i += 1
            right = self.until()
            return Until(left, right, span=(start, self.ts.cur.pos))
        return left

    def unary(self) -> Formula:
        ts = self.ts
        tok = ts.cur
        start = tok.pos
        if ts.accept("!"):
            return Not(self.unary(), span=(start, ts.cur.pos))
        if tok.kind == "ident" and tok.text in ("X", "F", "G") and not self.boolean_only:
            ts.i += 1
            arg = self.unary()
            if tok.text == "X":
                return Next(arg, span=(start, ts.cur.pos))
            if tok.text == "F":
                return Until(Top(), arg, span=(start, ts.cur.pos))
            return Not(Until(Top(), Not(arg)), span=(start, ts.cur.pos))
        if tok.text == "<<" and not self.boolean_only:
            return self.coalition()
        if tok.kind == "ident":
            if tok.text in KEYWORDS:
                if tok.text == "T":
                    ts.i += 1
                    return Top(span=(start, ts.cur.pos))
                raise ts.error("unexpected keyword")
            ts.i += 1
            return Atom(tok.text, span=(start, ts.cur.pos))
        if ts.accept("("):
            inner = self.formula()
            ts.expect(")")
            return inner
        raise ts.error("expected a formula")

    def coalition(self) -> Formula:
        ts = self.ts
        start = ts.cur.pos
        ts.expect("<<")
        agents = []
        if ts.cur.text != ">>":
            agents.append(ts.expect_kind("ident").text)
            while ts.accept(","):
                agents.append(ts.expect_kind("ident").text)
        ts.expect(">>")
        if self.agents is not None:
            for a in agents:
                if a not in self.agents:
                    raise UnknownAgent(a)
        ts.expect("[")
        op_tok = ts.cur
        if op_tok.text not in CMP_OPS:
            raise ts.error("expected comparison operator")
        ts.i += 1
        num_tok = ts.expect_kind("num")
        d = parse_number(num_tok.text)
        if not 0 <= d <= 1:
            raise ThresholdOutOfRange(d)
        ts.expect(",")
        k_tok = ts.expect_kind("ident")
        if k_tok.text != "k":
            raise FormulaSyntaxError("expected 'k'", k_tok.pos, k_tok.text)
        ts.expect("=")
        k_num = ts.expect_kind("num")
        if not k_num.text.isdigit():
            raise FormulaSyntaxError("k must be a natural number", k_num.pos, k_num.text)
        ts.expect("]")
        body = self.until()
        return Coalition(tuple(agents), op_tok.text, d, int(k_num.text), body, span=(start, ts.cur.pos))


def parse_formula(text: str, agents=None) -> Formula:
    ts = TokenStream(text)
    f = _Parser(ts, agents).formula()
    if not ts.at_end():
        raise ts.error("trailing input")
    return f


def parse_bool(text: str) -> Formula:
    ts = TokenStream(text)
    f = _Parser(ts, boolean_only=True).formula()
    if not ts.at_end():
        raise ts.error("trailing input")
    return f


def parse_bool_from(ts: TokenStream) -> Formula:
    """Parse one Boolean operand (unary level) from a shared token stream."""
    return _Parser(ts, boolean_only=True).unary()


# ---------------------------------------------------------------- printer


def _fmt_fraction(d: Fraction) -> str:
    return str(d.numerator) if d.denominator == 1 else f"{d.numerator}/{d.denominator}"


def to_text(f: Formula) -> str:
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + to_text(f.arg)
    if isinstance(f, Or):
        return f"({to_text(f.left)} | {to_text(f.right)})"
    if isinstance(f, And):
        return f"({to_text(f.left)} & {to_text(f.right)})"
    if isinstance(f, Next):
        return "X " + to_text(f.arg)
    if isinstance(f, Until):
        return f"({to_text(f.left)} U {to_text(f.right)})"
    if isinstance(f, Coalition):
        return (
            f"(<<{','.join(f.agents)}>>[{f.cmp}{_fmt_fraction(f.threshold)}, k={f.k}] "
            f"{to_text(f.body)})"
        )
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- analysis


def is_boolean(f: Formula) -> bool:
    return all(isinstance(g, (Top, Atom, Not, Or, And)) for g in f.walk())


def is_state_formula(f: Formula) -> bool:
    """No temporal operator outside a coalition operator."""
    if isinstance(f, TEMPORAL):
        return False
    if isinstance(f, Coalition):
        return True
    return all(is_state_formula(c) for c in f.children())


def natpatl_body(body: Formula) -> bool:
    if isinstance(body, Next):
        return is_state_formula(body.arg)
    if isinstance(body, Until):
        return is_state_formula(body.left) and is_state_formula(body.right)
    return False


def is_natpatl(f: Formula) -> bool:
    if isinstance(f, TEMPORAL):
        return False
    if isinstance(f, Coalition):
        if not natpatl_body(f.body):
            return False
        return all(is_natpatl(c) for c in f.body.children())
    return all(is_natpatl(c) for c in f.children())


@dataclass(frozen=True)
class Classification:
    fragment: str  # "NatPATL" or "NatPATLstar"
    positive: bool
    parity: dict  # position path -> "even" | "odd"
    nodes: dict  # position path -> subformula

    def parity_of(self, sub: Formula) -> str:
        for path in sorted(self.nodes, key=lambda p: (len(p), p)):
            if self.nodes[path] == sub:
                return self.parity[path]
        raise KeyError(sub)


def classify(f: Formula) -> Classification:
    parity: dict = {}
    nodes: dict = {}

    def go(g: Formula, path: tuple, odd: bool):
        parity[path] = "odd" if odd else "even"
        nodes[path] = g
        flip_here = isinstance(g, Not)
        for i, c in enumerate(g.children()):
            go(c, path + (i,), odd ^ flip_here)

    go(f, (), False)
    positive = not any(isinstance(g, Not) for g in f.walk())
    return Classification(
        fragment="NatPATL" if is_natpatl(f) else "NatPATLstar",
        positive=positive,
        parity=parity,
        nodes=nodes,
    )


def atoms(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in f.walk() if isinstance(g, Atom))


def eval_labels(g: Formula, labels: frozenset[str]) -> bool:
    if isinstance(g, Top):
        return True
    if isinstance(g, Atom):
        return g.name in labels
    if isinstance(g, Not):
        return not eval_labels(g.arg, labels)
    if isinstance(g, Or):
        return eval_labels(g.left, labels) or eval_labels(g.right, labels)
    if isinstance(g, And):
        return eval_labels(g.left, labels) and eval_labels(g.right, labels)
    raise TypeError(f"not a Boolean formula: {to_text(g)}")


def eval_bool(g: Formula, s: str, cgs: Cgs) -> bool:
    for p in atoms(g):
        if p not in cgs.props:
            raise UnknownAtom(p)
    return eval_labels(g, cgs.labels[s])


def bool_size(g: Formula) -> int:
    """Symbol count: atoms, T, and each connective count one."""
    return sum(1 for _ in g.walk())
