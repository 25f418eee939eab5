"""Formula abstract syntax, concrete grammar, and desugaring.

The core language has five constructs: ``top``, ``bot``, atomic concepts,
the ternary conditional ``(a ? b : c)``, and the marginalisation operator
``[a | b]_role``.  On top of this sits a sugar layer (``&``, ``|``, ``!``,
``=>``, expectation ``E_role``, existence ``Ex_role``, and repeated
sampling ``a^{n/m}``) that desugars into the core constructs.

Concrete grammar (whitespace insignificant)::

    formula  := implies
    implies  := or ( "=>" implies )?
    or       := and ( "|" and )*
    and      := unary ( "&" unary )*
    unary    := "!" unary | "E_"IDENT unary | "Ex_"IDENT unary | postfix
    postfix  := primary ( "^{" NAT "/" NAT "}" )*
    primary  := "top" | "bot" | IDENT
              | "(" formula ( "?" formula ":" formula )? ")"
              | "[" formula "|" formula "]_" IDENT

Inside ``[ ... | ... ]_r`` the first component is parsed with the
top-level ``|`` operator disabled so the separator is unambiguous;
parenthesise to use a disjunction there.  Identifiers of the shape
``E_x`` and ``Ex_x`` are reserved for the expectation and existence
operators and cannot name concepts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from .errors import ParseError, SignatureError

__all__ = [
    "Formula", "Always", "Never", "Atom", "IfThenElse", "Marginal",
    "Not", "And", "Or", "Implies", "Expect", "Exists", "AtLeast",
    "ALWAYS", "NEVER", "Signature",
    "parse_formula", "desugar", "modal_depth", "subformulas",
    "parse_rational", "format_rational",
]


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

class Formula:
    """Base class of all formula nodes. Nodes are immutable and hashable."""

    __slots__ = ("_hash",)
    core = False

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:
        raise NotImplementedError

    def __eq__(self, other) -> bool:  # pragma: no cover - overridden
        raise NotImplementedError

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


class Always(Formula):
    __slots__ = ()
    core = True

    def __init__(self):
        object.__setattr__(self, "_hash", hash("top"))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, Always)

    def to_text(self):
        return "top"


class Never(Formula):
    __slots__ = ()
    core = True

    def __init__(self):
        object.__setattr__(self, "_hash", hash("bot"))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, Never)

    def to_text(self):
        return "bot"


ALWAYS = Always()
NEVER = Never()


class Atom(Formula):
    __slots__ = ("name",)
    core = True

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("atom", name)))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return self is other or (isinstance(other, Atom) and self.name == other.name)

    def to_text(self):
        return self.name


class IfThenElse(Formula):
    __slots__ = ("cond", "then", "orelse")
    core = True

    def __init__(self, cond: Formula, then: Formula, orelse: Formula):
        object.__setattr__(self, "cond", cond)
        object.__setattr__(self, "then", then)
        object.__setattr__(self, "orelse", orelse)
        object.__setattr__(self, "_hash", hash(("ite", cond._hash, then._hash, orelse._hash)))

    def children(self):
        return (self.cond, self.then, self.orelse)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, IfThenElse) and self._hash == other._hash
                and self.cond == other.cond and self.then == other.then
                and self.orelse == other.orelse)

    def to_text(self):
        return f"({self.cond.to_text()} ? {self.then.to_text()} : {self.orelse.to_text()})"


class Marginal(Formula):
    """``[target | given]_role``: expectation of target over the role's
    successors, conditioned on the sampled successor satisfying given."""

    __slots__ = ("target", "given", "role")
    core = True

    def __init__(self, target: Formula, given: Formula, role: str):
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "given", given)
        object.__setattr__(self, "role", role)
        object.__setattr__(self, "_hash", hash(("marg", target._hash, given._hash, role)))

    def children(self):
        return (self.target, self.given)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Marginal) and self._hash == other._hash
                and self.role == other.role and self.target == other.target
                and self.given == other.given)

    def to_text(self):
        return f"[{self.target.to_text()} | {self.given.to_text()}]_{self.role}"


class Not(Formula):
    __slots__ = ("operand",)

    def __init__(self, operand: Formula):
        object.__setattr__(self, "operand", operand)
        object.__setattr__(self, "_hash", hash(("not", operand._hash)))

    def children(self):
        return (self.operand,)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Not) and self.operand == other.operand

    def to_text(self):
        return f"!{self.operand.to_text()}"


class _Binary(Formula):
    __slots__ = ("lhs", "rhs")
    symbol = "?"

    def __init__(self, lhs: Formula, rhs: Formula):
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "_hash", hash((self.symbol, lhs._hash, rhs._hash)))

    def children(self):
        return (self.lhs, self.rhs)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is type(self) and self._hash == other._hash
                and self.lhs == other.lhs and self.rhs == other.rhs)

    def to_text(self):
        return f"({self.lhs.to_text()} {self.symbol} {self.rhs.to_text()})"


class And(_Binary):
    __slots__ = ()
    symbol = "&"


class Or(_Binary):
    __slots__ = ()
    symbol = "|"


class Implies(_Binary):
    __slots__ = ()
    symbol = "=>"


class Expect(Formula):
    """``E_role a``: expected value of a over the role's successors."""

    __slots__ = ("role", "operand")

    def __init__(self, role: str, operand: Formula):
        object.__setattr__(self, "role", role)
        object.__setattr__(self, "operand", operand)
        object.__setattr__(self, "_hash", hash(("expect", role, operand._hash)))

    def children(self):
        return (self.operand,)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Expect) and self.role == other.role
                and self.operand == other.operand)

    def to_text(self):
        return f"E_{self.role} {self.operand.to_text()}"


class Exists(Formula):
    """``Ex_role a``: some successor of the role can satisfy a."""

    __slots__ = ("role", "operand")

    def __init__(self, role: str, operand: Formula):
        object.__setattr__(self, "role", role)
        object.__setattr__(self, "operand", operand)
        object.__setattr__(self, "_hash", hash(("exists", role, operand._hash)))

    def children(self):
        return (self.operand,)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Exists) and self.role == other.role
                and self.operand == other.operand)

    def to_text(self):
        return f"Ex_{self.role} {self.operand.to_text()}"


class AtLeast(Formula):
    """``a^{n/m}``: the event of a coming up true at least n times in m
    independent samples."""

    __slots__ = ("hits", "draws", "operand")

    def __init__(self, hits: int, draws: int, operand: Formula):
        if hits < 0 or draws < 0:
            raise ValueError("sampling counts must be non-negative")
        object.__setattr__(self, "hits", hits)
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "operand", operand)
        object.__setattr__(self, "_hash", hash(("atleast", hits, draws, operand._hash)))

    def children(self):
        return (self.operand,)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, AtLeast) and self.hits == other.hits
                and self.draws == other.draws and self.operand == other.operand)

    def to_text(self):
        inner = self.operand.to_text()
        if not isinstance(self.operand, (Atom, Always, Never, IfThenElse, _Binary)):
            inner = f"({inner})"
        return f"{inner}^{{{self.hits}/{self.draws}}}"


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Signature:
    """Declared vocabulary: atomic concepts, roles (always including
    ``id``), and optionally named individuals (usable as absolute
    concepts in formulas)."""

    concepts: frozenset[str]
    roles: frozenset[str]
    names: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if "id" not in self.roles:
            object.__setattr__(self, "roles", self.roles | {"id"})

    def allows_concept(self, name: str) -> bool:
        return name in self.concepts or name in self.names

    def allows_role(self, name: str) -> bool:
        return name in self.roles

    def merged(self, other: "Signature") -> "Signature":
        return Signature(self.concepts | other.concepts,
                         self.roles | other.roles,
                         self.names | other.names)

    def covers(self, other: "Signature") -> bool:
        return (other.concepts <= self.concepts
                and other.roles <= self.roles
                and other.names <= self.names)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<WS>\s+)
  | (?P<IMPLIES>=>)
  | (?P<ARROW>->)
  | (?P<LE><=)
  | (?P<EQEQ>==)
  | (?P<RBRACKET_ROLE>\]_)
  | (?P<NUMBER>\d+\.\d+|\d+)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PUNCT>[()\[\]?:|&!^{}/=,])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", position=pos)
        kind = m.lastgroup
        if kind != "WS":
            tok_text = m.group()
            if kind == "PUNCT":
                kind = tok_text
            tokens.append(Token(kind, tok_text, pos))
        pos = m.end()
    tokens.append(Token("EOF", "", len(text)))
    return tokens


_EXPECT_RE = re.compile(r"^E_([A-Za-z_][A-Za-z0-9_]*)$")
_EXISTS_RE = re.compile(r"^Ex_([A-Za-z_][A-Za-z0-9_]*)$")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token], signature: Optional[Signature]):
        self.tokens = tokens
        self.i = 0
        self.signature = signature

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        if self.cur.kind != kind:
            raise ParseError(f"expected {kind!r}, found {self.cur.text or 'end of input'!r}",
                             position=self.cur.pos)
        return self.advance()

    def at_end(self) -> bool:
        return self.cur.kind == "EOF"

    # grammar levels -------------------------------------------------------

    def formula(self, no_or: bool = False) -> Formula:
        return self.implies(no_or)

    def implies(self, no_or: bool) -> Formula:
        lhs = self.or_level(no_or)
        if self.cur.kind == "IMPLIES":
            self.advance()
            rhs = self.implies(no_or)
            return Implies(lhs, rhs)
        return lhs

    def or_level(self, no_or: bool) -> Formula:
        lhs = self.and_level()
        while not no_or and self.cur.kind == "|":
            self.advance()
            lhs = Or(lhs, self.and_level())
        return lhs

    def and_level(self) -> Formula:
        lhs = self.unary()
        while self.cur.kind == "&":
            self.advance()
            lhs = And(lhs, self.unary())
        return lhs

    def unary(self) -> Formula:
        tok = self.cur
        if tok.kind == "!":
            self.advance()
            return Not(self.unary())
        if tok.kind == "IDENT":
            m = _EXPECT_RE.match(tok.text)
            if m:
                self.advance()
                role = self._check_role(m.group(1), tok.pos)
                return Expect(role, self.unary())
            m = _EXISTS_RE.match(tok.text)
            if m:
                self.advance()
                role = self._check_role(m.group(1), tok.pos)
                return Exists(role, self.unary())
        return self.postfix()

    def postfix(self) -> Formula:
        f = self.primary()
        while self.cur.kind == "^":
            self.advance()
            self.expect("{")
            hits = int(self.expect("NUMBER").text)
            self.expect("/")
            draws = int(self.expect("NUMBER").text)
            self.expect("}")
            f = AtLeast(hits, draws, f)
        return f

    def primary(self) -> Formula:
        tok = self.cur
        if tok.kind == "IDENT":
            self.advance()
            if tok.text == "top":
                return ALWAYS
            if tok.text == "bot":
                return NEVER
            return Atom(self._check_concept(tok.text, tok.pos))
        if tok.kind == "(":
            self.advance()
            first = self.formula()
            if self.cur.kind == "?":
                self.advance()
                then = self.formula()
                self.expect(":")
                orelse = self.formula()
                self.expect(")")
                return IfThenElse(first, then, orelse)
            self.expect(")")
            return first
        if tok.kind == "[":
            self.advance()
            target = self.formula(no_or=True)
            self.expect("|")
            given = self.formula()
            close = self.expect("RBRACKET_ROLE")
            role_tok = self.expect("IDENT")
            role = self._check_role(role_tok.text, role_tok.pos)
            del close
            return Marginal(target, given, role)
        raise ParseError(f"expected a formula, found {tok.text or 'end of input'!r}",
                         position=tok.pos)

    # signature checks -----------------------------------------------------

    def _check_concept(self, name: str, pos: int) -> str:
        if self.signature is not None and not self.signature.allows_concept(name):
            raise SignatureError(f"undeclared concept {name!r} at position {pos}")
        return name

    def _check_role(self, name: str, pos: int) -> str:
        if self.signature is not None and not self.signature.allows_role(name):
            raise SignatureError(f"undeclared role {name!r} at position {pos}")
        return name


def parse_formula(text: str, signature: Optional[Signature] = None) -> Formula:
    """Parse concrete formula syntax.

    When a signature is supplied every concept and role mention is
    validated against it; undeclared names are hard errors.
    """
    parser = _Parser(tokenize(text), signature)
    f = parser.formula()
    if not parser.at_end():
        raise ParseError(f"trailing input {parser.cur.text!r}", position=parser.cur.pos)
    return f


# ---------------------------------------------------------------------------
# Desugaring
# ---------------------------------------------------------------------------

def desugar(f: Formula) -> Formula:
    """Rewrite a formula into the five core constructs.

    ``a & b`` becomes ``(a ? b : bot)``, ``a | b`` becomes
    ``(a ? top : b)``, ``!a`` becomes ``(a ? bot : top)``, ``a => b``
    becomes ``(a ? b : top)``, ``E_r a`` becomes ``[a | top]_r``,
    ``Ex_r a`` becomes ``![bot | a]_r``, and ``a^{n/m}`` unrolls into a
    conditional chain (1 if n = 0, 0 if m < n, otherwise branch on one
    sample and recurse with one fewer draw).
    """
    memo: dict[Formula, Formula] = {}

    def rec(g: Formula) -> Formula:
        got = memo.get(g)
        if got is not None:
            return got
        if isinstance(g, (Always, Never, Atom)):
            out = g
        elif isinstance(g, IfThenElse):
            out = IfThenElse(rec(g.cond), rec(g.then), rec(g.orelse))
        elif isinstance(g, Marginal):
            out = Marginal(rec(g.target), rec(g.given), g.role)
        elif isinstance(g, Not):
            out = IfThenElse(rec(g.operand), NEVER, ALWAYS)
        elif isinstance(g, And):
            out = IfThenElse(rec(g.lhs), rec(g.rhs), NEVER)
        elif isinstance(g, Or):
            out = IfThenElse(rec(g.lhs), ALWAYS, rec(g.rhs))
        elif isinstance(g, Implies):
            out = IfThenElse(rec(g.lhs), rec(g.rhs), ALWAYS)
        elif isinstance(g, Expect):
            out = Marginal(rec(g.operand), ALWAYS, g.role)
        elif isinstance(g, Exists):
            out = IfThenElse(Marginal(NEVER, rec(g.operand), g.role), NEVER, ALWAYS)
        elif isinstance(g, AtLeast):
            out = _desugar_at_least(g.hits, g.draws, rec(g.operand), memo)
        else:  # pragma: no cover
            raise TypeError(f"unknown formula node {type(g).__name__}")
        memo[g] = out
        return out

    return rec(f)


def _desugar_at_least(n: int, m: int, operand: Formula,
                      memo: dict[Formula, Formula]) -> Formula:
    # Sub-results are shared through the memo so the unrolled chain is a
    # DAG of O(n*m) distinct nodes rather than an exponential tree.
    key = AtLeast(n, m, operand)
    got = memo.get(key)
    if got is not None:
        return got
    if n == 0:
        out = ALWAYS
    elif m < n:
        out = NEVER
    else:
        out = IfThenElse(operand,
                         _desugar_at_least(n - 1, m - 1, operand, memo),
                         _desugar_at_least(n, m - 1, operand, memo))
    memo[key] = out
    return out


# ---------------------------------------------------------------------------
# Structural measures
# ---------------------------------------------------------------------------

def modal_depth(f: Formula) -> int:
    """Maximum nesting of marginalisation operators (sugar counted after
    desugaring, so ``E_r`` and ``Ex_r`` each contribute one level)."""
    memo: dict[Formula, int] = {}

    def rec(g: Formula) -> int:
        got = memo.get(g)
        if got is not None:
            return got
        if isinstance(g, Marginal):
            out = 1 + max(rec(g.target), rec(g.given))
        elif g.children():
            out = max(rec(c) for c in g.children())
        else:
            out = 0
        memo[g] = out
        return out

    return rec(desugar(f))


def subformulas(f: Formula) -> frozenset[Formula]:
    """The set of distinct sub-terms of the desugared formula."""
    seen: set[Formula] = set()

    def rec(g: Formula) -> None:
        if g in seen:
            return
        seen.add(g)
        for c in g.children():
            rec(c)

    rec(desugar(f))
    return frozenset(seen)


# ---------------------------------------------------------------------------
# Exact number parsing
# ---------------------------------------------------------------------------

def parse_rational(text: str) -> Fraction:
    """Parse ``p/q``, an integer, or a decimal literal exactly."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"invalid rational {text!r}: {exc}") from exc


def format_rational(value: Fraction) -> str:
    """Render a rational as the package prints numbers: exact plus decimal."""
    return f"{value} ({float(value)})"
