"""Classical concept language and its interpretations.

Concepts are built from ``top``, atoms, conjunction, negation, and
existential role restriction; disjunction and ``bot`` are admitted so
positive normal form is closed under negation pushing.  The functional
fragment (every role has exactly one successor at every individual)
reduces linearly to propositional logic, which is the bridge used by the
probability-space semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .errors import ParseError
from . import syntax
from .syntax import (ALWAYS, NEVER, And, Atom, Exists, Formula, IfThenElse,
                     Marginal, Not, Or, Signature, parse_formula)

__all__ = [
    "ALCConcept", "Top", "Bottom", "AtomC", "NotC", "AndC", "OrC", "ExistsC",
    "ALCInterpretation", "alc_eval", "to_pnf", "parse_alc", "alc_to_adl",
    "concept_atoms", "concept_roles", "concept_modal_depth",
    "PropFormula", "prop_translate", "prop_eval", "prop_valuation",
]


# ---------------------------------------------------------------------------
# Concept AST
# ---------------------------------------------------------------------------

class ALCConcept:
    __slots__ = ("_hash",)

    def children(self) -> tuple["ALCConcept", ...]:
        return ()

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return self.to_text()

    def to_text(self) -> str:
        raise NotImplementedError


class Top(ALCConcept):
    __slots__ = ()

    def __init__(self):
        object.__setattr__(self, "_hash", hash("alc-top"))

    __hash__ = ALCConcept.__hash__

    def __eq__(self, other):
        return isinstance(other, Top)

    def to_text(self):
        return "top"


class Bottom(ALCConcept):
    __slots__ = ()

    def __init__(self):
        object.__setattr__(self, "_hash", hash("alc-bot"))

    __hash__ = ALCConcept.__hash__

    def __eq__(self, other):
        return isinstance(other, Bottom)

    def to_text(self):
        return "bot"


TOP = Top()
BOTTOM = Bottom()


class AtomC(ALCConcept):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("alc-atom", name)))

    __hash__ = ALCConcept.__hash__

    def __eq__(self, other):
        return isinstance(other, AtomC) and self.name == other.name

    def to_text(self):
        return self.name


class NotC(ALCConcept):
    __slots__ = ("operand",)

    def __init__(self, operand: ALCConcept):
        object.__setattr__(self, "operand", operand)
        object.__setattr__(self, "_hash", hash(("alc-not", operand._hash)))

    __hash__ = ALCConcept.__hash__

    def children(self):
        return (self.operand,)

    def __eq__(self, other):
        return isinstance(other, NotC) and self.operand == other.operand

    def to_text(self):
        return f"!{self.operand.to_text()}"


class AndC(ALCConcept):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs: ALCConcept, rhs: ALCConcept):
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "_hash", hash(("alc-and", lhs._hash, rhs._hash)))

    __hash__ = ALCConcept.__hash__

    def children(self):
        return (self.lhs, self.rhs)

    def __eq__(self, other):
        return isinstance(other, AndC) and self.lhs == other.lhs and self.rhs == other.rhs

    def to_text(self):
        return f"({self.lhs.to_text()} & {self.rhs.to_text()})"


class OrC(ALCConcept):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs: ALCConcept, rhs: ALCConcept):
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "_hash", hash(("alc-or", lhs._hash, rhs._hash)))

    __hash__ = ALCConcept.__hash__

    def children(self):
        return (self.lhs, self.rhs)

    def __eq__(self, other):
        return isinstance(other, OrC) and self.lhs == other.lhs and self.rhs == other.rhs

    def to_text(self):
        return f"({self.lhs.to_text()} | {self.rhs.to_text()})"


class ExistsC(ALCConcept):
    __slots__ = ("role", "operand")

    def __init__(self, role: str, operand: ALCConcept):
        object.__setattr__(self, "role", role)
        object.__setattr__(self, "operand", operand)
        object.__setattr__(self, "_hash", hash(("alc-ex", role, operand._hash)))

    __hash__ = ALCConcept.__hash__

    def children(self):
        return (self.operand,)

    def __eq__(self, other):
        return (isinstance(other, ExistsC) and self.role == other.role
                and self.operand == other.operand)

    def to_text(self):
        return f"Ex_{self.role} {self.operand.to_text()}"


def concept_atoms(c: ALCConcept) -> frozenset[str]:
    out: set[str] = set()

    def rec(g):
        if isinstance(g, AtomC):
            out.add(g.name)
        for child in g.children():
            rec(child)

    rec(c)
    return frozenset(out)


def concept_roles(c: ALCConcept) -> frozenset[str]:
    out: set[str] = set()

    def rec(g):
        if isinstance(g, ExistsC):
            out.add(g.role)
        for child in g.children():
            rec(child)

    rec(c)
    return frozenset(out)


def concept_modal_depth(c: ALCConcept) -> int:
    if isinstance(c, ExistsC):
        return 1 + concept_modal_depth(c.operand)
    if c.children():
        return max(concept_modal_depth(x) for x in c.children())
    return 0


# ---------------------------------------------------------------------------
# Parsing (reuses the formula grammar, restricted)
# ---------------------------------------------------------------------------

def parse_alc(text: str, signature: Optional[Signature] = None) -> ALCConcept:
    """Parse a concept using the shared surface syntax: atoms, ``!``,
    ``&``, ``|``, ``Ex_role``, ``top``, ``bot``, and parentheses."""
    return from_formula(parse_formula(text, signature))


def from_formula(f: Formula) -> ALCConcept:
    if isinstance(f, syntax.Always):
        return TOP
    if isinstance(f, syntax.Never):
        return BOTTOM
    if isinstance(f, Atom):
        return AtomC(f.name)
    if isinstance(f, Not):
        return NotC(from_formula(f.operand))
    if isinstance(f, And):
        return AndC(from_formula(f.lhs), from_formula(f.rhs))
    if isinstance(f, Or):
        return OrC(from_formula(f.lhs), from_formula(f.rhs))
    if isinstance(f, Exists):
        return ExistsC(f.role, from_formula(f.operand))
    raise ParseError(f"{f.to_text()!r} uses operators outside the concept language")


def alc_to_adl(c: ALCConcept) -> Formula:
    """Direct structural embedding using the standard abbreviations.

    On a {0, 1} model obtained from a classical interpretation the result
    evaluates to 1 exactly when the interpretation satisfies the concept.
    """
    if isinstance(c, Top):
        return ALWAYS
    if isinstance(c, Bottom):
        return NEVER
    if isinstance(c, AtomC):
        return Atom(c.name)
    if isinstance(c, NotC):
        return IfThenElse(alc_to_adl(c.operand), NEVER, ALWAYS)
    if isinstance(c, AndC):
        return IfThenElse(alc_to_adl(c.lhs), alc_to_adl(c.rhs), NEVER)
    if isinstance(c, OrC):
        return IfThenElse(alc_to_adl(c.lhs), ALWAYS, alc_to_adl(c.rhs))
    if isinstance(c, ExistsC):
        return IfThenElse(Marginal(NEVER, alc_to_adl(c.operand), c.role), NEVER, ALWAYS)
    raise TypeError(type(c).__name__)


# ---------------------------------------------------------------------------
# Interpretations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ALCInterpretation:
    """A classical interpretation: individuals, concept extensions, and
    role extensions as sets of pairs."""

    individuals: tuple[str, ...]
    concept_ext: dict[str, frozenset[str]]
    role_ext: dict[str, frozenset[tuple[str, str]]]

    def concept_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.concept_ext))

    def role_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.role_ext))

    def successors(self, role: str, i: str) -> list[str]:
        return sorted(v for (u, v) in self.role_ext.get(role, frozenset()) if u == i)

    def is_functional(self, roles: Iterable[str] | None = None) -> bool:
        for role in (roles if roles is not None else self.role_ext):
            for u in self.individuals:
                if len(self.successors(role, u)) != 1:
                    return False
        return True

    def label(self, i: str, atoms: Iterable[str]) -> frozenset[str]:
        return frozenset(a for a in atoms
                         if i in self.concept_ext.get(a, frozenset()))


def alc_eval(itp: ALCInterpretation, i: str, c: ALCConcept) -> bool:
    """Classical satisfaction at a point."""
    if isinstance(c, Top):
        return True
    if isinstance(c, Bottom):
        return False
    if isinstance(c, AtomC):
        return i in itp.concept_ext.get(c.name, frozenset())
    if isinstance(c, NotC):
        return not alc_eval(itp, i, c.operand)
    if isinstance(c, AndC):
        return alc_eval(itp, i, c.lhs) and alc_eval(itp, i, c.rhs)
    if isinstance(c, OrC):
        return alc_eval(itp, i, c.lhs) or alc_eval(itp, i, c.rhs)
    if isinstance(c, ExistsC):
        return any(alc_eval(itp, j, c.operand)
                   for j in itp.successors(c.role, i))
    raise TypeError(type(c).__name__)


# ---------------------------------------------------------------------------
# Positive normal form
# ---------------------------------------------------------------------------

def to_pnf(c: ALCConcept) -> ALCConcept:
    """Push negations down to atoms.

    Valid over functional interpretations, where the unique successor
    makes ``!Ex_r C`` equivalent to ``Ex_r !C``.
    """
    return _pnf(c, negated=False)


def _pnf(c: ALCConcept, negated: bool) -> ALCConcept:
    if isinstance(c, Top):
        return BOTTOM if negated else TOP
    if isinstance(c, Bottom):
        return TOP if negated else BOTTOM
    if isinstance(c, AtomC):
        return NotC(c) if negated else c
    if isinstance(c, NotC):
        return _pnf(c.operand, not negated)
    if isinstance(c, AndC):
        lhs = _pnf(c.lhs, negated)
        rhs = _pnf(c.rhs, negated)
        return OrC(lhs, rhs) if negated else AndC(lhs, rhs)
    if isinstance(c, OrC):
        lhs = _pnf(c.lhs, negated)
        rhs = _pnf(c.rhs, negated)
        return AndC(lhs, rhs) if negated else OrC(lhs, rhs)
    if isinstance(c, ExistsC):
        return ExistsC(c.role, _pnf(c.operand, negated))
    raise TypeError(type(c).__name__)


def is_pnf(c: ALCConcept) -> bool:
    if isinstance(c, NotC):
        return isinstance(c.operand, AtomC)
    return all(is_pnf(x) for x in c.children())


# ---------------------------------------------------------------------------
# Propositional reduction of the functional fragment
# ---------------------------------------------------------------------------

PropAtomKey = tuple[str, tuple[str, ...]]  # (concept, role word from the root)


class PropFormula:
    __slots__ = ()


@dataclass(frozen=True)
class PTrue(PropFormula):
    pass


@dataclass(frozen=True)
class PFalse(PropFormula):
    pass


@dataclass(frozen=True)
class PAtom(PropFormula):
    key: PropAtomKey


@dataclass(frozen=True)
class PNot(PropFormula):
    operand: PropFormula


@dataclass(frozen=True)
class PAnd(PropFormula):
    lhs: PropFormula
    rhs: PropFormula


@dataclass(frozen=True)
class POr(PropFormula):
    lhs: PropFormula
    rhs: PropFormula


def prop_eval(p: PropFormula, true_atoms: frozenset[PropAtomKey]) -> bool:
    if isinstance(p, PTrue):
        return True
    if isinstance(p, PFalse):
        return False
    if isinstance(p, PAtom):
        return p.key in true_atoms
    if isinstance(p, PNot):
        return not prop_eval(p.operand, true_atoms)
    if isinstance(p, PAnd):
        return prop_eval(p.lhs, true_atoms) and prop_eval(p.rhs, true_atoms)
    if isinstance(p, POr):
        return prop_eval(p.lhs, true_atoms) or prop_eval(p.rhs, true_atoms)
    raise TypeError(type(p).__name__)


def prop_translate(c: ALCConcept) -> tuple[PropFormula, int]:
    """Map a concept to a propositional formula over atoms indexed by the
    role word leading to them: an atom at word w holds when the individual
    reached from the root along w satisfies it.  Each existential
    restriction appends its role to the word, which is faithful exactly
    because functional interpretations have unique successors.

    Returns the formula and the word-length bound needed to evaluate it.
    """
    def rec(g: ALCConcept, word: tuple[str, ...]) -> PropFormula:
        if isinstance(g, Top):
            return PTrue()
        if isinstance(g, Bottom):
            return PFalse()
        if isinstance(g, AtomC):
            return PAtom((g.name, word))
        if isinstance(g, NotC):
            return PNot(rec(g.operand, word))
        if isinstance(g, AndC):
            return PAnd(rec(g.lhs, word), rec(g.rhs, word))
        if isinstance(g, OrC):
            return POr(rec(g.lhs, word), rec(g.rhs, word))
        if isinstance(g, ExistsC):
            return rec(g.operand, word + (g.role,))
        raise TypeError(type(g).__name__)

    return rec(c, ()), concept_modal_depth(c)


def prop_valuation(itp: ALCInterpretation, i: str, atoms: Iterable[str],
                   roles: Iterable[str], depth: int) -> frozenset[PropAtomKey]:
    """The set of word-indexed atoms a pointed functional interpretation
    makes true, truncated at the given word length."""
    atoms = tuple(atoms)
    roles = tuple(roles)
    out: set[PropAtomKey] = set()

    def walk(u: str, word: tuple[str, ...]) -> None:
        for a in atoms:
            if u in itp.concept_ext.get(a, frozenset()):
                out.add((a, word))
        if len(word) >= depth:
            return
        for role in roles:
            successors = itp.successors(role, u)
            if len(successors) != 1:
                raise ValueError(f"interpretation is not functional at ({u}, {role})")
            walk(successors[0], word + (role,))

    walk(i, ())
    return frozenset(out)
