"""Acyclic alternating automata over concept labels and roles.

An automaton alternates between existential states, where the label of
the current individual selects a set of universal options, and universal
states, where each defined role forces a move to the successor reached
by that role.  A player unable to move loses, and acyclicity makes every
game determined.  Compilation from positive-normal-form concepts is
state-per-subformula: conjunction runs both games simultaneously,
disjunction lets the existential player pick a branch, and an
existential restriction forces one role hop.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable

from .errors import CapExceededError
from .alc import (ALCConcept, ALCInterpretation, AndC, AtomC, Bottom,
                  ExistsC, NotC, OrC, Top, concept_atoms, concept_roles,
                  is_pnf)

__all__ = [
    "AlternatingAutomaton", "compile_automaton", "automaton_accepts",
    "AcceptedTree", "recognized_trees", "default_tree_cap",
]

MAX_ALPHABET = 6


def default_tree_cap() -> int:
    value = os.environ.get("ADL_TREE_CAP")
    return int(value) if value else 100_000


Label = frozenset    # subset of the atom alphabet
EState = int
UState = int


@dataclass
class AlternatingAutomaton:
    """Existential transitions are stored explicitly for every label in
    the powerset of the alphabet; an absent key means the move is
    undefined and the existential player loses there."""

    atoms: tuple[str, ...]
    roles: tuple[str, ...]
    start: EState
    delta_e: dict[EState, dict[Label, tuple[UState, ...]]]
    delta_a: dict[UState, dict[str, EState]]
    exist_info: dict[EState, str] = field(default_factory=dict)

    @property
    def exist_states(self) -> tuple[EState, ...]:
        return tuple(sorted(self.delta_e))

    @property
    def univ_states(self) -> tuple[UState, ...]:
        return tuple(sorted(self.delta_a))

    def labels(self) -> list[Label]:
        out = [frozenset()]
        for a in self.atoms:
            out += [lab | {a} for lab in out]
        return out

    def depth(self) -> int:
        """Longest chain of role hops from the start state."""
        memo: dict[EState, int] = {}

        def rec(s: EState) -> int:
            if s in memo:
                return memo[s]
            best = 0
            for options in self.delta_e.get(s, {}).values():
                for u in options:
                    for nxt in self.delta_a.get(u, {}).values():
                        best = max(best, 1 + rec(nxt))
            memo[s] = best
            return best

        return rec(self.start)

    def validate_acyclic(self) -> bool:
        """No existential state can reach itself through a role hop."""
        visiting: set[EState] = set()
        done: set[EState] = set()

        def rec(s: EState) -> bool:
            if s in done:
                return True
            if s in visiting:
                return False
            visiting.add(s)
            for options in self.delta_e.get(s, {}).values():
                for u in options:
                    for nxt in self.delta_a.get(u, {}).values():
                        if not rec(nxt):
                            return False
            visiting.discard(s)
            done.add(s)
            return True

        return rec(self.start)


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def compile_automaton(c: ALCConcept,
                      atoms: Iterable[str] | None = None,
                      roles: Iterable[str] | None = None) -> AlternatingAutomaton:
    """Compile a positive-normal-form concept over the alphabet of the
    atoms and roles occurring in it (overridable, e.g. to align two
    automata on a shared alphabet)."""
    if not is_pnf(c):
        raise ValueError("concept must be in positive normal form")
    alphabet = tuple(sorted(concept_atoms(c) if atoms is None else set(atoms)))
    role_alphabet = tuple(sorted(concept_roles(c) if roles is None else set(roles)))
    if len(alphabet) > MAX_ALPHABET:
        raise CapExceededError(
            f"alphabet of {len(alphabet)} atoms exceeds the cap of {MAX_ALPHABET}")
    builder = _Builder(alphabet, role_alphabet)
    start = builder.compile(c)
    return AlternatingAutomaton(alphabet, role_alphabet, start,
                                builder.delta_e, builder.delta_a,
                                builder.exist_info)


class _Builder:
    def __init__(self, atoms: tuple[str, ...], roles: tuple[str, ...]):
        self.atoms = atoms
        self.roles = roles
        self.labels = [frozenset()]
        for a in atoms:
            self.labels += [lab | {a} for lab in self.labels]
        self.delta_e: dict[EState, dict[Label, tuple[UState, ...]]] = {}
        self.delta_a: dict[UState, dict[str, EState]] = {}
        self.exist_info: dict[EState, str] = {}
        self._next = 0

    def new_estate(self, info: str) -> EState:
        s = self._next
        self._next += 1
        self.delta_e[s] = {}
        self.exist_info[s] = info
        return s

    def new_ustate(self) -> UState:
        s = self._next
        self._next += 1
        self.delta_a[s] = {}
        return s

    def compile(self, c: ALCConcept) -> EState:
        if isinstance(c, Top):
            s = self.new_estate("top")
            win = self.new_ustate()
            for lab in self.labels:
                self.delta_e[s][lab] = (win,)
            return s
        if isinstance(c, Bottom):
            return self.new_estate("bot")
        if isinstance(c, AtomC):
            s = self.new_estate(c.name)
            win = self.new_ustate()
            for lab in self.labels:
                if c.name in lab:
                    self.delta_e[s][lab] = (win,)
            return s
        if isinstance(c, NotC):
            # PNF leaves negation on atoms only: accept the complementary labels.
            s = self.new_estate(f"!{c.operand.to_text()}")
            win = self.new_ustate()
            for lab in self.labels:
                if c.operand.name not in lab:
                    self.delta_e[s][lab] = (win,)
            return s
        if isinstance(c, AndC):
            left = self.compile(c.lhs)
            right = self.compile(c.rhs)
            return self._conjoin(left, right, c.to_text())
        if isinstance(c, OrC):
            left = self.compile(c.lhs)
            right = self.compile(c.rhs)
            s = self.new_estate(c.to_text())
            for lab in self.labels:
                options = (self.delta_e[left].get(lab, ())
                           + self.delta_e[right].get(lab, ()))
                if options:
                    self.delta_e[s][lab] = options
            return s
        if isinstance(c, ExistsC):
            inner = self.compile(c.operand)
            s = self.new_estate(c.to_text())
            hop = self.new_ustate()
            self.delta_a[hop][c.role] = inner
            for lab in self.labels:
                self.delta_e[s][lab] = (hop,)
            return s
        raise TypeError(type(c).__name__)

    def _conjoin(self, left: EState, right: EState, info: str) -> EState:
        """Product start state: both games are played at once.  The
        universal player only needs to move in one game per role; pairs
        where only one side defines the role fall back to that side."""
        pair_cache: dict[tuple[EState, EState], EState] = {}
        upair_cache: dict[tuple[UState, UState], UState] = {}

        def epair(a: EState, b: EState) -> EState:
            key = (a, b)
            if key in pair_cache:
                return pair_cache[key]
            s = self.new_estate(f"({self.exist_info[a]} & {self.exist_info[b]})")
            pair_cache[key] = s
            for lab in self.labels:
                opts_a = self.delta_e[a].get(lab)
                opts_b = self.delta_e[b].get(lab)
                if not opts_a or not opts_b:
                    continue
                self.delta_e[s][lab] = tuple(upair(u, v)
                                             for u in opts_a for v in opts_b)
            return s

        def upair(u: UState, v: UState) -> UState:
            key = (u, v)
            if key in upair_cache:
                return upair_cache[key]
            s = self.new_ustate()
            upair_cache[key] = s
            moves_u = self.delta_a[u]
            moves_v = self.delta_a[v]
            for role in set(moves_u) | set(moves_v):
                if role in moves_u and role in moves_v:
                    self.delta_a[s][role] = epair(moves_u[role], moves_v[role])
                elif role in moves_u:
                    self.delta_a[s][role] = moves_u[role]
                else:
                    self.delta_a[s][role] = moves_v[role]
            return s

        return epair(left, right)


# ---------------------------------------------------------------------------
# Acceptance
# ---------------------------------------------------------------------------

def automaton_accepts(aut: AlternatingAutomaton,
                      itp: ALCInterpretation,
                      point: str,
                      successor: Callable[[str, str], str] | None = None) -> bool:
    """Solve the acceptance game by backward induction over positions.

    ``successor`` may override how the unique role successor is found,
    which lets lazily sampled interpretations raise on missing depth.
    """
    if successor is None:
        def successor(i: str, role: str) -> str:
            succ = itp.successors(role, i)
            if len(succ) != 1:
                raise ValueError(
                    f"interpretation is not functional at ({i}, {role})")
            return succ[0]

    memo: dict[tuple[int, str], bool] = {}

    def win_e(s: EState, i: str) -> bool:
        key = (s, i)
        if key in memo:
            return memo[key]
        label = itp.label(i, aut.atoms)
        options = aut.delta_e.get(s, {}).get(label)
        result = bool(options) and any(win_u(u, i) for u in options)
        memo[key] = result
        return result

    def win_u(u: UState, i: str) -> bool:
        moves = aut.delta_a.get(u, {})
        # The universal player loses immediately when no role is defined.
        return all(win_e(nxt, successor(i, role)) for role, nxt in moves.items())

    return win_e(aut.start, point)


# ---------------------------------------------------------------------------
# Accepted trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AcceptedTree:
    """A finite tree of complete labels with at most one child per role;
    the finite prefix a winning existential strategy inspects."""

    label: Label
    branches: tuple[tuple[str, "AcceptedTree"], ...]  # sorted by role

    def words(self) -> frozenset[tuple]:
        """The word set: the root label followed by alternating role and
        label segments for every node of the tree."""
        out = {(self.label,)}
        for role, sub in self.branches:
            for w in sub.words():
                out.add((self.label, role) + w)
        return frozenset(out)

    def size(self) -> int:
        return 1 + sum(sub.size() for _, sub in self.branches)

    def contains(self, other: "AcceptedTree") -> bool:
        """Word-set containment (other is a subtree of self)."""
        if other.label != self.label:
            return False
        mine = dict(self.branches)
        for role, sub in other.branches:
            if role not in mine or not mine[role].contains(sub):
                return False
        return True

    def to_text(self) -> str:
        label = "{" + ",".join(sorted(self.label)) + "}"
        if not self.branches:
            return label
        inner = " ".join(f"{role}:{sub.to_text()}" for role, sub in self.branches)
        return f"{label}({inner})"


def recognized_trees(aut: AlternatingAutomaton,
                     cap: int | None = None) -> frozenset[AcceptedTree]:
    """Enumerate the minimal accepted trees.

    A candidate tree arises from a choice, per existential node, of one
    universal option; its children cover exactly the roles that option
    defines.  Candidates whose word set strictly contains another
    accepted candidate's are discarded.
    """
    cap = default_tree_cap() if cap is None else cap
    memo: dict[EState, frozenset[AcceptedTree]] = {}

    def trees_of(s: EState) -> frozenset[AcceptedTree]:
        if s in memo:
            return memo[s]
        out: set[AcceptedTree] = set()
        for label, options in aut.delta_e.get(s, {}).items():
            for u in options:
                moves = sorted(aut.delta_a.get(u, {}).items())
                child_choices = []
                for role, nxt in moves:
                    subs = trees_of(nxt)
                    if not subs:
                        break
                    child_choices.append([(role, t) for t in subs])
                else:
                    for combo in product(*child_choices):
                        out.add(AcceptedTree(label, tuple(combo)))
                        if len(out) > cap:
                            raise CapExceededError(
                                f"more than {cap} candidate trees; raise "
                                f"ADL_TREE_CAP to enumerate anyway")
        memo[s] = frozenset(out)
        return memo[s]

    candidates = trees_of(aut.start)
    return _minimal(candidates)


def _minimal(trees: frozenset[AcceptedTree]) -> frozenset[AcceptedTree]:
    by_label: dict[Label, list[AcceptedTree]] = {}
    for t in trees:
        by_label.setdefault(t.label, []).append(t)
    keep: set[AcceptedTree] = set()
    for group in by_label.values():
        group.sort(key=AcceptedTree.size)
        for t in group:
            if not any(t.contains(other) and other != t
                       for other in group if other.size() < t.size()):
                keep.add(t)
    return frozenset(keep)
