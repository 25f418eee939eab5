"""Exact model checking: the probability a pointed belief model assigns
to a formula.

The recursion: top is 1, bot is 0, an atom is its stored likelihood,
``(a ? b : c)`` is ``p(a)p(b) + (1-p(a))p(c)``, and ``[a | b]_r`` is the
role-weighted sum of ``p(a)p(b)`` over successors divided by the
role-weighted sum of ``p(b)``, defaulting to 1 when that denominator is
exactly zero.  Results are memoized on (individual, sub-term), so the
number of node evaluations is at most |individuals| * |sub-terms|.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import SignatureError
from .model import BeliefModel, PointedModel
from .syntax import (Always, Atom, Formula, IfThenElse, Marginal, Never,
                     desugar)

__all__ = ["evaluate", "expectation", "EvalStats"]

# Deep conditional chains (repeated-sampling sugar, automata translations)
# recurse along the formula's depth.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class EvalStats:
    """Instrumentation for the memoized evaluator.

    ``node_evaluations`` counts memo misses, i.e. distinct
    (individual, sub-term) pairs actually computed.
    """

    node_evaluations: int = 0
    memo_hits: int = 0


def evaluate(pm: PointedModel, f: Formula, stats: EvalStats | None = None) -> Fraction:
    """Probability that the pointed model satisfies the formula, exactly."""
    model, point = pm
    if not model.has_individual(point):
        raise SignatureError(f"unknown individual {point!r}")
    core = desugar(f)
    _check_signature(model, core)
    memo: dict[tuple[str, Formula], Fraction] = {}
    return _eval(model, point, core, memo, stats)


def expectation(model: BeliefModel, individual: str, role: str, f: Formula,
                stats: EvalStats | None = None) -> Fraction:
    """Role-weighted expected value of the formula over successors."""
    if role not in model.roles:
        raise SignatureError(f"unknown role {role!r}")
    if not model.has_individual(individual):
        raise SignatureError(f"unknown individual {individual!r}")
    core = desugar(f)
    _check_signature(model, core)
    memo: dict[tuple[str, Formula], Fraction] = {}
    total = ZERO
    for j, weight in model.role_row(role, individual).items():
        if weight != 0:
            total += weight * _eval(model, j, core, memo, stats)
    return total


def _eval(model: BeliefModel, i: str, f: Formula,
          memo: dict[tuple[str, Formula], Fraction],
          stats: EvalStats | None) -> Fraction:
    key = (i, f)
    got = memo.get(key)
    if got is not None:
        if stats is not None:
            stats.memo_hits += 1
        return got
    if stats is not None:
        stats.node_evaluations += 1
    if isinstance(f, Always):
        value = ONE
    elif isinstance(f, Never):
        value = ZERO
    elif isinstance(f, Atom):
        value = model.ell(i, f.name)
    elif isinstance(f, IfThenElse):
        cond = _eval(model, i, f.cond, memo, stats)
        value = (cond * _eval(model, i, f.then, memo, stats)
                 + (1 - cond) * _eval(model, i, f.orelse, memo, stats))
    elif isinstance(f, Marginal):
        numerator = ZERO
        denominator = ZERO
        for j, weight in model.role_row(f.role, i).items():
            if weight == 0:
                continue
            given = _eval(model, j, f.given, memo, stats)
            if given == 0:
                continue
            denominator += weight * given
            numerator += weight * given * _eval(model, j, f.target, memo, stats)
        value = ONE if denominator == 0 else numerator / denominator
    else:  # pragma: no cover - desugar() leaves only core nodes
        raise TypeError(f"non-core node {type(f).__name__} reached the evaluator")
    memo[key] = value
    return value


def _check_signature(model: BeliefModel, core: Formula) -> None:
    sig = model.signature()
    seen: set[Formula] = set()

    def rec(g: Formula) -> None:
        if g in seen:
            return
        seen.add(g)
        if isinstance(g, Atom) and not sig.allows_concept(g.name):
            raise SignatureError(f"concept {g.name!r} is not in the model's signature")
        if isinstance(g, Marginal) and not sig.allows_role(g.role):
            raise SignatureError(f"role {g.role!r} is not in the model's signature")
        for c in g.children():
            rec(c)

    rec(core)
