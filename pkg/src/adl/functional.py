"""The probability-space reading of belief models.

A belief model induces a distribution over functional interpretations:
sample every concept bit and one successor per role, independently per
reached individual.  The probability that a sampled interpretation
satisfies a classical concept is computed exactly here, three ways:

* ``measure`` solves the acceptance game of the compiled automaton in
  distribution, propagating joint acceptance probabilities through the
  role successors (exact rationals);
* ``adl_translate`` compiles the automaton to a formula whose value
  under the recursive semantics equals the measure;
* ``monte_carlo_measure`` estimates the same quantity by sampling.

The joint propagation in ``measure`` tracks which automaton states
accept simultaneously at a shared successor, because one sampled
successor serves every universal option that reads the same role.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import sqrt
from typing import Iterable

from .alc import (ALCConcept, ALCInterpretation, alc_eval,
                  concept_modal_depth, to_pnf)
from .automata import (AcceptedTree, AlternatingAutomaton, automaton_accepts,
                       compile_automaton, recognized_trees)
from .errors import CapExceededError
from .model import BeliefModel, PointedModel
from .syntax import (ALWAYS, NEVER, And, Atom, Formula, IfThenElse, Marginal,
                     Not)

__all__ = [
    "MeasureResult", "measure", "adl_translate", "translate_automaton",
    "sample_interpretation", "monte_carlo_measure", "MonteCarloResult",
]

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# Exact measure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureResult:
    """Exact probability of sampling a satisfying functional
    interpretation, plus the recognized trees with their sampling
    weights.

    ``value`` is the exact union measure.  Tree weights follow the
    per-tree product formula; when two trees can extend a common
    sampling (distinct strategies through different roles) their events
    overlap and the weights can sum to more than ``value``.
    """

    value: Fraction
    trees: tuple[tuple[AcceptedTree, Fraction], ...]

    @property
    def tree_weight_total(self) -> Fraction:
        return sum((w for _, w in self.trees), ZERO)


def measure(pm: PointedModel, concept: ALCConcept,
            include_trees: bool = True,
            tree_cap: int | None = None) -> MeasureResult:
    model, point = pm
    aut = compile_automaton(to_pnf(concept))
    value = acceptance_probability(aut, model, point)
    trees: tuple[tuple[AcceptedTree, Fraction], ...] = ()
    if include_trees:
        enumerated = recognized_trees(aut, cap=tree_cap)
        weighted = [(t, tree_weight(t, aut, model, point)) for t in sorted(
            enumerated, key=AcceptedTree.to_text)]
        trees = tuple(weighted)
    return MeasureResult(value, trees)


def acceptance_probability(aut: AlternatingAutomaton, model: BeliefModel,
                           point: str) -> Fraction:
    dist = _joint_acceptance(aut, model, frozenset({aut.start}), point, {})
    return sum((p for accepted, p in dist.items() if aut.start in accepted), ZERO)


def _label_distribution(aut: AlternatingAutomaton, model: BeliefModel,
                        i: str) -> list[tuple[frozenset, Fraction]]:
    out: list[tuple[frozenset, Fraction]] = [(frozenset(), ONE)]
    for a in aut.atoms:
        p = model.ell(i, a)
        nxt: list[tuple[frozenset, Fraction]] = []
        for label, w in out:
            if p != 0:
                nxt.append((label | {a}, w * p))
            if p != 1:
                nxt.append((label, w * (1 - p)))
        out = nxt
    return out


def _joint_acceptance(aut: AlternatingAutomaton, model: BeliefModel,
                      states: frozenset[int], i: str,
                      memo: dict) -> dict[frozenset[int], Fraction]:
    """Distribution, over one sampling rooted at i, of the subset of the
    given existential states whose games the existential player wins."""
    key = (states, i)
    got = memo.get(key)
    if got is not None:
        return got
    result: dict[frozenset[int], Fraction] = {}
    for label, label_p in _label_distribution(aut, model, i):
        if label_p == 0:
            continue
        options = {s: aut.delta_e.get(s, {}).get(label) for s in states}
        # Successor states needed per role, shared by every option that
        # reads that role: the sampling fixes one successor per role.
        per_role: dict[str, set[int]] = {}
        for opts in options.values():
            for u in opts or ():
                for role, nxt in aut.delta_a.get(u, {}).items():
                    per_role.setdefault(role, set()).add(nxt)
        roles = sorted(per_role)
        role_dists: list[dict[frozenset[int], Fraction]] = []
        for role in roles:
            needed = frozenset(per_role[role])
            mixed: dict[frozenset[int], Fraction] = {}
            for j, weight in model.role_row(role, i).items():
                if weight == 0:
                    continue
                for accepted, p in _joint_acceptance(aut, model, needed, j,
                                                     memo).items():
                    if weight * p != 0:
                        mixed[accepted] = mixed.get(accepted, ZERO) + weight * p
            role_dists.append(mixed)
        for combo in product(*(d.items() for d in role_dists)):
            combo_p = label_p
            accepted_by_role: dict[str, frozenset[int]] = {}
            for role, (accepted, p) in zip(roles, combo):
                combo_p *= p
                accepted_by_role[role] = accepted
            if combo_p == 0:
                continue
            winners = frozenset(
                s for s, opts in options.items()
                if opts and any(
                    all(nxt in accepted_by_role[role]
                        for role, nxt in aut.delta_a.get(u, {}).items())
                    for u in opts))
            result[winners] = result.get(winners, ZERO) + combo_p
    memo[key] = result
    return result


def _tree_weight(tree: AcceptedTree, model: BeliefModel, i: str) -> Fraction:
    weight = ONE
    for a in tree.label:
        weight *= model.ell(i, a)
    atoms_out = set()

    # the label is complete over the automaton alphabet, recovered from
    # the atoms mentioned anywhere in the tree plus the alphabet below
    return _tree_weight_over(tree, model, i, None)


def _tree_weight_over(tree: AcceptedTree, model: BeliefModel, i: str,
                      alphabet) -> Fraction:
    raise NotImplementedError


def tree_weight(tree: AcceptedTree, aut: AlternatingAutomaton,
                model: BeliefModel, i: str) -> Fraction:
    """Sampling weight of one accepted tree: the label's exact
    probability times, per branch, the role-weighted recursive weight."""
    w = ONE
    for a in aut.atoms:
        p = model.ell(i, a)
        w *= p if a in tree.label else (1 - p)
    if w == 0:
        return ZERO
    for role, sub in tree.branches:
        total = ZERO
        for j, rp in model.role_row(role, i).items():
            if rp != 0:
                total += rp * tree_weight(sub, aut, model, j)
        w *= total
    return w


# ---------------------------------------------------------------------------
# Automaton -> formula translation
# ---------------------------------------------------------------------------

def adl_translate(concept: ALCConcept) -> Formula:
    """A formula whose value at any pointed model equals the exact
    measure of the concept: each atom is sampled once through a
    conditional chain, and each universal option is checked role by role,
    with marginalisation conditioning each re-sample on everything
    already established about that role's successor."""
    aut = compile_automaton(to_pnf(concept))
    return translate_automaton(aut)


def translate_automaton(aut: AlternatingAutomaton) -> Formula:
    atoms = aut.atoms
    roles = aut.roles
    tau_memo: dict[int, Formula] = {}

    def tau(s: int) -> Formula:
        got = tau_memo.get(s)
        if got is not None:
            return got

        def chain(k: int, label: frozenset) -> Formula:
            if k == len(atoms):
                options = aut.delta_e.get(s, {}).get(label)
                return lam(options or ())
            atom = atoms[k]
            return IfThenElse(Atom(atom),
                              chain(k + 1, label | {atom}),
                              chain(k + 1, label))

        out = chain(0, frozenset())
        tau_memo[s] = out
        return out

    def lam(options: tuple[int, ...]) -> Formula:
        memo: dict[tuple[int, int, tuple[Formula, ...]], Formula] = {}

        def rec(ri: int, oj: int, mu: tuple[Formula, ...]) -> Formula:
            if oj >= len(options):
                return NEVER
            if ri >= len(roles):
                return ALWAYS
            key = (ri, oj, mu)
            got = memo.get(key)
            if got is not None:
                return got
            u = options[oj]
            nxt = aut.delta_a.get(u, {}).get(roles[ri])
            if nxt is None:
                out = rec(ri + 1, oj, mu)
            else:
                checked = tau(nxt)
                cond = Marginal(checked, mu[ri], roles[ri])
                mu_yes = mu[:ri] + (And(mu[ri], checked),) + mu[ri + 1:]
                mu_no = mu[:ri] + (And(mu[ri], Not(checked)),) + mu[ri + 1:]
                out = IfThenElse(cond,
                                 rec(ri + 1, oj, mu_yes),
                                 rec(0, oj + 1, mu_no))
            memo[key] = out
            return out

        return rec(0, 0, tuple(ALWAYS for _ in roles))

    return tau(aut.start)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_interpretation(pm: PointedModel, depth: int, seed: int,
                          atoms: Iterable[str] | None = None,
                          roles: Iterable[str] | None = None) -> tuple[ALCInterpretation, str]:
    """Draw one functional interpretation over successor words up to the
    given depth.  Returns the interpretation and its root word.

    Each word's concept bits are independent draws with the underlying
    individual's likelihoods; each role successor is one draw from the
    role row.  Deterministic in the seed.
    """
    model, point = pm
    atoms = tuple(sorted(model.concepts)) if atoms is None else tuple(sorted(atoms))
    roles = tuple(sorted(model.roles)) if roles is None else tuple(sorted(roles))
    rng = random.Random(seed)

    concept_ext: dict[str, set[str]] = {a: set() for a in atoms}
    role_ext: dict[str, set[tuple[str, str]]] = {r: set() for r in roles}
    individuals: list[str] = []

    row_cdf: dict[tuple[str, str], tuple[tuple[float, str], ...]] = {}

    def cdf(role: str, u: str) -> tuple[tuple[float, str], ...]:
        key = (role, u)
        got = row_cdf.get(key)
        if got is None:
            acc = 0.0
            entries = []
            for v in sorted(model.role_row(role, u)):
                acc += float(model.role_row(role, u)[v])
                entries.append((acc, v))
            got = tuple(entries)
            row_cdf[key] = got
        return got

    def walk(word: tuple[str, ...]) -> str:
        u = word[-1]
        name = "/".join(word)
        individuals.append(name)
        for a in atoms:
            if rng.random() < float(model.ell(u, a)):
                concept_ext[a].add(name)
        if len(word) <= depth:
            for role in roles:
                draw = rng.random()
                target = None
                for threshold, v in cdf(role, u):
                    if draw < threshold:
                        target = v
                        break
                if target is None:
                    target = cdf(role, u)[-1][1]
                child = walk(word + (target,))
                role_ext[role].add((name, child))
        return name

    root = walk((point,))
    itp = ALCInterpretation(
        tuple(individuals),
        {a: frozenset(members) for a, members in concept_ext.items()},
        {r: frozenset(pairs) for r, pairs in role_ext.items()},
    )
    return itp, root


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    low: float
    high: float
    samples: int
    hits: int

    def contains(self, value) -> bool:
        return self.low <= float(value) <= self.high


_Z99 = 2.5758293035489004  # two-sided 99% normal quantile


def monte_carlo_measure(pm: PointedModel, concept: ALCConcept,
                        n: int, seed: int) -> MonteCarloResult:
    """Estimate the measure by sampling interpretations and checking
    classical satisfaction, with a Wilson 99% interval.

    Per-sample seeds derive from (seed, index), so the estimate does not
    depend on evaluation order.  All-hit or all-miss runs report the
    degenerate point interval.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    model, point = pm
    depth = concept_modal_depth(concept)
    from .alc import concept_atoms, concept_roles
    atoms = concept_atoms(concept)
    roles = concept_roles(concept)
    hits = 0
    for index in range(n):
        itp, root = sample_interpretation(pm, depth, _derive_seed(seed, index),
                                          atoms=atoms, roles=roles)
        if alc_eval(itp, root, concept):
            hits += 1
    p_hat = hits / n
    if hits == 0 or hits == n:
        return MonteCarloResult(p_hat, p_hat, p_hat, n, hits)
    z2 = _Z99 * _Z99
    center = (p_hat + z2 / (2 * n)) / (1 + z2 / n)
    spread = (_Z99 * sqrt(p_hat * (1 - p_hat) / n + z2 / (4 * n * n))) / (1 + z2 / n)
    return MonteCarloResult(p_hat, center - spread, center + spread, n, hits)


def _derive_seed(seed: int, index: int) -> int:
    return (seed * 0x9E3779B97F4A7C15 + index) % (2**63)
