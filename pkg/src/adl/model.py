"""Aleatoric belief models: finite individuals, per-individual role
distributions, and per-individual concept likelihoods.

All probabilities are exact rationals.  The semantics branches on exact
zero tests, so floating point is never stored in a model.

Model file format (line oriented, ``#`` starts a comment)::

    individuals: H0 H1
    concepts: V F            # optional extra concept declarations
    roles: c                 # optional; id is always available
    concept V: H0=0 H1=1
    role c: H0->H1=3/10 H0->H0=7/10
    names: Hector={H0,H1}

Rationals are written ``p/q``, as integers, or as decimal literals; all
three parse exactly.  Role rows that are not given default to the point
mass on the individual itself, and missing concept values default to 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, NamedTuple

from .errors import ModelFormatError, ParseError
from .syntax import Signature, parse_rational

if TYPE_CHECKING:  # pragma: no cover
    from .alc import ALCInterpretation

__all__ = [
    "BeliefModel", "PointedModel", "Violation",
    "validate_model", "parse_model", "from_alc_interpretation",
]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Violation:
    """One violated model invariant, with enough location to fix it."""

    kind: str
    location: str
    detail: str

    def __str__(self):
        return f"{self.kind} at {self.location}: {self.detail}"


class BeliefModel:
    """Immutable finite belief model.

    ``likelihoods`` maps individual -> concept -> rational in [0, 1] and
    ``role_rows`` maps role -> individual -> (individual -> rational).
    Entries absent from ``likelihoods`` are 0; rows absent from
    ``role_rows`` are the point mass on the row's own individual.  Names
    are ordinary {0, 1} concepts recorded separately so validators can
    check them.
    """

    __slots__ = ("individuals", "concepts", "roles", "names",
                 "_index", "_ell", "_rows")

    def __init__(self,
                 individuals: Iterable[str],
                 concepts: Iterable[str] = (),
                 roles: Iterable[str] = (),
                 likelihoods: Mapping[str, Mapping[str, Fraction]] | None = None,
                 role_rows: Mapping[str, Mapping[str, Mapping[str, Fraction]]] | None = None,
                 names: Mapping[str, frozenset[str]] | None = None):
        self.individuals: tuple[str, ...] = tuple(individuals)
        if len(set(self.individuals)) != len(self.individuals):
            raise ModelFormatError("duplicate individual")
        self._index = {u: k for k, u in enumerate(self.individuals)}
        self.names: dict[str, frozenset[str]] = {
            a: frozenset(members) for a, members in (names or {}).items()}
        concept_set = set(concepts)
        if likelihoods:
            for per in likelihoods.values():
                concept_set.update(per)
        self.concepts: tuple[str, ...] = tuple(sorted(concept_set))
        role_set = {"id"} | set(roles) | set(role_rows or {})
        self.roles: tuple[str, ...] = tuple(sorted(role_set))
        self._ell: dict[str, dict[str, Fraction]] = {
            u: dict((likelihoods or {}).get(u, {})) for u in self.individuals}
        self._rows: dict[str, dict[str, dict[str, Fraction]]] = {}
        for role, rows in (role_rows or {}).items():
            self._rows[role] = {u: dict(row) for u, row in rows.items()}

    # -- access ------------------------------------------------------------

    def ell(self, individual: str, concept: str) -> Fraction:
        """Likelihood of the individual satisfying the concept.  Names
        resolve to their {0, 1} membership value."""
        if concept in self.names:
            return ONE if individual in self.names[concept] else ZERO
        return self._ell[individual].get(concept, ZERO)

    def role_row(self, role: str, individual: str) -> dict[str, Fraction]:
        row = self._rows.get(role, {}).get(individual)
        if row is None:
            return {individual: ONE}
        return row

    def role_value(self, role: str, i: str, j: str) -> Fraction:
        return self.role_row(role, i).get(j, ZERO)

    def index(self, individual: str) -> int:
        return self._index[individual]

    def signature(self) -> Signature:
        return Signature(frozenset(self.concepts), frozenset(self.roles),
                         frozenset(self.names))

    def has_individual(self, individual: str) -> bool:
        return individual in self._index

    # -- functional updates (used by the learning operators) ---------------

    def raw_likelihoods(self) -> dict[str, dict[str, Fraction]]:
        return {u: dict(per) for u, per in self._ell.items()}

    def raw_rows(self) -> dict[str, dict[str, dict[str, Fraction]]]:
        return {role: {u: dict(row) for u, row in rows.items()}
                for role, rows in self._rows.items()}

    def dense_rows(self, role: str) -> dict[str, dict[str, Fraction]]:
        return {u: dict(self.role_row(role, u)) for u in self.individuals}

    def replace(self, *, individuals=None, likelihoods=None, role_rows=None,
                names=None, concepts=None, roles=None) -> "BeliefModel":
        return BeliefModel(
            individuals=self.individuals if individuals is None else individuals,
            concepts=self.concepts if concepts is None else concepts,
            roles=self.roles if roles is None else roles,
            likelihoods=self._ell if likelihoods is None else likelihoods,
            role_rows=self._rows if role_rows is None else role_rows,
            names=self.names if names is None else names,
        )

    # -- serialization -------------------------------------------------------

    def to_text(self) -> str:
        lines = ["individuals: " + " ".join(self.individuals)]
        declared_concepts = [c for c in self.concepts if c not in self.names]
        if declared_concepts:
            lines.append("concepts: " + " ".join(declared_concepts))
        declared_roles = [r for r in self.roles if r != "id"]
        if declared_roles:
            lines.append("roles: " + " ".join(declared_roles))
        for c in declared_concepts:
            entries = " ".join(f"{u}={self.ell(u, c)}" for u in self.individuals
                               if self.ell(u, c) != 0)
            lines.append(f"concept {c}:" + (" " + entries if entries else ""))
        for role in self.roles:
            if role not in self._rows:
                continue
            parts = []
            for u in self.individuals:
                row = self._rows[role].get(u)
                if row is None:
                    continue
                for v in self.individuals:
                    p = row.get(v, ZERO)
                    if p != 0:
                        parts.append(f"{u}->{v}={p}")
            lines.append(f"role {role}: " + " ".join(parts))
        for a in sorted(self.names):
            members = ",".join(sorted(self.names[a], key=self._index.get))
            lines.append(f"names: {a}={{{members}}}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return (f"BeliefModel({len(self.individuals)} individuals, "
                f"{len(self.concepts)} concepts, roles={list(self.roles)})")


class PointedModel(NamedTuple):
    """A belief model together with the individual under evaluation."""

    model: BeliefModel
    point: str

    def valid(self) -> bool:
        return self.model.has_individual(self.point)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_model(m: BeliefModel) -> list[Violation]:
    """Check every model invariant and report all violations found.

    Checks: likelihoods within [0, 1]; every explicit role row is a
    distribution over declared individuals summing to exactly 1; the id
    role is coherent (a positive id(i, j) forces row j to equal row i);
    names are {0, 1} valued and closed under positive id.
    """
    out: list[Violation] = []
    for u in m.individuals:
        for c in m.concepts:
            p = m.ell(u, c)
            if not (0 <= p <= 1):
                out.append(Violation("likelihood-range", f"({u}, {c})", f"value {p}"))
    for role in m.roles:
        rows = m._rows.get(role, {})
        for u, row in rows.items():
            if u not in m._index:
                out.append(Violation("unknown-individual", f"role {role}", f"row for {u}"))
                continue
            total = sum(row.values(), ZERO)
            if total != 1:
                out.append(Violation("row-sum", f"role {role}, row {u}", f"sums to {total}"))
            for v, p in row.items():
                if v not in m._index:
                    out.append(Violation("unknown-individual", f"role {role}, row {u}",
                                         f"target {v}"))
                if not (0 <= p <= 1):
                    out.append(Violation("probability-range", f"role {role}, {u}->{v}",
                                         f"value {p}"))
    for i in m.individuals:
        row_i = m.role_row("id", i)
        for j, p in row_i.items():
            if p > 0 and j in m._index:
                row_j = m.role_row("id", j)
                for k in m.individuals:
                    if row_j.get(k, ZERO) != row_i.get(k, ZERO):
                        out.append(Violation(
                            "id-coherence", f"id({i},{j})={p}",
                            f"id({j},{k})={row_j.get(k, ZERO)} differs from "
                            f"id({i},{k})={row_i.get(k, ZERO)}"))
                        break
    for a, members in m.names.items():
        for u in members:
            if u not in m._index:
                out.append(Violation("unknown-individual", f"name {a}", f"member {u}"))
        for i in members:
            if i not in m._index:
                continue
            for j, p in m.role_row("id", i).items():
                if p > 0 and j not in members:
                    out.append(Violation("name-id-sharing", f"name {a}",
                                         f"{i} has id mass {p} on non-member {j}"))
    return out


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

def parse_model(text: str) -> BeliefModel:
    individuals: list[str] = []
    extra_concepts: list[str] = []
    extra_roles: list[str] = []
    likelihoods: dict[str, dict[str, Fraction]] = {}
    role_rows: dict[str, dict[str, dict[str, Fraction]]] = {}
    names: dict[str, frozenset[str]] = {}
    seen_individuals = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            head, _, rest = line.partition(":")
        except ValueError:
            raise ModelFormatError(f"line {lineno}: missing ':'")
        head = head.strip()
        rest = rest.strip()
        if head == "individuals":
            individuals.extend(rest.split())
            seen_individuals = True
        elif head == "concepts":
            extra_concepts.extend(rest.split())
        elif head == "roles":
            extra_roles.extend(rest.split())
        elif head.startswith("concept "):
            concept = head[len("concept "):].strip()
            if not concept:
                raise ModelFormatError(f"line {lineno}: concept line without a name")
            extra_concepts.append(concept)
            for part in rest.split():
                u, eq, value = part.partition("=")
                if not eq:
                    raise ModelFormatError(
                        f"line {lineno}: expected individual=value, got {part!r}")
                _require_individual(u, individuals, lineno)
                try:
                    likelihoods.setdefault(u, {})[concept] = parse_rational(value)
                except ParseError as exc:
                    raise ModelFormatError(f"line {lineno}: {exc}") from exc
        elif head.startswith("role "):
            role = head[len("role "):].strip()
            if not role:
                raise ModelFormatError(f"line {lineno}: role line without a name")
            extra_roles.append(role)
            rows = role_rows.setdefault(role, {})
            for part in rest.split():
                pair, eq, value = part.partition("=")
                if not eq or "->" not in pair:
                    raise ModelFormatError(
                        f"line {lineno}: expected src->dst=value, got {part!r}")
                u, v = pair.split("->", 1)
                _require_individual(u, individuals, lineno)
                _require_individual(v, individuals, lineno)
                try:
                    rows.setdefault(u, {})[v] = parse_rational(value)
                except ParseError as exc:
                    raise ModelFormatError(f"line {lineno}: {exc}") from exc
        elif head == "names":
            for part in rest.split():
                name, eq, members = part.partition("=")
                if not eq or not members.startswith("{") or not members.endswith("}"):
                    raise ModelFormatError(
                        f"line {lineno}: expected Name={{a,b}}, got {part!r}")
                member_list = [s for s in members[1:-1].split(",") if s]
                for u in member_list:
                    _require_individual(u, individuals, lineno)
                names[name] = frozenset(member_list)
        else:
            raise ModelFormatError(f"line {lineno}: unknown directive {head!r}")

    if not seen_individuals:
        raise ModelFormatError("model file declares no individuals")
    return BeliefModel(individuals, extra_concepts, extra_roles,
                       likelihoods, role_rows, names)


def _require_individual(u: str, individuals: list[str], lineno: int) -> None:
    if u not in individuals:
        raise ModelFormatError(f"line {lineno}: undeclared individual {u!r}")


def load_model(path) -> BeliefModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


# ---------------------------------------------------------------------------
# Classical interpretations as degenerate belief models
# ---------------------------------------------------------------------------

def from_alc_interpretation(itp: "ALCInterpretation", point: str) -> PointedModel:
    """Encode a classical interpretation as a {0, 1} belief model.

    Concept likelihoods are projected to 0 or 1 and every role row is the
    uniform distribution over the individual's successor set, so
    quantification is simulated by sampling.  An individual with no
    successors for a used role has no such distribution; that is an
    error here rather than a silent default.
    """
    likelihoods: dict[str, dict[str, Fraction]] = {}
    for u in itp.individuals:
        likelihoods[u] = {c: (ONE if u in itp.concept_ext.get(c, frozenset()) else ZERO)
                          for c in itp.concept_names()}
    role_rows: dict[str, dict[str, dict[str, Fraction]]] = {}
    for role in itp.role_names():
        rows: dict[str, dict[str, Fraction]] = {}
        pairs = itp.role_ext.get(role, frozenset())
        for u in itp.individuals:
            successors = sorted(v for (x, v) in pairs if x == u)
            if not successors:
                raise ModelFormatError(
                    f"individual {u!r} has no {role!r}-successor; the uniform "
                    f"encoding needs at least one")
            share = Fraction(1, len(successors))
            rows[u] = {v: share for v in successors}
        role_rows[role] = rows
    model = BeliefModel(itp.individuals, itp.concept_names(), itp.role_names(),
                        likelihoods, role_rows)
    if not model.has_individual(point):
        raise ModelFormatError(f"point {point!r} is not an individual")
    return PointedModel(model, point)
