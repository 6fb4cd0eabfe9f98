"""Probabilistic causal interpretation of the coaxial matrices.

Activities, impacts and receptors become Boolean atoms; matrix coefficients
become the annotations of probabilistic clauses.  Impacts combine their
active causes as a noisy-OR; receptor-level positive and negative evidence
atoms are merged by four combination clauses whose parameters default to
0.1 / 0.5 / 0.5 / 0.9 for the neg-only / neither / both / pos-only cases.

Two inference paths are provided.  The closed form exploits the two-layer
noisy-OR structure (positive and negative evidence atoms are driven by
disjoint clause groundings, hence independent given the activities) and
answers queries in microseconds.  The enumeration oracle sums instance
probabilities over every selection of the ground program and exists to
cross-check the closed form; it is exponential by design.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .budget import Deadline
from .matrices import CoaxialMatrices, Polarity

MAX_PROB_ACTIVITIES = 20
MAX_CHOICE_CLAUSES = 25
_CHUNK_BITS = 20

POS_SUFFIX = "_pos"
NEG_SUFFIX = "_neg"


class OracleLimitError(RuntimeError):
    """Ground choice space too large for exhaustive enumeration."""


class StratificationError(RuntimeError):
    """Ground program has cyclic dependencies; enumeration refuses to guess."""


@dataclass(frozen=True)
class CombinationParams:
    """Receptor probability for each evidence case."""

    neg_only: float = 0.1
    neither: float = 0.5
    both: float = 0.5
    pos_only: float = 0.9

    def __post_init__(self):
        for name in ("neg_only", "neither", "both", "pos_only"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"combination parameter {name}={v} outside [0, 1]")

    def combine(self, q_pos, q_neg):
        """Expected receptor probability given evidence probabilities."""
        return (
            self.neg_only * (1.0 - q_pos) * q_neg
            + self.neither * (1.0 - q_pos) * (1.0 - q_neg)
            + self.both * q_pos * q_neg
            + self.pos_only * q_pos * (1.0 - q_neg)
        )


DEFAULT_COMBINATION = CombinationParams()


@dataclass(frozen=True)
class CausalProgram:
    """Grounded probabilistic program over one matrix set.

    ``interventions`` are activities forced true (do-semantics; activities
    are root causes, so forcing coincides with adding facts).
    ``activity_probs`` marks activities performed with a given probability.
    """

    matrices: CoaxialMatrices
    interventions: frozenset[str] = frozenset()
    activity_probs: Mapping[str, float] = field(default_factory=dict)
    combination_params: CombinationParams = DEFAULT_COMBINATION

    def __post_init__(self):
        overlap = self.interventions & set(self.activity_probs)
        if overlap:
            raise ValueError(
                f"activities cannot be both intervened and probabilistic: "
                f"{sorted(overlap)}"
            )
        for aid in self.interventions:
            self.matrices.activity_index(aid)
        for aid, p in self.activity_probs.items():
            self.matrices.activity_index(aid)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"activity probability {aid}={p} outside [0, 1]")


def build_program(
    m: CoaxialMatrices,
    activity_probs: Mapping[str, float] | None = None,
    combination_params: CombinationParams = DEFAULT_COMBINATION,
) -> CausalProgram:
    """Encode a matrix set as a causal program with no interventions yet."""
    return CausalProgram(
        matrices=m,
        activity_probs=dict(activity_probs or {}),
        combination_params=combination_params,
    )


def intervene(p: CausalProgram, done: Iterable[str]) -> CausalProgram:
    """Force a set of activities true (idempotent, composes by union).

    An intervened activity stops being probabilistic: do() overrides its
    probability annotation.
    """
    done = frozenset(done)
    for aid in done:
        p.matrices.activity_index(aid)
    probs = {k: v for k, v in p.activity_probs.items() if k not in done}
    return replace(p, interventions=p.interventions | done, activity_probs=probs)


# ---------------------------------------------------------------------------
# Closed-form inference
# ---------------------------------------------------------------------------


def _activity_configurations(p: CausalProgram, deadline: Deadline):
    """Yield (weight, active row indices) over probabilistic activity choices.

    Deterministic interventions are active in every configuration; the
    probabilistic activities are conditioned on exhaustively, exponential
    in their count only.
    """
    m = p.matrices
    base = sorted(m.activity_index(a) for a in p.interventions)
    prob_items = sorted(
        ((m.activity_index(a), pr) for a, pr in p.activity_probs.items())
    )
    if len(prob_items) > MAX_PROB_ACTIVITIES:
        raise OracleLimitError(
            f"{len(prob_items)} probabilistic activities exceed the "
            f"cap of {MAX_PROB_ACTIVITIES}"
        )
    for chosen in itertools.product((False, True), repeat=len(prob_items)):
        deadline.check("causal query")
        weight = 1.0
        active = list(base)
        for (idx, pr), on in zip(prob_items, chosen):
            weight *= pr if on else 1.0 - pr
            if on:
                active.append(idx)
        if weight > 0.0:
            yield weight, active


def _impact_vector(m: CoaxialMatrices, active: list[int]) -> np.ndarray:
    """P(impact_j) for a fixed active-activity set: noisy-OR per impact."""
    if not active:
        return np.zeros(m.npre)
    return 1.0 - np.prod(1.0 - m.mop_array[active, :], axis=0)


def impact_probability(
    p: CausalProgram, impact_id: str, time_budget: float | None = None
) -> float:
    """Probability that an impact occurs under the program's activity set."""
    j = p.matrices.impact_index(impact_id)
    deadline = Deadline.after(time_budget)
    total = 0.0
    for weight, active in _activity_configurations(p, deadline):
        total += weight * float(_impact_vector(p.matrices, active)[j])
    return total


def _evidence_for_config(
    p: CausalProgram, k: int, active: list[int]
) -> tuple[float, float]:
    m = p.matrices
    p_imp = _impact_vector(m, active)
    hit = m.mpr_array[:, k] * p_imp
    pos = m.polarity_signs > 0
    q_pos = 1.0 - float(np.prod(1.0 - hit[pos]))
    q_neg = 1.0 - float(np.prod(1.0 - hit[~pos]))
    return q_pos, q_neg


def receptor_evidence(p: CausalProgram, receptor_id: str) -> tuple[float, float]:
    """(q_pos, q_neg) for a deterministic program: the probabilities that
    positive / negative evidence reaches the receptor."""
    if p.activity_probs:
        raise ValueError("evidence decomposition requires deterministic activities")
    k = p.matrices.receptor_index(receptor_id)
    active = sorted(p.matrices.activity_index(a) for a in p.interventions)
    return _evidence_for_config(p, k, active)


def receptor_probability(
    p: CausalProgram, receptor_id: str, time_budget: float | None = None
) -> float:
    """Probability that a receptor is achieved.

    For each activity configuration the positive/negative evidence atoms
    are independent noisy-ORs over disjoint impact sets, so the receptor
    value is the combination rule applied to (q_pos, q_neg); probabilistic
    activities are averaged out exactly.
    """
    k = p.matrices.receptor_index(receptor_id)
    deadline = Deadline.after(time_budget)
    total = 0.0
    for weight, active in _activity_configurations(p, deadline):
        q_pos, q_neg = _evidence_for_config(p, k, active)
        total += weight * float(p.combination_params.combine(q_pos, q_neg))
    return total


def receptor_probabilities(
    p: CausalProgram, time_budget: float | None = None
) -> dict[str, float]:
    """All receptor probabilities at once (vectorized across receptors)."""
    m = p.matrices
    deadline = Deadline.after(time_budget)
    pos = m.polarity_signs > 0
    totals = np.zeros(m.nric)
    for weight, active in _activity_configurations(p, deadline):
        hit = m.mpr_array * _impact_vector(m, active)[:, None]
        q_pos = 1.0 - np.prod(1.0 - hit[pos, :], axis=0)
        q_neg = 1.0 - np.prod(1.0 - hit[~pos, :], axis=0)
        totals += weight * p.combination_params.combine(q_pos, q_neg)
    return {rec.id: float(totals[k]) for k, rec in enumerate(m.receptors)}


# ---------------------------------------------------------------------------
# Ground program representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundClause:
    """``head:prob :- body.`` with the body as ordered signed literals."""

    head: str
    prob: float
    body: tuple[tuple[str, bool], ...] = ()  # (atom, is_positive_literal)


@dataclass(frozen=True)
class GroundProgram:
    clauses: tuple[GroundClause, ...]

    @cached_property
    def atoms(self) -> frozenset[str]:
        out = {c.head for c in self.clauses}
        for c in self.clauses:
            out.update(a for a, _ in c.body)
        return frozenset(out)

    def equivalent(self, other: "GroundProgram") -> bool:
        """Same clause multiset, ignoring clause order."""
        key = lambda c: (c.head, c.prob, c.body)
        return sorted(self.clauses, key=key) == sorted(other.clauses, key=key)


def ground(p: CausalProgram) -> GroundProgram:
    """Expand a program into its ground clause list.

    One clause per nonzero activity->impact cell, one per nonzero
    impact->evidence cell (routed to the receptor's positive or negative
    evidence atom by impact polarity), four combination clauses per
    receptor, and one fact per intervened or probabilistic activity.
    """
    m = p.matrices
    params = p.combination_params
    clauses: list[GroundClause] = []

    for a in m.activities:
        if a.id in p.interventions:
            clauses.append(GroundClause(a.id, 1.0))
        elif a.id in p.activity_probs:
            clauses.append(GroundClause(a.id, float(p.activity_probs[a.id])))

    mop = m.mop_array
    mpr = m.mpr_array
    for i, act in enumerate(m.activities):
        for j, imp in enumerate(m.impacts):
            if mop[i, j] > 0.0:
                clauses.append(
                    GroundClause(imp.id, float(mop[i, j]), ((act.id, True),))
                )
    for j, imp in enumerate(m.impacts):
        suffix = POS_SUFFIX if imp.polarity is Polarity.POSITIVE else NEG_SUFFIX
        for k, rec in enumerate(m.receptors):
            if mpr[j, k] > 0.0:
                clauses.append(
                    GroundClause(rec.id + suffix, float(mpr[j, k]), ((imp.id, True),))
                )
    for rec in m.receptors:
        pos, neg = rec.id + POS_SUFFIX, rec.id + NEG_SUFFIX
        clauses.append(GroundClause(rec.id, params.neg_only, ((pos, False), (neg, True))))
        clauses.append(GroundClause(rec.id, params.neither, ((pos, False), (neg, False))))
        clauses.append(GroundClause(rec.id, params.both, ((pos, True), (neg, True))))
        clauses.append(GroundClause(rec.id, params.pos_only, ((pos, True), (neg, False))))

    return GroundProgram(tuple(clauses))


# ---------------------------------------------------------------------------
# Enumeration oracle
# ---------------------------------------------------------------------------


def _derivable_atoms(clauses: list[GroundClause]) -> set[str]:
    """Atoms with at least one potentially-firing derivation (fixpoint on
    positive literals; negative literals are always satisfiable a priori)."""
    derivable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for c in clauses:
            if c.head in derivable:
                continue
            if all(a in derivable for a, positive in c.body if positive):
                derivable.add(c.head)
                changed = True
    return derivable


def _topological_atoms(clauses: list[GroundClause]) -> list[str]:
    """Dependency order of atoms; raises on cycles (stratification guard)."""
    deps: dict[str, set[str]] = {}
    for c in clauses:
        deps.setdefault(c.head, set()).update(a for a, _ in c.body)
        for a, _ in c.body:
            deps.setdefault(a, set())
    order: list[str] = []
    state: dict[str, int] = {}

    def visit(atom: str, stack: list[str]) -> None:
        if state.get(atom) == 2:
            return
        if state.get(atom) == 1:
            raise StratificationError(
                f"cyclic dependency through {' -> '.join(stack + [atom])}"
            )
        state[atom] = 1
        for dep in sorted(deps[atom]):
            visit(dep, stack + [atom])
        state[atom] = 2
        order.append(atom)

    for atom in sorted(deps):
        visit(atom, [])
    return order


def relevant_ground_clauses(gp: GroundProgram, query: str) -> list[GroundClause]:
    """Restrict to clauses that can influence the query.

    Clauses whose body can never fire, and clauses for atoms the query does
    not depend on (through either literal sign), are dropped; the choices of
    dropped clauses sum out to exactly 1, so the restriction is exact.
    """
    alive = [c for c in gp.clauses if c.prob > 0.0]
    derivable = _derivable_atoms(alive)
    alive = [
        c for c in alive
        if all(a in derivable for a, positive in c.body if positive)
    ]
    by_head: dict[str, list[GroundClause]] = {}
    for c in alive:
        by_head.setdefault(c.head, []).append(c)
    needed: set[str] = set()
    frontier = [query]
    while frontier:
        atom = frontier.pop()
        if atom in needed:
            continue
        needed.add(atom)
        for c in by_head.get(atom, ()):
            frontier.extend(a for a, _ in c.body)
    return [c for c in alive if c.head in needed]


def enumerate_oracle(
    program: CausalProgram | GroundProgram,
    query: str,
    time_budget: float | None = None,
    max_choice_clauses: int = MAX_CHOICE_CLAUSES,
) -> float:
    """Query probability by exhaustive enumeration of ground selections.

    Every selection fixes one choice per ground clause (head chosen with the
    clause's annotation, or the implicit null head otherwise); the induced
    instance is evaluated bottom-up in dependency order and the selection
    probabilities of instances entailing the query are summed.  Selections
    are processed in vectorized blocks, which changes the arithmetic
    grouping but not the enumeration semantics.
    """
    gp = ground(program) if isinstance(program, CausalProgram) else program
    deadline = Deadline.after(time_budget)

    clauses = relevant_ground_clauses(gp, query)
    if not any(c.head == query for c in clauses):
        return 0.0
    order = _topological_atoms(clauses)

    choice_ids = [i for i, c in enumerate(clauses) if c.prob < 1.0]
    bit_of = {ci: b for b, ci in enumerate(choice_ids)}
    k = len(choice_ids)
    if k > max_choice_clauses:
        raise OracleLimitError(
            f"{k} choice clauses exceed the enumeration cap of {max_choice_clauses}"
        )

    by_head: dict[str, list[int]] = {}
    for i, c in enumerate(clauses):
        by_head.setdefault(c.head, []).append(i)

    total = 0.0
    n_selections = 1 << k
    chunk = 1 << min(k, _CHUNK_BITS)
    for start in range(0, n_selections, chunk):
        deadline.check("enumeration oracle")
        idx = np.arange(start, min(start + chunk, n_selections), dtype=np.int64)
        chosen: dict[int, np.ndarray] = {
            ci: ((idx >> b) & 1).astype(bool) for ci, b in bit_of.items()
        }
        weights = np.ones(len(idx))
        for ci, b in bit_of.items():
            pr = clauses[ci].prob
            weights *= np.where(chosen[ci], pr, 1.0 - pr)

        truth: dict[str, np.ndarray] = {}
        false = np.zeros(len(idx), dtype=bool)
        for atom in order:
            acc = false
            for ci in by_head.get(atom, ()):
                body_ok = np.ones(len(idx), dtype=bool)
                for lit, positive in clauses[ci].body:
                    v = truth.get(lit, false)
                    body_ok = body_ok & (v if positive else ~v)
                if ci in chosen:
                    body_ok = body_ok & chosen[ci]
                acc = acc | body_ok
            truth[atom] = acc
        total += float(weights[truth.get(query, false)].sum())
    return total


# ---------------------------------------------------------------------------
# Textual program format
# ---------------------------------------------------------------------------

_BARE_ATOM = re.compile(r"^[a-z][A-Za-z0-9_]*$")


def _format_atom(atom: str) -> str:
    if _BARE_ATOM.match(atom):
        return atom
    return "'" + atom.replace("'", "\\'") + "'"


def _format_clause(c: GroundClause) -> str:
    head = _format_atom(c.head)
    if c.prob != 1.0:
        head = f"{head}:{c.prob:g}"
    if not c.body:
        return head + "."
    lits = [
        (_format_atom(a) if positive else "\\+ " + _format_atom(a))
        for a, positive in c.body
    ]
    return f"{head} :- " + ", ".join(lits) + "."


def export_text(program: CausalProgram | GroundProgram) -> str:
    """Render the program in annotated-disjunction clause syntax,
    one ``head:prob :- body.`` clause per line, negation written ``\\+``."""
    gp = ground(program) if isinstance(program, CausalProgram) else program
    return "\n".join(_format_clause(c) for c in gp.clauses) + "\n"


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<quoted>'(?:[^'\\]|\\.)*')
      | (?P<op>:-|\\\+|[:,.])
      | (?P<number>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
      | (?P<bare>[A-Za-z_][A-Za-z0-9_]*)
    )""",
    re.VERBOSE,
)


def _tokenize(line: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(line):
        match = _TOKEN.match(line, pos)
        if not match:
            raise ValueError(f"unparseable program text at: {line[pos:]!r}")
        pos = match.end()
        for kind in ("quoted", "op", "number", "bare"):
            text = match.group(kind)
            if text is not None:
                if kind == "quoted":
                    text = text[1:-1].replace("\\'", "'")
                    kind = "atom"
                elif kind == "bare":
                    kind = "atom"
                tokens.append((kind, text))
                break
    return tokens


def parse_program_text(text: str) -> GroundProgram:
    """Read the clause syntax emitted by :func:`export_text` back into a
    ground program (used for round-trip checks and external program input)."""
    clauses: list[GroundClause] = []
    for raw in text.splitlines():
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        tokens = _tokenize(line)
        if not tokens or tokens[-1] != ("op", "."):
            raise ValueError(f"clause must end with '.': {raw!r}")
        tokens = tokens[:-1]

        def expect(kind: str, where: str) -> str:
            if not tokens or tokens[0][0] != kind:
                raise ValueError(f"expected {where} in clause: {raw!r}")
            return tokens.pop(0)[1]

        head = expect("atom", "head atom")
        prob = 1.0
        if tokens and tokens[0] == ("op", ":"):
            tokens.pop(0)
            prob = float(expect("number", "probability"))
        body: list[tuple[str, bool]] = []
        if tokens:
            if tokens.pop(0) != ("op", ":-"):
                raise ValueError(f"expected ':-' in clause: {raw!r}")
            while True:
                positive = True
                if tokens and tokens[0] == ("op", "\\+"):
                    tokens.pop(0)
                    positive = False
                body.append((expect("atom", "body literal"), positive))
                if not tokens:
                    break
                if tokens.pop(0) != ("op", ","):
                    raise ValueError(f"expected ',' in clause body: {raw!r}")
        clauses.append(GroundClause(head, prob, tuple(body)))
    return GroundProgram(tuple(clauses))
