"""Self-contained linear programming: two-phase simplex with dual values and
reduced costs, plus depth-first branch-and-bound for integer variables.

The simplex works on a dense tableau in minimization standard form.  General
bounds are handled by variable transforms (shift / mirror / split) plus
internal upper-bound rows, which keeps the pivot machinery textbook-simple
while the tiny problem sizes keep dense algebra cheap.  Dantzig pricing is
used first; Bland's rule takes over past a pivot threshold so termination is
guaranteed, with a hard pivot cap as a backstop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Mapping

import numpy as np

from .budget import Deadline

FEAS_TOL = 1e-7   # primal feasibility
OPT_TOL = 1e-9    # reduced-cost optimality
PIV_TOL = 1e-8    # pivot-element eligibility
INT_TOL = 1e-6    # integrality detection
DEGEN_TOL = 1e-7  # degeneracy flagging

PIVOT_HARD_CAP = 50_000

Relation = Literal["<=", "=", ">="]
Sense = Literal["max", "min"]

INF = math.inf


class MalformedProblemError(ValueError):
    """Problem references undeclared variables or carries invalid data."""


class PivotLimitError(RuntimeError):
    """Simplex exceeded the hard pivot cap (should never happen with Bland)."""


@dataclass(frozen=True)
class Variable:
    id: str
    lower: float = 0.0
    upper: float = INF
    integer: bool = False


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: Mapping[str, float]
    relation: Relation
    rhs: float
    name: str = ""


@dataclass(frozen=True)
class LpProblem:
    variables: tuple[Variable, ...]
    constraints: tuple[LinearConstraint, ...]
    objective: Mapping[str, float]
    sense: Sense = "max"

    def validate(self) -> None:
        ids = [v.id for v in self.variables]
        declared = set(ids)
        if len(declared) != len(ids):
            raise MalformedProblemError("duplicate variable ids")
        if self.sense not in ("max", "min"):
            raise MalformedProblemError(f"invalid sense {self.sense!r}")
        for v in self.variables:
            if v.lower > v.upper:
                raise MalformedProblemError(
                    f"variable {v.id!r}: lower {v.lower} > upper {v.upper}"
                )
        for ci, c in enumerate(self.constraints):
            if c.relation not in ("<=", "=", ">="):
                raise MalformedProblemError(
                    f"constraint {ci}: invalid relation {c.relation!r}"
                )
            if not math.isfinite(c.rhs):
                raise MalformedProblemError(f"constraint {ci}: non-finite rhs")
            for vid, coef in c.coeffs.items():
                if vid not in declared:
                    raise MalformedProblemError(
                        f"constraint {ci} references undeclared variable {vid!r}"
                    )
                if not math.isfinite(coef):
                    raise MalformedProblemError(
                        f"constraint {ci}: non-finite coefficient on {vid!r}"
                    )
        for vid in self.objective:
            if vid not in declared:
                raise MalformedProblemError(
                    f"objective references undeclared variable {vid!r}"
                )


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    primal: dict[str, float] = field(default_factory=dict)
    objective_value: float | None = None
    duals: dict[int, float] = field(default_factory=dict)
    reduced_costs: dict[str, float] = field(default_factory=dict)
    dual_source: str = "lp"  # "lp" | "mip_node": MIP duals come from the
    #                          incumbent's LP relaxation, not a true MIP dual
    degenerate: bool = False
    iterations: int = 0


# ---------------------------------------------------------------------------
# Simplex core
# ---------------------------------------------------------------------------


class _Tableau:
    """Dense two-phase simplex state in min-form standard shape."""

    def __init__(self, c_min: np.ndarray, a_user: np.ndarray,
                 relations: list[str], rhs_user: np.ndarray,
                 bounds: list[tuple[float, float]]):
        self.n_orig = len(bounds)
        m_user = len(relations)

        # Variable transforms onto nonnegative tableau columns.
        cols: list[tuple[int, float]] = []       # (orig var, sign)
        self.offsets = np.zeros(self.n_orig)
        self.var_cols: list[list[int]] = [[] for _ in range(self.n_orig)]
        self.split_pairs: list[tuple[int, int]] = []
        ub_rows: list[tuple[int, float]] = []    # (col, upper value)
        for j, (lo, hi) in enumerate(bounds):
            if lo == hi:
                self.offsets[j] = lo
            elif lo > -INF:
                self.offsets[j] = lo
                self.var_cols[j].append(len(cols))
                cols.append((j, 1.0))
                if hi < INF:
                    ub_rows.append((len(cols) - 1, hi - lo))
            elif hi < INF:
                self.offsets[j] = hi
                self.var_cols[j].append(len(cols))
                cols.append((j, -1.0))
            else:
                plus, minus = len(cols), len(cols) + 1
                self.var_cols[j] = [plus, minus]
                self.split_pairs.append((plus, minus))
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        self.cols = cols
        n_struct = len(cols)
        m = m_user + len(ub_rows)

        a_int = np.zeros((m, n_struct))
        rhs = np.zeros(m)
        rels = list(relations) + ["<="] * len(ub_rows)
        for ci, (j, sign) in enumerate(cols):
            a_int[:m_user, ci] = sign * a_user[:, j]
        rhs[:m_user] = rhs_user - a_user @ self.offsets
        for k, (ci, ub) in enumerate(ub_rows):
            a_int[m_user + k, ci] = 1.0
            rhs[m_user + k] = ub

        # Normalize to b >= 0 so the slack/artificial start basis is valid.
        self.row_sign = np.ones(m)
        for i in range(m):
            if rhs[i] < 0:
                a_int[i] *= -1.0
                rhs[i] *= -1.0
                self.row_sign[i] = -1.0
                rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[rels[i]]

        # Slack / surplus / artificial columns.
        extra: list[np.ndarray] = []
        self.identity_col = np.zeros(m, dtype=int)
        self.basis = np.zeros(m, dtype=int)
        self.artificials: set[int] = set()
        nxt = n_struct
        for i in range(m):
            if rels[i] == "<=":
                col = np.zeros(m)
                col[i] = 1.0
                extra.append(col)
                self.identity_col[i] = nxt
                self.basis[i] = nxt
                nxt += 1
            elif rels[i] == ">=":
                col = np.zeros(m)
                col[i] = -1.0
                extra.append(col)
                nxt += 1
                art = np.zeros(m)
                art[i] = 1.0
                extra.append(art)
                self.identity_col[i] = nxt
                self.basis[i] = nxt
                self.artificials.add(nxt)
                nxt += 1
            else:
                art = np.zeros(m)
                art[i] = 1.0
                extra.append(art)
                self.identity_col[i] = nxt
                self.basis[i] = nxt
                self.artificials.add(nxt)
                nxt += 1

        self.m = m
        self.m_user = m_user
        self.n_total = nxt
        body = np.hstack([a_int] + ([np.column_stack(extra)] if extra else []))
        self.t = np.zeros((m + 1, self.n_total + 1))
        self.t[:m, : self.n_total] = body
        self.t[:m, -1] = rhs

        self.c_full = np.zeros(self.n_total)
        for ci, (j, sign) in enumerate(cols):
            self.c_full[ci] = sign * c_min[j]

        self.iterations = 0

    # -- pivoting ----------------------------------------------------------

    def _pivot(self, row: int, col: int) -> None:
        t = self.t
        t[row] /= t[row, col]
        factors = t[:, col].copy()
        factors[row] = 0.0
        t -= np.outer(factors, t[row])
        t[:, col] = 0.0
        t[row, col] = 1.0
        self.basis[row] = col
        self.iterations += 1

    def _run(self, bland_after: int, deadline: Deadline) -> str:
        """Pivot to optimality of the current objective row.

        Returns "optimal" or "unbounded".  Artificial columns never enter.
        """
        t = self.t
        m = self.m
        basic = set(self.basis.tolist())
        while True:
            if self.iterations > PIVOT_HARD_CAP:
                raise PivotLimitError(
                    f"pivot cap {PIVOT_HARD_CAP} exceeded; cycling suspected"
                )
            if self.iterations % 64 == 0:
                deadline.check("simplex")
            z = t[-1, : self.n_total]
            enter = -1
            if self.iterations < bland_after:
                best = OPT_TOL
                for j in range(self.n_total):
                    if j in self.artificials or j in basic:
                        continue
                    if z[j] > best:
                        best = z[j]
                        enter = j
            else:
                for j in range(self.n_total):  # Bland: lowest eligible index
                    if j in self.artificials or j in basic:
                        continue
                    if z[j] > OPT_TOL:
                        enter = j
                        break
            if enter < 0:
                return "optimal"

            col = t[:m, enter]
            rhs = t[:m, -1]
            leave = -1
            best_ratio = INF
            for i in range(m):
                if col[i] > PIV_TOL:
                    ratio = max(rhs[i], 0.0) / col[i]
                    if ratio < best_ratio - 1e-12 or (
                        ratio < best_ratio + 1e-12
                        and (leave < 0 or self.basis[i] < self.basis[leave])
                    ):
                        best_ratio = ratio
                        leave = i
            if leave < 0:
                return "unbounded"
            basic.discard(int(self.basis[leave]))
            basic.add(enter)
            self._pivot(leave, enter)

    def solve(self, deadline: Deadline) -> str:
        m, t = self.m, self.t
        bland_after = 200 + 20 * (self.m + self.n_total)

        if self.artificials:
            # Phase 1: minimize the sum of artificial variables.
            c1 = np.zeros(self.n_total)
            for j in self.artificials:
                c1[j] = 1.0
            cb = c1[self.basis]
            t[-1, : self.n_total] = cb @ t[:m, : self.n_total] - c1
            t[-1, -1] = cb @ t[:m, -1]
            status = self._run(bland_after, deadline)
            if status != "optimal" or t[-1, -1] > FEAS_TOL:
                return "infeasible"
            # Pivot lingering zero-level artificials out where possible;
            # rows that stay artificial-basic are redundant (all-zero).
            for i in range(m):
                if int(self.basis[i]) in self.artificials:
                    for j in range(self.n_total):
                        if j in self.artificials:
                            continue
                        if abs(t[i, j]) > PIV_TOL:
                            self._pivot(i, j)
                            break

        # Phase 2 with the true objective.
        cb = self.c_full[self.basis]
        t[-1, : self.n_total] = cb @ t[:m, : self.n_total] - self.c_full
        t[-1, -1] = cb @ t[:m, -1]
        return self._run(bland_after, deadline)

    # -- extraction --------------------------------------------------------

    def primal(self) -> np.ndarray:
        x_t = np.zeros(self.n_total)
        for i in range(self.m):
            x_t[self.basis[i]] = max(self.t[i, -1], 0.0)
        x = self.offsets.copy()
        for ci, (j, sign) in enumerate(self.cols):
            x[j] += sign * x_t[ci]
        return x

    def duals_internal(self) -> np.ndarray:
        """One dual per internal row, as d(min objective)/d(internal rhs)."""
        y = self.t[-1, self.identity_col]
        return y * self.row_sign

    def degenerate(self) -> bool:
        if any(self.t[i, -1] < DEGEN_TOL for i in range(self.m)):
            return True  # primal-degenerate basis: dual values may not be unique
        basic = set(self.basis.tolist())
        split_partnered = {
            a for pair in self.split_pairs for a in pair
            if pair[0] in basic or pair[1] in basic
        }
        z = self.t[-1, : self.n_total]
        for j in range(self.n_total):
            if j in basic or j in self.artificials or j in split_partnered:
                continue
            if abs(z[j]) < DEGEN_TOL:
                return True  # zero reduced cost off-basis: alternate optima
        return False


def _dense_user_form(p: LpProblem) -> tuple[np.ndarray, np.ndarray, list[str],
                                            np.ndarray, list[tuple[float, float]]]:
    index = {v.id: j for j, v in enumerate(p.variables)}
    n = len(p.variables)
    m = len(p.constraints)
    c_min = np.zeros(n)
    for vid, coef in p.objective.items():
        c_min[index[vid]] = coef if p.sense == "min" else -coef
    a = np.zeros((m, n))
    rhs = np.zeros(m)
    relations = []
    for i, con in enumerate(p.constraints):
        for vid, coef in con.coeffs.items():
            a[i, index[vid]] = coef
        rhs[i] = con.rhs
        relations.append(con.relation)
    bounds = [(v.lower, v.upper) for v in p.variables]
    return c_min, a, relations, rhs, bounds


def solve_lp(p: LpProblem, time_budget: float | None = None) -> LpSolution:
    """Solve the continuous relaxation (integrality flags are ignored).

    Duals are reported as the derivative of the stated objective with
    respect to each constraint's right-hand side; reduced costs likewise
    follow the problem's own optimization sense.
    """
    p.validate()
    return _solve_relaxation(p, Deadline.after(time_budget))


def _solve_relaxation(p: LpProblem, deadline: Deadline) -> LpSolution:
    for v in p.variables:
        if v.lower > v.upper:
            return LpSolution(status="infeasible")

    c_min, a_user, relations, rhs_user, bounds = _dense_user_form(p)
    tab = _Tableau(c_min, a_user, relations, rhs_user, bounds)
    status = tab.solve(deadline)
    if status != "optimal":
        return LpSolution(status=status, iterations=tab.iterations)

    x = tab.primal()
    y_min = tab.duals_internal()[: tab.m_user]
    sign = 1.0 if p.sense == "min" else -1.0

    primal = {v.id: float(x[j]) for j, v in enumerate(p.variables)}
    objective = float(sum(p.objective.get(v.id, 0.0) * primal[v.id]
                          for v in p.variables))
    duals = {i: float(sign * y_min[i]) for i in range(len(p.constraints))}

    # Reduced cost over user rows only: c_j - y'a_j in min form, then
    # flipped back to the problem's sense.
    reduced = {}
    index = {v.id: j for j, v in enumerate(p.variables)}
    for v in p.variables:
        j = index[v.id]
        rc_min = c_min[j] - float(y_min @ a_user[:, j])
        reduced[v.id] = float(sign * rc_min)

    return LpSolution(
        status="optimal",
        primal=primal,
        objective_value=objective,
        duals=duals,
        reduced_costs=reduced,
        degenerate=tab.degenerate(),
        iterations=tab.iterations,
    )


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------


def solve_mip(p: LpProblem, time_budget: float | None = None) -> LpSolution:
    """Depth-first branch-and-bound on the integer-flagged variables.

    Branches on the most-fractional variable (ties broken by lowest
    variable index), prunes against the best incumbent, and reports the
    duals of the incumbent's LP node tagged ``dual_source="mip_node"``.
    """
    p.validate()
    deadline = Deadline.after(time_budget)
    int_ids = [v.id for v in p.variables if v.integer]

    root = _solve_relaxation(p, deadline)
    if root.status != "optimal" or not int_ids:
        return root

    var_order = {v.id: j for j, v in enumerate(p.variables)}
    maximizing = p.sense == "max"
    incumbent: LpSolution | None = None
    incumbent_obj = -INF if maximizing else INF

    def better(a: float, b: float) -> bool:
        return a > b + 1e-9 if maximizing else a < b - 1e-9

    def can_beat(bound: float) -> bool:
        if incumbent is None:
            return True
        return better(bound, incumbent_obj)

    stack: list[dict[str, tuple[float, float]]] = [{}]
    nodes = 0
    while stack:
        deadline.check("branch-and-bound")
        overrides = stack.pop()
        nodes += 1
        node_problem = _apply_bounds(p, overrides) if overrides else p
        sol = _solve_relaxation(node_problem, deadline)
        if sol.status != "optimal" or not can_beat(sol.objective_value):
            continue

        frac_id = None
        frac_score = INF  # distance from 0.5; lower is more fractional
        for vid in int_ids:
            val = sol.primal[vid]
            frac = val - math.floor(val)
            if min(frac, 1.0 - frac) > INT_TOL:
                score = abs(frac - 0.5)
                if score < frac_score - 1e-12 or (
                    abs(score - frac_score) <= 1e-12
                    and (frac_id is None or var_order[vid] < var_order[frac_id])
                ):
                    frac_score = score
                    frac_id = vid
        if frac_id is None:
            rounded = dict(sol.primal)
            for vid in int_ids:
                rounded[vid] = float(round(rounded[vid]))
            obj = float(sum(p.objective.get(k, 0.0) * v for k, v in rounded.items()))
            if incumbent is None or better(obj, incumbent_obj):
                incumbent = replace(sol, primal=rounded, objective_value=obj,
                                    dual_source="mip_node")
                incumbent_obj = obj
            continue

        val = sol.primal[frac_id]
        lo, hi = overrides.get(frac_id, _var_bounds(p, frac_id))
        up = dict(overrides)
        up[frac_id] = (math.ceil(val), hi)
        down = dict(overrides)
        down[frac_id] = (lo, math.floor(val))
        stack.append(up)
        stack.append(down)

    if incumbent is None:
        return LpSolution(status="infeasible", iterations=nodes)
    incumbent.iterations = nodes
    return incumbent


def _var_bounds(p: LpProblem, vid: str) -> tuple[float, float]:
    for v in p.variables:
        if v.id == vid:
            return (v.lower, v.upper)
    raise MalformedProblemError(f"unknown variable {vid!r}")


def _apply_bounds(p: LpProblem, overrides: Mapping[str, tuple[float, float]]
                  ) -> LpProblem:
    new_vars = tuple(
        replace(v, lower=overrides[v.id][0], upper=overrides[v.id][1])
        if v.id in overrides else v
        for v in p.variables
    )
    return replace(p, variables=new_vars)


# ---------------------------------------------------------------------------
# Sensitivity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintSensitivity:
    index: int
    name: str
    dual: float
    slack: float
    binding: bool
    degenerate: bool  # binding with zero dual: derivative reading unreliable


@dataclass(frozen=True)
class VariableSensitivity:
    id: str
    value: float
    reduced_cost: float
    at_lower: bool
    at_upper: bool


@dataclass(frozen=True)
class SensitivityReport:
    constraints: tuple[ConstraintSensitivity, ...]
    variables: tuple[VariableSensitivity, ...]
    degenerate: bool
    dual_source: str = "lp"

    def describe(self) -> str:
        lines = []
        if self.dual_source == "mip_node":
            lines.append("duals taken from the incumbent's LP relaxation node")
        if self.degenerate:
            lines.append(
                "degenerate optimum: duals are one valid subgradient; "
                "read per-unit interpretations with care"
            )
        for c in self.constraints:
            label = c.name or f"constraint[{c.index}]"
            state = "binding" if c.binding else f"slack {c.slack:.6g}"
            lines.append(
                f"{label}: dual {c.dual:.6g} "
                f"(objective changes {c.dual:+.6g} per unit rhs increase; {state})"
            )
        for v in self.variables:
            where = "at lower bound" if v.at_lower else (
                "at upper bound" if v.at_upper else "basic")
            lines.append(
                f"{v.id}: reduced cost {v.reduced_cost:.6g} ({where})"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "degenerate": self.degenerate,
            "dual_source": self.dual_source,
            "constraints": [
                {
                    "index": c.index,
                    "name": c.name,
                    "dual": c.dual,
                    "slack": c.slack,
                    "binding": c.binding,
                    "degenerate": c.degenerate,
                }
                for c in self.constraints
            ],
            "variables": [
                {
                    "id": v.id,
                    "value": v.value,
                    "reduced_cost": v.reduced_cost,
                    "at_lower": v.at_lower,
                    "at_upper": v.at_upper,
                }
                for v in self.variables
            ],
        }


def sensitivity_report(p: LpProblem, sol: LpSolution) -> SensitivityReport:
    """Per-constraint duals with binding flags and per-variable reduced costs."""
    if sol.status != "optimal":
        raise ValueError(f"sensitivity requires an optimal solution, got {sol.status}")

    constraints = []
    for i, con in enumerate(p.constraints):
        activity = sum(coef * sol.primal[vid] for vid, coef in con.coeffs.items())
        if con.relation == "<=":
            slack = con.rhs - activity
        elif con.relation == ">=":
            slack = activity - con.rhs
        else:
            slack = abs(activity - con.rhs)
        binding = slack <= FEAS_TOL
        dual = sol.duals.get(i, 0.0)
        constraints.append(
            ConstraintSensitivity(
                index=i,
                name=con.name,
                dual=dual,
                slack=float(slack),
                binding=binding,
                degenerate=binding and abs(dual) <= 1e-9,
            )
        )

    variables = []
    for v in p.variables:
        val = sol.primal[v.id]
        variables.append(
            VariableSensitivity(
                id=v.id,
                value=val,
                reduced_cost=sol.reduced_costs.get(v.id, 0.0),
                at_lower=abs(val - v.lower) <= FEAS_TOL,
                at_upper=v.upper < INF and abs(v.upper - val) <= FEAS_TOL,
            )
        )

    degenerate = sol.degenerate or any(c.degenerate for c in constraints)
    return SensitivityReport(
        constraints=tuple(constraints),
        variables=tuple(variables),
        degenerate=degenerate,
        dual_source=sol.dual_source,
    )


# ---------------------------------------------------------------------------
# Debug dump
# ---------------------------------------------------------------------------


def export_lp_text(p: LpProblem) -> str:
    """Plain-text problem dump in an LP-style layout for debugging."""

    def term_line(coeffs: Mapping[str, float]) -> str:
        parts = []
        for vid, coef in coeffs.items():
            sign = "-" if coef < 0 else ("+" if parts else "")
            mag = abs(coef)
            parts.append(f"{sign} {mag:g} {vid}".strip())
        return " ".join(parts) if parts else "0"

    lines = [f"{p.sense}: {term_line(p.objective)};"]
    for i, con in enumerate(p.constraints):
        label = con.name or f"c{i}"
        lines.append(f"{label}: {term_line(con.coeffs)} {con.relation} {con.rhs:g};")
    for v in p.variables:
        lo = "-inf" if v.lower == -INF else f"{v.lower:g}"
        hi = "inf" if v.upper == INF else f"{v.upper:g}"
        lines.append(f"bound: {lo} <= {v.id} <= {hi};")
    integers = [v.id for v in p.variables if v.integer]
    if integers:
        lines.append("int: " + ", ".join(integers) + ";")
    return "\n".join(lines) + "\n"
