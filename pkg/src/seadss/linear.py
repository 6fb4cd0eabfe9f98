"""Linear interpretation of the coaxial matrices.

Impact levels are weighted sums of activity magnitudes; receptor levels are
weighted sums of impact levels, with positive-polarity impacts adding and
negative-polarity impacts subtracting under the default sign convention.
On top of the evaluator sit the planning optimizations: strongest activity
per receptor, capacity planning under limits/demand/budget, and bounded
deviation from a baseline plan.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .lp import (
    INF,
    LinearConstraint,
    LpProblem,
    LpSolution,
    Variable,
    solve_lp,
    solve_mip,
)
from .matrices import CoaxialMatrices, Scenario


class SignConvention(str, Enum):
    """How impact polarity enters receptor values.

    ``polarity_signed`` (default): positive impacts add, negative impacts
    subtract.  ``unsigned``: all contributions add, useful for sensitivity
    studies on total pressure.
    """

    POLARITY_SIGNED = "polarity_signed"
    UNSIGNED = "unsigned"


@dataclass(frozen=True)
class FootprintReport:
    """Impact and receptor levels produced by a scenario."""

    scenario_name: str
    impacts: dict[str, float]
    receptors: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "scenario_name": self.scenario_name,
            "impacts": dict(self.impacts),
            "receptors": dict(self.receptors),
        }

    def to_table(self) -> str:
        """Delimiter-separated receptor table, one receptor per row."""
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["receptor", "value"])
        for rid, value in self.receptors.items():
            w.writerow([rid, f"{value:.12g}"])
        return out.getvalue()


def _impact_signs(m: CoaxialMatrices, convention: SignConvention) -> np.ndarray:
    if convention is SignConvention.POLARITY_SIGNED:
        return m.polarity_signs
    return np.ones(m.npre)


def magnitude_vector(m: CoaxialMatrices, s: Scenario) -> np.ndarray:
    """Scenario magnitudes in matrix activity order; unknown ids are an error."""
    ope = np.zeros(m.nope)
    for aid, mag in s.magnitudes.items():
        ope[m.activity_index(aid)] = mag
    return ope


def assess(
    m: CoaxialMatrices,
    s: Scenario,
    convention: SignConvention = SignConvention.POLARITY_SIGNED,
) -> FootprintReport:
    """Evaluate the environmental footprint of a scenario.

    Impact j receives ``sum_i mop[i][j] * magnitude_i``; receptor k receives
    the polarity-signed sum ``sum_j sign_j * mpr[j][k] * impact_j``.
    """
    ope = magnitude_vector(m, s)
    pre = m.mop_array.T @ ope
    ric = m.mpr_array.T @ (_impact_signs(m, convention) * pre)
    return FootprintReport(
        scenario_name=s.name,
        impacts={imp.id: float(pre[j]) for j, imp in enumerate(m.impacts)},
        receptors={r.id: float(ric[k]) for k, r in enumerate(m.receptors)},
    )


def unit_footprint(
    m: CoaxialMatrices,
    activity_id: str,
    convention: SignConvention = SignConvention.POLARITY_SIGNED,
) -> FootprintReport:
    """Footprint of one standardized unit of a single activity."""
    i = m.activity_index(activity_id)
    pre = m.mop_array[i]
    ric = m.mpr_array.T @ (_impact_signs(m, convention) * pre)
    return FootprintReport(
        scenario_name=f"unit:{activity_id}",
        impacts={imp.id: float(pre[j]) for j, imp in enumerate(m.impacts)},
        receptors={r.id: float(ric[k]) for k, r in enumerate(m.receptors)},
    )


def unit_receptor_effects(
    m: CoaxialMatrices,
    convention: SignConvention = SignConvention.POLARITY_SIGNED,
) -> np.ndarray:
    """Composite activity->receptor coefficients, shape (Nope, Nric).

    Row i is the receptor vector of one unit of activity i; the weighted
    sum of rows reproduces ``assess`` by linearity.
    """
    signed_mpr = _impact_signs(m, convention)[:, None] * m.mpr_array
    return m.mop_array @ signed_mpr


# ---------------------------------------------------------------------------
# Optimization problem builders
# ---------------------------------------------------------------------------


def build_max_receptor_problem(
    m: CoaxialMatrices,
    receptor_id: str,
    sense: str = "max",
    convention: SignConvention = SignConvention.POLARITY_SIGNED,
) -> LpProblem:
    """Which single standardized activity moves a receptor the most?

    One unit is split across activities (sum of magnitudes = 1) with
    integrality on every magnitude, so exactly one activity is selected.
    """
    k = m.receptor_index(receptor_id)
    effects = unit_receptor_effects(m, convention)[:, k]
    variables = tuple(
        Variable(id=f"ope_{a.id}", lower=0.0, upper=INF, integer=True)
        for a in m.activities
    )
    constraints = (
        LinearConstraint(
            coeffs={f"ope_{a.id}": 1.0 for a in m.activities},
            relation="=",
            rhs=1.0,
            name="unit_total",
        ),
    )
    objective = {f"ope_{a.id}": float(effects[i]) for i, a in enumerate(m.activities)}
    return LpProblem(variables, constraints, objective, sense=sense)


@dataclass(frozen=True)
class MaxReceptorResult:
    activity_id: str
    value: float
    solution: LpSolution | None = None


def solve_max_receptor(
    m: CoaxialMatrices,
    receptor_id: str,
    sense: str = "max",
    convention: SignConvention = SignConvention.POLARITY_SIGNED,
    cross_check: bool = False,
) -> MaxReceptorResult:
    """Answer the strongest-activity query by direct unit-vector enumeration.

    The integral problem has exactly the unit vectors as feasible points, so
    scanning the composite coefficients is exact.  With ``cross_check`` the
    branch-and-bound path is also run and verified to agree.
    """
    k = m.receptor_index(receptor_id)
    effects = unit_receptor_effects(m, convention)[:, k]
    i = int(np.argmax(effects)) if sense == "max" else int(np.argmin(effects))
    result = MaxReceptorResult(m.activities[i].id, float(effects[i]))
    if cross_check:
        sol = solve_mip(build_max_receptor_problem(m, receptor_id, sense, convention))
        if sol.status != "optimal" or abs(sol.objective_value - result.value) > 1e-9:
            raise AssertionError(
                f"enumeration/MIP mismatch on {receptor_id}: "
                f"{result.value} vs {sol.objective_value} ({sol.status})"
            )
        result = replace(result, solution=sol)
    return result


@dataclass(frozen=True)
class CapacityObjective:
    """Objective spec for capacity planning.

    ``kind="receptor"`` optimizes one receptor (or a weighted sum when
    ``weights`` is given); ``kind="group_total"`` optimizes the combined
    magnitude of the scenario's demand group ``group_index``.
    """

    kind: str  # "receptor" | "group_total"
    sense: str = "max"
    receptor_id: str | None = None
    weights: dict[str, float] | None = None
    group_index: int = 0


def build_capacity_problem(
    m: CoaxialMatrices,
    s: Scenario,
    objective: CapacityObjective,
    convention: SignConvention = SignConvention.POLARITY_SIGNED,
) -> LpProblem:
    """Capacity planning over magnitudes under limits, demand, and budget.

    The footprint equations enter as equality constraints linking magnitude,
    impact and receptor variables; scenario receptor limits become upper
    bounds on receptor variables, demand groups become lower bounds on group
    totals, and costs/budget become a spending cap.
    """
    signs = _impact_signs(m, convention)
    variables = [
        Variable(id=f"ope_{a.id}", lower=0.0, upper=INF) for a in m.activities
    ]
    variables += [Variable(id=f"pre_{i.id}", lower=0.0, upper=INF) for i in m.impacts]
    variables += [Variable(id=f"ric_{r.id}", lower=-INF, upper=INF) for r in m.receptors]

    constraints: list[LinearConstraint] = []
    mop = m.mop_array
    mpr = m.mpr_array
    for j, imp in enumerate(m.impacts):
        coeffs = {
            f"ope_{a.id}": float(mop[i, j])
            for i, a in enumerate(m.activities)
            if mop[i, j] != 0.0
        }
        coeffs[f"pre_{imp.id}"] = -1.0
        constraints.append(
            LinearConstraint(coeffs, "=", 0.0, name=f"impact_balance_{imp.id}")
        )
    for k, rec in enumerate(m.receptors):
        coeffs = {
            f"pre_{imp.id}": float(signs[j] * mpr[j, k])
            for j, imp in enumerate(m.impacts)
            if mpr[j, k] != 0.0
        }
        coeffs[f"ric_{rec.id}"] = -1.0
        constraints.append(
            LinearConstraint(coeffs, "=", 0.0, name=f"receptor_balance_{rec.id}")
        )

    families = 0
    for rid, limit in s.receptor_limits.items():
        m.receptor_index(rid)  # raises UnknownEntityError for bad ids
        constraints.append(
            LinearConstraint({f"ric_{rid}": 1.0}, "<=", float(limit),
                             name=f"limit_{rid}")
        )
    families += bool(s.receptor_limits)

    for gi, group in enumerate(s.demand_groups):
        if not group.activity_ids:
            raise ValueError(f"demand group {gi} is empty")
        for aid in group.activity_ids:
            m.activity_index(aid)
        constraints.append(
            LinearConstraint(
                {f"ope_{aid}": 1.0 for aid in group.activity_ids},
                ">=",
                float(group.lower_bound),
                name=f"demand_{gi}",
            )
        )
    families += bool(s.demand_groups)

    if s.budget is not None and s.costs:
        for aid in s.costs:
            m.activity_index(aid)
        constraints.append(
            LinearConstraint(
                {f"ope_{aid}": float(c) for aid, c in s.costs.items() if c != 0.0},
                "<=",
                float(s.budget),
                name="budget",
            )
        )
        families += 1

    if families == 0:
        raise ValueError(
            "capacity problem needs at least one constraint family "
            "(receptor limits, demand groups, or costs+budget)"
        )

    if objective.kind == "receptor":
        if objective.weights:
            for rid in objective.weights:
                m.receptor_index(rid)
            obj = {f"ric_{rid}": float(w) for rid, w in objective.weights.items()}
        else:
            if objective.receptor_id is None:
                raise ValueError("receptor objective needs receptor_id or weights")
            m.receptor_index(objective.receptor_id)
            obj = {f"ric_{objective.receptor_id}": 1.0}
    elif objective.kind == "group_total":
        try:
            group = s.demand_groups[objective.group_index]
        except IndexError:
            raise ValueError(
                f"objective.group_index {objective.group_index} out of range"
            ) from None
        obj = {f"ope_{aid}": 1.0 for aid in group.activity_ids}
    else:
        raise ValueError(f"unknown objective kind {objective.kind!r}")

    return LpProblem(
        variables=tuple(variables),
        constraints=tuple(constraints),
        objective=obj,
        sense=objective.sense,
    )


@dataclass(frozen=True)
class DeltaResult:
    scenario: Scenario
    footprint: FootprintReport
    solution: LpSolution
    problem: LpProblem


def optimize_scenario_delta(
    m: CoaxialMatrices,
    base: Scenario,
    delta: float,
    receptor_id: str,
    sense: str = "max",
    convention: SignConvention = SignConvention.POLARITY_SIGNED,
    enforce_budget: bool = False,
) -> DeltaResult:
    """Re-optimize one receptor with each magnitude confined near its base.

    Every magnitude may move within ``[base*(1-delta), base*(1+delta)]``.
    Cost/budget constraints are off by default and applied only on request.
    Returns the adjusted scenario, its footprint, and the LP artifacts.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    k = m.receptor_index(receptor_id)
    for aid in base.magnitudes:
        m.activity_index(aid)
    effects = unit_receptor_effects(m, convention)[:, k]

    variables = []
    for i, a in enumerate(m.activities):
        mag = base.magnitude(a.id)
        variables.append(
            Variable(
                id=f"ope_{a.id}",
                lower=mag * (1.0 - delta),
                upper=mag * (1.0 + delta),
            )
        )
    constraints: list[LinearConstraint] = []
    if enforce_budget and base.budget is not None and base.costs:
        constraints.append(
            LinearConstraint(
                {f"ope_{aid}": float(c) for aid, c in base.costs.items() if c != 0.0},
                "<=",
                float(base.budget),
                name="budget",
            )
        )
    objective = {f"ope_{a.id}": float(effects[i]) for i, a in enumerate(m.activities)}
    problem = LpProblem(tuple(variables), tuple(constraints), objective, sense=sense)
    sol = solve_lp(problem)
    if sol.status != "optimal":
        return DeltaResult(base, assess(m, base, convention), sol, problem)

    # Preserve the base key set so a delta of 0 returns the base verbatim.
    new_magnitudes = dict(base.magnitudes)
    for a in m.activities:
        value = sol.primal[f"ope_{a.id}"]
        if value != 0.0 or a.id in new_magnitudes:
            new_magnitudes[a.id] = value
    adjusted = replace(base, magnitudes=new_magnitudes)
    return DeltaResult(adjusted, assess(m, adjusted, convention), sol, problem)
