"""Random problem generators and independent oracles for the solver tests."""

import itertools
import math

import numpy as np

from seadss import (
    LinearConstraint,
    LpProblem,
    Variable,
    build_program,
    builder,
    intervene,
    solve_lp,
)


def random_box_lp(rng: np.random.Generator, max_vars: int = 10,
                  max_cons: int = 10, allow_equalities: bool = True) -> LpProblem:
    """Feasible bounded LP: a strictly interior point is generated first and
    right-hand sides are derived from it; box bounds guarantee boundedness."""
    n = int(rng.integers(2, max_vars + 1))
    m = int(rng.integers(1, max_cons + 1))
    upper = rng.uniform(0.5, 10.0, n)
    x0 = rng.uniform(0.05, 0.95, n) * upper
    a = rng.normal(size=(m, n))

    variables = tuple(
        Variable(id=f"x{j}", lower=0.0, upper=float(upper[j])) for j in range(n)
    )
    constraints = []
    for i in range(m):
        roll = rng.random()
        activity = float(a[i] @ x0)
        if allow_equalities and roll < 0.15:
            relation, rhs = "=", activity
        elif roll < 0.6:
            relation, rhs = "<=", activity + float(rng.uniform(0.1, 2.0))
        else:
            relation, rhs = ">=", activity - float(rng.uniform(0.1, 2.0))
        coeffs = {f"x{j}": float(a[i, j]) for j in range(n)}
        constraints.append(LinearConstraint(coeffs, relation, rhs))

    c = rng.normal(size=n)
    objective = {f"x{j}": float(c[j]) for j in range(n)}
    sense = "max" if rng.random() < 0.5 else "min"
    return LpProblem(variables, tuple(constraints), objective, sense)


def external_dual_objective(p: LpProblem, sol) -> float:
    """Dual objective rebuilt from the reported duals, reduced costs, and
    active bounds; equals the primal objective at a correct optimum."""
    total = sum(sol.duals[i] * con.rhs for i, con in enumerate(p.constraints))
    for v in p.variables:
        x = sol.primal[v.id]
        rc = sol.reduced_costs[v.id]
        if abs(x - v.lower) <= 1e-7:
            total += rc * v.lower
        elif v.upper != math.inf and abs(v.upper - x) <= 1e-7:
            total += rc * v.upper
    return total


def primal_feasibility_violation(p: LpProblem, primal: dict) -> float:
    worst = 0.0
    for con in p.constraints:
        activity = sum(coef * primal[vid] for vid, coef in con.coeffs.items())
        if con.relation == "<=":
            worst = max(worst, activity - con.rhs)
        elif con.relation == ">=":
            worst = max(worst, con.rhs - activity)
        else:
            worst = max(worst, abs(activity - con.rhs))
    for v in p.variables:
        worst = max(worst, v.lower - primal[v.id])
        if v.upper != math.inf:
            worst = max(worst, primal[v.id] - v.upper)
    return worst


def finite_difference_duals(p: LpProblem, sol, eps: float = 1e-4):
    """Re-solve with each rhs nudged by +eps; yields (index, dual, fd_slope).

    Skips constraints whose perturbed problem fails to stay optimal.
    """
    out = []
    for i, con in enumerate(p.constraints):
        perturbed = LpProblem(
            p.variables,
            tuple(
                LinearConstraint(c.coeffs, c.relation, c.rhs + (eps if j == i else 0.0),
                                 c.name)
                for j, c in enumerate(p.constraints)
            ),
            p.objective,
            p.sense,
        )
        psol = solve_lp(perturbed)
        if psol.status != "optimal":
            continue
        fd = (psol.objective_value - sol.objective_value) / eps
        out.append((i, sol.duals[i], fd))
    return out


def random_integer_problem(rng: np.random.Generator, max_vars: int = 4
                           ) -> LpProblem:
    """Small all-integer problem over the [0, 5] grid, feasible by construction."""
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, 4))
    x0 = rng.integers(0, 6, n)
    a = rng.integers(-3, 4, (m, n)).astype(float)

    variables = tuple(
        Variable(id=f"x{j}", lower=0.0, upper=5.0, integer=True) for j in range(n)
    )
    constraints = []
    for i in range(m):
        activity = float(a[i] @ x0)
        if rng.random() < 0.5:
            relation, rhs = "<=", activity + float(rng.integers(0, 3))
        else:
            relation, rhs = ">=", activity - float(rng.integers(0, 3))
        coeffs = {f"x{j}": float(a[i, j]) for j in range(n) if a[i, j] != 0.0}
        constraints.append(LinearConstraint(coeffs, relation, rhs))

    c = rng.normal(size=n)
    objective = {f"x{j}": float(c[j]) for j in range(n)}
    sense = "max" if rng.random() < 0.5 else "min"
    return LpProblem(variables, tuple(constraints), objective, sense)


def brute_force_integer_optimum(p: LpProblem) -> float | None:
    """Exhaustive enumeration over the integer grid inside the box bounds."""
    ranges = [
        range(int(math.ceil(v.lower)), int(math.floor(v.upper)) + 1)
        for v in p.variables
    ]
    best = None
    maximizing = p.sense == "max"
    for point in itertools.product(*ranges):
        primal = {v.id: float(point[j]) for j, v in enumerate(p.variables)}
        if primal_feasibility_violation(p, primal) > 1e-9:
            continue
        obj = sum(p.objective.get(v.id, 0.0) * primal[v.id] for v in p.variables)
        if best is None or (obj > best if maximizing else obj < best):
            best = obj
    return best


LEVELS = (0.25, 0.5, 0.75)


def random_sparse_matrices(rng: np.random.Generator, max_acts: int = 4,
                           max_imps: int = 5, max_recs: int = 2,
                           max_mop_cells: int = 8,
                           max_mpr_per_receptor: int = 3):
    """Small sparse matrix set with level-valued coefficients.

    Sparsity keeps the relevant ground choice space per query small enough
    for the enumeration oracle to stay fast.
    """
    nope = int(rng.integers(1, max_acts + 1))
    npre = int(rng.integers(1, max_imps + 1))
    nric = int(rng.integers(1, max_recs + 1))

    mop = np.zeros((nope, npre))
    n_cells = int(rng.integers(1, max_mop_cells + 1))
    for _ in range(n_cells):
        mop[rng.integers(0, nope), rng.integers(0, npre)] = rng.choice(LEVELS)

    mpr = np.zeros((npre, nric))
    for k in range(nric):
        rows = rng.permutation(npre)[: int(rng.integers(0, max_mpr_per_receptor + 1))]
        for j in rows:
            mpr[j, k] = rng.choice(LEVELS)

    return builder(
        activities=[f"act{i}" for i in range(nope)],
        impacts=[(f"imp{j}", "positive" if rng.random() < 0.45 else "negative")
                 for j in range(npre)],
        receptors=[f"rec{k}" for k in range(nric)],
        mop=mop,
        mpr=mpr,
    )


def random_causal_program(rng: np.random.Generator, max_prob_acts: int = 2,
                          **matrix_kwargs):
    """Random program: sparse matrices, random do-set, a few probabilistic
    activities with level-valued probabilities."""
    m = random_sparse_matrices(rng, **matrix_kwargs)
    ids = list(m.activity_ids)
    rng.shuffle(ids)
    n_do = int(rng.integers(0, len(ids) + 1))
    do_set = ids[:n_do]
    remaining = ids[n_do:]
    probs = {
        aid: float(rng.choice(LEVELS))
        for aid in remaining[: int(rng.integers(0, max_prob_acts + 1))]
    }
    return intervene(build_program(m, activity_probs=probs), do_set)
