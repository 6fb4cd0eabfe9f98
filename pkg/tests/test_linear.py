"""Linear model: footprint evaluation and the planning problem builders."""

import dataclasses

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from seadss import (
    CapacityObjective,
    DemandGroup,
    Scenario,
    SignConvention,
    UnknownEntityError,
    assess,
    build_capacity_problem,
    build_max_receptor_problem,
    builder,
    optimize_scenario_delta,
    solve_lp,
    solve_max_receptor,
    solve_mip,
    unit_footprint,
    unit_receptor_effects,
)


class TestAssess:
    def test_zero_scenario(self, signed_matrices):
        fp = assess(signed_matrices, Scenario(name="zero"))
        assert all(v == 0.0 for v in fp.impacts.values())
        assert all(v == 0.0 for v in fp.receptors.values())

    def test_hand_evaluated_signed_value(self, signed_matrices):
        fp = assess(signed_matrices, Scenario(name="s", magnitudes={"a": 1.0}))
        assert fp.impacts["n"] == pytest.approx(0.5, abs=1e-12)
        assert fp.impacts["p"] == pytest.approx(0.25, abs=1e-12)
        assert fp.receptors["r"] == pytest.approx(-0.25, abs=1e-12)

    def test_unsigned_mode_all_plus(self, signed_matrices):
        fp = assess(signed_matrices, Scenario(name="s", magnitudes={"a": 1.0}),
                    SignConvention.UNSIGNED)
        assert fp.receptors["r"] == pytest.approx(0.5, abs=1e-12)

    def test_doubling_magnitudes_doubles_footprint(self, signed_matrices):
        s1 = Scenario(name="s", magnitudes={"a": 1.5})
        s2 = Scenario(name="s", magnitudes={"a": 3.0})
        f1, f2 = assess(signed_matrices, s1), assess(signed_matrices, s2)
        for key in f1.impacts:
            assert f2.impacts[key] == pytest.approx(2 * f1.impacts[key], abs=1e-12)
        for key in f1.receptors:
            assert f2.receptors[key] == pytest.approx(2 * f1.receptors[key], abs=1e-12)

    def test_unknown_activity_rejected(self, signed_matrices):
        with pytest.raises(UnknownEntityError):
            assess(signed_matrices, Scenario(name="s", magnitudes={"ghost": 1.0}))

    # the matrices fixture is immutable, so sharing it across examples is fine
    @settings(max_examples=50, deadline=None,
              suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(
        m1=st.floats(0, 10), m2=st.floats(0, 10),
        alpha=st.floats(0, 3), beta=st.floats(0, 3),
    )
    def test_linearity(self, two_activity_matrices, m1, m2, alpha, beta):
        m = two_activity_matrices
        s1 = Scenario(name="s1", magnitudes={"a1": m1, "a2": m2})
        s2 = Scenario(name="s2", magnitudes={"a1": m2, "a2": m1})
        combo = Scenario(
            name="combo",
            magnitudes={
                "a1": alpha * m1 + beta * m2,
                "a2": alpha * m2 + beta * m1,
            },
        )
        fc = assess(m, combo)
        f1, f2 = assess(m, s1), assess(m, s2)
        for rid in fc.receptors:
            expected = alpha * f1.receptors[rid] + beta * f2.receptors[rid]
            assert abs(fc.receptors[rid] - expected) <= 1e-9


class TestUnitFootprint:
    def test_zero_row_activity(self):
        m = builder(
            activities=["quiet"],
            impacts=[("n", "negative")],
            receptors=["r"],
            mop=[[0.0]],
            mpr=[[0.5]],
        )
        fp = unit_footprint(m, "quiet")
        assert fp.impacts["n"] == 0.0
        assert fp.receptors["r"] == 0.0

    def test_fixture_value(self, signed_matrices):
        assert unit_footprint(signed_matrices, "a").receptors["r"] == pytest.approx(
            -0.25, abs=1e-12)

    def test_unknown_id(self, signed_matrices):
        with pytest.raises(UnknownEntityError):
            unit_footprint(signed_matrices, "ghost")

    def test_weighted_units_reproduce_assess(self, two_activity_matrices):
        m = two_activity_matrices
        s = Scenario(name="mix", magnitudes={"a1": 2.0, "a2": 5.0})
        full = assess(m, s)
        for rid in full.receptors:
            combined = sum(
                s.magnitude(a.id) * unit_footprint(m, a.id).receptors[rid]
                for a in m.activities
            )
            assert full.receptors[rid] == pytest.approx(combined, abs=1e-9)


class TestMaxReceptor:
    def test_max_selects_positive_activity(self, two_activity_matrices):
        result = solve_max_receptor(two_activity_matrices, "r", "max",
                                    cross_check=True)
        assert result.activity_id == "a2"
        assert result.value == pytest.approx(0.10, abs=1e-12)

    def test_min_selects_negative_activity(self, two_activity_matrices):
        result = solve_max_receptor(two_activity_matrices, "r", "min",
                                    cross_check=True)
        assert result.activity_id == "a1"
        assert result.value == pytest.approx(-0.25, abs=1e-12)

    def test_single_activity_chosen_for_both_senses(self, signed_matrices):
        for sense in ("max", "min"):
            result = solve_max_receptor(signed_matrices, "r", sense)
            assert result.activity_id == "a"

    def test_mip_path_matches_enumeration_on_random_matrices(self):
        rng = np.random.default_rng(31)
        levels = np.array([0.0, 0.25, 0.5, 0.75])
        for _ in range(10):
            nope = int(rng.integers(2, 12))
            npre = int(rng.integers(1, 6))
            m = builder(
                activities=[f"a{i}" for i in range(nope)],
                impacts=[(f"i{j}", "positive" if rng.random() < 0.4 else "negative")
                         for j in range(npre)],
                receptors=["r0", "r1"],
                mop=levels[rng.integers(0, 4, (nope, npre))],
                mpr=levels[rng.integers(0, 4, (npre, 2))],
            )
            for rid in ("r0", "r1"):
                sense = "max" if rng.random() < 0.5 else "min"
                enum = solve_max_receptor(m, rid, sense)
                sol = solve_mip(build_max_receptor_problem(m, rid, sense))
                assert sol.status == "optimal"
                assert sol.objective_value == pytest.approx(enum.value, abs=1e-9)

    def test_problem_marks_integrality_and_unit_total(self, two_activity_matrices):
        p = build_max_receptor_problem(two_activity_matrices, "r")
        assert all(v.integer for v in p.variables)
        assert p.constraints[0].relation == "="
        assert p.constraints[0].rhs == 1.0


class TestCapacityProblem:
    def _fixture(self):
        m = builder(
            activities=["a1", "a2"],
            impacts=[("p", "positive")],
            receptors=["r"],
            mop=[[0.5], [0.25]],
            mpr=[[0.75]],
        )
        return m

    def test_binding_limit_hand_solved(self):
        # unit effects 0.375 and 0.1875; max total under r <= 1.5 puts
        # everything on a2: 1.5 / 0.1875 = 8.
        m = self._fixture()
        s = Scenario(
            name="cap",
            receptor_limits={"r": 1.5},
            demand_groups=(DemandGroup(("a1", "a2"), 0.0),),
        )
        p = build_capacity_problem(m, s, CapacityObjective(kind="group_total"))
        sol = solve_lp(p)
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(8.0, abs=1e-7)
        assert sol.primal["ope_a2"] == pytest.approx(8.0, abs=1e-7)

    def test_zero_budget_forces_all_zero(self):
        m = self._fixture()
        s = Scenario(
            name="broke",
            costs={"a1": 2.0, "a2": 1.0},
            budget=0.0,
            demand_groups=(DemandGroup(("a1", "a2"), 0.0),),
        )
        p = build_capacity_problem(m, s, CapacityObjective(kind="group_total"))
        sol = solve_lp(p)
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(0.0, abs=1e-9)
        assert sol.primal["ope_a1"] == pytest.approx(0.0, abs=1e-9)
        assert sol.primal["ope_a2"] == pytest.approx(0.0, abs=1e-9)

    def test_no_limits_unbounded(self):
        m = self._fixture()
        s = Scenario(name="wild", demand_groups=(DemandGroup(("a1", "a2"), 1.0),))
        p = build_capacity_problem(m, s, CapacityObjective(kind="group_total"))
        assert solve_lp(p).status == "unbounded"

    def test_empty_demand_group_rejected(self):
        m = self._fixture()
        s = Scenario(name="odd", demand_groups=(DemandGroup((), 1.0),))
        with pytest.raises(ValueError):
            build_capacity_problem(m, s, CapacityObjective(kind="group_total"))

    def test_limit_on_unknown_receptor_rejected(self):
        m = self._fixture()
        s = Scenario(name="odd", receptor_limits={"ghost": 1.0})
        with pytest.raises(UnknownEntityError):
            build_capacity_problem(
                m, s, CapacityObjective(kind="receptor", receptor_id="r"))

    def test_no_constraint_family_rejected(self):
        m = self._fixture()
        with pytest.raises(ValueError):
            build_capacity_problem(
                m, Scenario(name="empty"),
                CapacityObjective(kind="receptor", receptor_id="r"))

    def test_weighted_receptor_objective(self, two_activity_matrices):
        s = Scenario(name="w", receptor_limits={"r": 10.0},
                     demand_groups=(DemandGroup(("a1", "a2"), 1.0),))
        p = build_capacity_problem(
            two_activity_matrices, s,
            CapacityObjective(kind="receptor", weights={"r": -2.0}, sense="min"))
        sol = solve_lp(p)
        assert sol.status in {"optimal", "unbounded"}

    def test_evaluator_matches_lp_with_fixed_magnitudes(self, two_activity_matrices):
        m = two_activity_matrices
        s = Scenario(name="fix", magnitudes={"a1": 2.0, "a2": 3.0},
                     receptor_limits={"r": 100.0})
        p = build_capacity_problem(
            m, s, CapacityObjective(kind="receptor", receptor_id="r"))
        fixed_vars = tuple(
            dataclasses.replace(v, lower=s.magnitude(v.id[len("ope_"):]),
                                upper=s.magnitude(v.id[len("ope_"):]))
            if v.id.startswith("ope_") else v
            for v in p.variables
        )
        sol = solve_lp(dataclasses.replace(p, variables=fixed_vars))
        assert sol.status == "optimal"
        expected = assess(m, s).receptors["r"]
        assert sol.objective_value == pytest.approx(expected, abs=1e-7)


class TestDeltaOptimization:
    def test_delta_zero_returns_base(self, two_activity_matrices):
        base = Scenario(name="base", magnitudes={"a1": 2.0, "a2": 3.0})
        result = optimize_scenario_delta(two_activity_matrices, base, 0.0, "r")
        assert result.scenario == base

    def test_single_positive_activity_moves_to_cap(self, chain_matrices):
        base = Scenario(name="base", magnitudes={"a": 100.0})
        result = optimize_scenario_delta(chain_matrices, base, 0.01, "r", "max")
        assert result.scenario.magnitudes["a"] == pytest.approx(101.0, abs=1e-7)

    def test_objective_monotone_in_delta(self, two_activity_matrices):
        base = Scenario(name="base", magnitudes={"a1": 5.0, "a2": 5.0})
        values = [
            optimize_scenario_delta(two_activity_matrices, base, d, "r", "max")
            .solution.objective_value
            for d in (0.0, 0.01, 0.05, 0.2)
        ]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_negative_delta_rejected(self, two_activity_matrices):
        base = Scenario(name="base", magnitudes={"a1": 1.0})
        with pytest.raises(ValueError):
            optimize_scenario_delta(two_activity_matrices, base, -0.1, "r")

    def test_budget_enforcement_optional(self, chain_matrices):
        base = Scenario(name="base", magnitudes={"a": 100.0},
                        costs={"a": 1.0}, budget=100.0)
        free = optimize_scenario_delta(chain_matrices, base, 0.01, "r", "max")
        capped = optimize_scenario_delta(chain_matrices, base, 0.01, "r", "max",
                                         enforce_budget=True)
        assert free.scenario.magnitudes["a"] == pytest.approx(101.0, abs=1e-7)
        assert capped.scenario.magnitudes["a"] == pytest.approx(100.0, abs=1e-7)


class TestUnsignedInvariant:
    def test_unsigned_receptors_nonnegative(self):
        rng = np.random.default_rng(37)
        levels = np.array([0.0, 0.25, 0.5, 0.75])
        for _ in range(20):
            nope, npre, nric = rng.integers(1, 6, 3)
            m = builder(
                activities=[f"a{i}" for i in range(nope)],
                impacts=[(f"i{j}", "negative") for j in range(npre)],
                receptors=[f"r{k}" for k in range(nric)],
                mop=levels[rng.integers(0, 4, (nope, npre))],
                mpr=levels[rng.integers(0, 4, (npre, nric))],
            )
            s = Scenario(
                name="s",
                magnitudes={f"a{i}": float(rng.uniform(0, 5)) for i in range(nope)},
            )
            fp = assess(m, s, SignConvention.UNSIGNED)
            assert all(v >= 0.0 for v in fp.receptors.values())

    def test_effects_table_shape(self, two_activity_matrices):
        effects = unit_receptor_effects(two_activity_matrices)
        assert effects.shape == (2, 1)
        assert effects[0, 0] == pytest.approx(-0.25, abs=1e-12)
        assert effects[1, 0] == pytest.approx(0.10, abs=1e-12)
