"""Causal model: program construction, closed-form inference, and the
enumeration oracle that cross-checks it."""

from pathlib import Path

import numpy as np
import pytest

from seadss import (
    CombinationParams,
    GroundClause,
    GroundProgram,
    OracleLimitError,
    StratificationError,
    build_program,
    builder,
    enumerate_oracle,
    export_text,
    ground,
    impact_probability,
    intervene,
    parse_program_text,
    receptor_evidence,
    receptor_probabilities,
    receptor_probability,
)
from helpers import random_causal_program

GOLDEN = Path(__file__).parent / "data" / "movements_program.lpad"


@pytest.fixture()
def movements_program(movements_matrices):
    return intervene(build_program(movements_matrices), {"ext_mov", "int_mov"})


class TestBuildProgram:
    def test_single_cell_single_clause(self):
        m = builder(
            activities=["a"],
            impacts=[("n", "negative")],
            receptors=[],
            mop=[[0.75]],
            mpr=[[]],
        )
        gp = ground(build_program(m))
        assert gp.clauses == (GroundClause("n", 0.75, (("a", True),)),)

    def test_zero_matrices_only_combination_rules(self):
        m = builder(
            activities=["a"],
            impacts=[("n", "negative")],
            receptors=["r"],
            mop=[[0.0]],
            mpr=[[0.0]],
        )
        program = build_program(m)
        gp = ground(program)
        assert len(gp.clauses) == 4
        assert all(c.head == "r" for c in gp.clauses)
        assert receptor_probability(program, "r") == 0.5

    def test_mpr_routing_by_polarity(self, movements_matrices):
        gp = ground(build_program(movements_matrices))
        heads = {c.head for c in gp.clauses}
        assert "health_neg" in heads  # fed by the negative impact
        assert "health_pos" in heads  # fed by the positive impact

    def test_probabilistic_and_intervened_disjoint(self, movements_matrices):
        with pytest.raises(ValueError):
            intervene(
                build_program(movements_matrices), {"ext_mov"}
            ).__class__(
                matrices=movements_matrices,
                interventions=frozenset({"ext_mov"}),
                activity_probs={"ext_mov": 0.5},
            )

    def test_intervene_drops_probability_annotation(self, movements_matrices):
        p = build_program(movements_matrices, activity_probs={"ext_mov": 0.3})
        done = intervene(p, {"ext_mov"})
        assert done.activity_probs == {}
        assert done.interventions == {"ext_mov"}


class TestIntervene:
    def test_empty_intervention_is_noop(self, movements_matrices):
        p = build_program(movements_matrices)
        assert intervene(p, set()) == p

    def test_idempotent(self, movements_matrices):
        p = build_program(movements_matrices)
        once = intervene(p, {"ext_mov"})
        twice = intervene(once, {"ext_mov"})
        assert once == twice

    def test_unknown_id_rejected(self, movements_matrices):
        with pytest.raises(KeyError):
            intervene(build_program(movements_matrices), {"ghost"})

    def test_do_query_matches_oracle_on_transformed_program(self, movements_matrices):
        p = intervene(build_program(movements_matrices), {"ext_mov"})
        assert impact_probability(p, "disp") == pytest.approx(
            enumerate_oracle(p, "disp"), abs=1e-12)


class TestImpactProbability:
    def test_two_cause_noisy_or_anchor(self, movements_program):
        assert impact_probability(movements_program, "disp") == 0.9375

    def test_no_active_activities(self, movements_matrices):
        assert impact_probability(build_program(movements_matrices), "disp") == 0.0

    def test_single_cause_equals_coefficient(self, movements_matrices):
        p = intervene(build_program(movements_matrices), {"int_mov"})
        assert impact_probability(p, "disp") == 0.75

    def test_monotone_in_do_set(self, movements_matrices):
        base = build_program(movements_matrices)
        p0 = impact_probability(base, "disp")
        p1 = impact_probability(intervene(base, {"ext_mov"}), "disp")
        p2 = impact_probability(intervene(base, {"ext_mov", "int_mov"}), "disp")
        assert p0 <= p1 <= p2


class TestReceptorProbability:
    def test_no_activities_neutral(self, movements_matrices):
        assert receptor_probability(build_program(movements_matrices),
                                    "health") == 0.5

    def test_chain_fixture(self, chain_matrices):
        p = intervene(build_program(chain_matrices), {"a"})
        q_pos, q_neg = receptor_evidence(p, "r")
        assert q_pos == pytest.approx(0.375, abs=1e-15)
        assert q_neg == 0.0
        value = receptor_probability(p, "r")
        assert value == pytest.approx(0.65, abs=1e-12)
        assert value == pytest.approx(enumerate_oracle(p, "r"), abs=1e-12)

    def test_boundary_combination_cases(self):
        m = builder(
            activities=["a"],
            impacts=[("good", "positive"), ("bad", "negative")],
            receptors=["r"],
            mop=[[1.0, 0.0]],
            mpr=[[1.0], [1.0]],
        )
        p = intervene(build_program(m), {"a"})
        assert receptor_probability(p, "r") == 0.9  # certain positive evidence

        m2 = builder(
            activities=["a"],
            impacts=[("good", "positive"), ("bad", "negative")],
            receptors=["r"],
            mop=[[0.0, 1.0]],
            mpr=[[1.0], [1.0]],
        )
        p2 = intervene(build_program(m2), {"a"})
        assert receptor_probability(p2, "r") == 0.1  # certain negative evidence

    def test_affine_identity_for_default_params(self, movements_program):
        q_pos, q_neg = receptor_evidence(movements_program, "health")
        value = receptor_probability(movements_program, "health")
        assert abs(value - (0.5 + 0.4 * (q_pos - q_neg))) <= 1e-12

    def test_default_bounds(self, movements_program):
        value = receptor_probability(movements_program, "health")
        assert 0.1 <= value <= 0.9

    def test_custom_combination_params(self, movements_matrices):
        params = CombinationParams(neg_only=0.0, neither=0.5, both=0.4, pos_only=1.0)
        p = intervene(
            build_program(movements_matrices, combination_params=params),
            {"ext_mov", "int_mov"},
        )
        assert receptor_probability(p, "health") == pytest.approx(
            enumerate_oracle(p, "health"), abs=1e-12)

    def test_vectorized_receptor_batch_matches_scalar(self, movements_program):
        batch = receptor_probabilities(movements_program)
        assert batch["health"] == pytest.approx(
            receptor_probability(movements_program, "health"), abs=1e-15)


class TestProbabilisticActivities:
    def test_probability_one_equals_do(self, movements_matrices):
        via_do = intervene(build_program(movements_matrices),
                           {"ext_mov", "int_mov"})
        via_probs = build_program(
            movements_matrices, activity_probs={"ext_mov": 1.0, "int_mov": 1.0})
        assert impact_probability(via_probs, "disp") == pytest.approx(
            impact_probability(via_do, "disp"), abs=1e-15)
        assert receptor_probability(via_probs, "health") == pytest.approx(
            receptor_probability(via_do, "health"), abs=1e-15)

    def test_probabilistic_matches_oracle(self, movements_matrices):
        p = build_program(movements_matrices,
                          activity_probs={"ext_mov": 0.25, "int_mov": 0.5})
        assert impact_probability(p, "disp") == pytest.approx(
            enumerate_oracle(p, "disp"), abs=1e-12)
        assert receptor_probability(p, "health") == pytest.approx(
            enumerate_oracle(p, "health"), abs=1e-12)

    def test_too_many_probabilistic_activities(self):
        n = 21
        m = builder(
            activities=[f"a{i}" for i in range(n)],
            impacts=[("x", "negative")],
            receptors=[],
            mop=[[0.25]] * n,
            mpr=[[]],
        )
        p = build_program(m, activity_probs={f"a{i}": 0.5 for i in range(n)})
        with pytest.raises(OracleLimitError):
            impact_probability(p, "x")


class TestOracle:
    def test_single_fact(self):
        gp = GroundProgram((GroundClause("h", 0.3),))
        assert enumerate_oracle(gp, "h") == pytest.approx(0.3, abs=1e-15)

    def test_anchor_value(self, movements_program):
        assert enumerate_oracle(movements_program, "disp") == pytest.approx(
            0.9375, abs=1e-15)

    def test_query_for_underivable_atom(self, movements_matrices):
        assert enumerate_oracle(build_program(movements_matrices), "disp") == 0.0

    def test_random_programs_match_closed_form(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            p = random_causal_program(rng)
            m = p.matrices
            for imp in m.impact_ids:
                assert impact_probability(p, imp) == pytest.approx(
                    enumerate_oracle(p, imp), abs=1e-9)
            for rec in m.receptor_ids:
                assert receptor_probability(p, rec) == pytest.approx(
                    enumerate_oracle(p, rec), abs=1e-9)

    def test_choice_space_cap(self):
        clauses = tuple(
            GroundClause("h", 0.5, ((f"b{i}", True),)) for i in range(26)
        ) + tuple(GroundClause(f"b{i}", 0.5) for i in range(26))
        with pytest.raises(OracleLimitError):
            enumerate_oracle(GroundProgram(clauses), "h")

    def test_dead_cycle_sums_to_zero(self):
        # Mutual support with no external fact: neither atom is ever
        # derivable, so the cycle is pruned and the probability is 0.
        text = "a:0.5 :- b.\nb:0.5 :- a.\n"
        assert enumerate_oracle(parse_program_text(text), "a") == 0.0

    def test_live_negation_cycle_rejected(self):
        text = "a:0.5 :- \\+ b.\nb:0.5 :- \\+ a.\n"
        with pytest.raises(StratificationError):
            enumerate_oracle(parse_program_text(text), "a")


class TestMonotonicity:
    def test_positive_only_activity_never_decreases_receptors(self):
        rng = np.random.default_rng(43)
        for _ in range(20):
            p = random_causal_program(rng, max_prob_acts=0)
            m = p.matrices
            pos_only = [
                a for i, a in enumerate(m.activity_ids)
                if a not in p.interventions
                and any(m.mop_array[i, j] > 0 and m.polarity_signs[j] > 0
                        for j in range(m.npre))
                and not any(m.mop_array[i, j] > 0 and m.polarity_signs[j] < 0
                            for j in range(m.npre))
            ]
            if not pos_only:
                continue
            before = receptor_probabilities(p)
            after = receptor_probabilities(intervene(p, {pos_only[0]}))
            for rec in m.receptor_ids:
                assert after[rec] >= before[rec] - 1e-12

    def test_negative_only_activity_never_increases_receptors(self):
        rng = np.random.default_rng(47)
        for _ in range(20):
            p = random_causal_program(rng, max_prob_acts=0)
            m = p.matrices
            neg_only = [
                a for i, a in enumerate(m.activity_ids)
                if a not in p.interventions
                and any(m.mop_array[i, j] > 0 and m.polarity_signs[j] < 0
                        for j in range(m.npre))
                and not any(m.mop_array[i, j] > 0 and m.polarity_signs[j] > 0
                            for j in range(m.npre))
            ]
            if not neg_only:
                continue
            before = receptor_probabilities(p)
            after = receptor_probabilities(intervene(p, {neg_only[0]}))
            for rec in m.receptor_ids:
                assert after[rec] <= before[rec] + 1e-12


class TestTextFormat:
    def test_golden_file(self, movements_program):
        assert export_text(movements_program) == GOLDEN.read_text()

    def test_empty_matrices_emit_only_combination_rules(self):
        m = builder(
            activities=["a"],
            impacts=[("n", "negative")],
            receptors=["r"],
            mop=[[0.0]],
            mpr=[[0.0]],
        )
        text = export_text(build_program(m))
        lines = [l for l in text.splitlines() if l]
        assert len(lines) == 4
        assert all(l.startswith("r:") for l in lines)

    def test_round_trip_equivalence(self, movements_program):
        gp = ground(movements_program)
        assert gp.equivalent(parse_program_text(export_text(movements_program)))

    def test_round_trip_preserves_oracle_answers(self, movements_program):
        reparsed = parse_program_text(export_text(movements_program))
        assert enumerate_oracle(reparsed, "health") == pytest.approx(
            enumerate_oracle(movements_program, "health"), abs=1e-15)

    def test_quoting_of_spacey_atoms(self):
        m = builder(
            activities=["External movements"],
            impacts=[("Dispersion of materials", "negative")],
            receptors=[],
            mop=[[0.75]],
            mpr=[[]],
        )
        text = export_text(intervene(build_program(m), {"External movements"}))
        assert "'External movements'." in text
        assert "'Dispersion of materials':0.75 :- 'External movements'." in text
        gp = parse_program_text(text)
        assert gp.atoms == {"External movements", "Dispersion of materials"}
