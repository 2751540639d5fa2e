"""Testkit: model-enumeration oracle, seeded generator, differential runner."""

import dataclasses
import random
from collections import Counter

import pytest

from trilogic.dialects import parse_prover9, parse_pyke, parse_z3
from trilogic.fol import (
    Answered, DEFAULT_LIMITS, ExecError, Truth, Verdict, WorldAssumption,
)
from trilogic.testkit import (
    DEFAULT_ENGINES, DiffReport, GenConfig, GeneratedProblem,
    differential_check, enumerate_models, generate_problem, generate_suite,
    oracle_universe,
)


def p9(text):
    return parse_prover9(text)


class TestOracle:
    def test_positive_entailment(self):
        out = enumerate_models(p9("Premises:\np(A)\nall x (p(x) -> q(x))\n"
                                  "Conclusion:\nq(A)\n"))
        assert out.verdict.value is Truth.TRUE

    def test_negative_entailment(self):
        out = enumerate_models(p9("Premises:\n-q(A)\nConclusion:\nq(A)\n"))
        assert out.verdict.value is Truth.FALSE

    def test_independent_conclusion(self):
        out = enumerate_models(p9("Premises:\np(A)\nConclusion:\nq(A)\n"))
        assert out.verdict.value is Truth.UNKNOWN

    def test_contradictory_premises(self):
        out = enumerate_models(p9("Premises:\np(A)\n-p(A)\nConclusion:\nq(A)\n"))
        assert type(out).__name__ == "Inconsistent"

    def test_universal_conclusion_not_overclaimed(self):
        # one named constant satisfies p; an unnamed individual may not
        out = enumerate_models(p9("Premises:\np(A)\nConclusion:\nall x (p(x))\n"))
        assert out.verdict.value is Truth.UNKNOWN

    def test_existential_reasoning_without_constants(self):
        out = enumerate_models(p9("Premises:\nexists x (p(x))\n"
                                  "all x (p(x) -> q(x))\n"
                                  "Conclusion:\nexists y (q(y))\n"))
        assert out.verdict.value is Truth.TRUE

    def test_xor_semantics(self):
        out = enumerate_models(p9("Premises:\np(A) ^ q(A)\np(A)\n"
                                  "Conclusion:\nq(A)\n"))
        assert out.verdict.value is Truth.FALSE

    def test_atom_budget_error(self):
        big = p9("Premises:\nall x (all y (r(x, y)))\n"
                 "Conclusion:\nr(A, B)\n")
        with pytest.raises(ExecError, match="oracle limit"):
            enumerate_models(big, max_atoms=2)

    def test_verdict_ignores_premise_order(self):
        for i in range(5):
            gp = generate_problem(GenConfig(seed=23), i)
            premises = list(gp.problem.premises)
            random.Random(i).shuffle(premises)
            shuffled = dataclasses.replace(gp.problem,
                                           premises=tuple(premises))
            out = enumerate_models(shuffled)
            assert isinstance(out, Answered)
            assert out.verdict.value is gp.gold


class TestOracleUniverse:
    def test_named_constants_plus_conclusion_witness(self):
        p = p9("Premises:\np(A)\nConclusion:\nall x (p(x))\n")
        assert oracle_universe(p) == ["A", "_w0"]

    def test_premise_existentials_add_witnesses(self):
        p = p9("Premises:\nexists x (p(x))\nall x (p(x) -> q(x))\n"
               "Conclusion:\nexists y (q(y))\n")
        assert oracle_universe(p) == ["_w0", "_w1"]

    def test_negated_universal_counts_as_existential(self):
        p = p9("Premises:\n-(all x (p(x)))\nConclusion:\np(A)\n")
        assert oracle_universe(p) == ["A", "_w0"]

    def test_ground_problem_needs_no_witnesses(self):
        p = p9("Premises:\np(A)\nConclusion:\nq(B)\n")
        assert oracle_universe(p) == ["A", "B"]


class TestGenerator:
    def test_deterministic_per_seed_and_index(self):
        cfg = GenConfig(seed=11)
        assert generate_problem(cfg, 3) == generate_problem(cfg, 3)

    def test_different_indices_differ(self):
        cfg = GenConfig(seed=11)
        assert generate_problem(cfg, 0).id != generate_problem(cfg, 1).id

    def test_id_and_tags(self):
        gp = generate_problem(GenConfig(seed=7), 0)
        assert gp.id == "gen-horn-s7-00000"
        assert gp.tags["fragment"] == "horn"
        assert gp.tags["dataset"] == "generated"

    def test_horn_mode_emits_all_three_dialects(self):
        gp = generate_problem(GenConfig(seed=7), 0)
        assert sorted(gp.texts) == ["prover9", "pyke", "z3"]

    def test_full_fol_mode_omits_rule_engine_text(self):
        gp = generate_problem(GenConfig(fragment="full-fol", seed=7), 0)
        assert sorted(gp.texts) == ["prover9", "z3"]

    def test_gold_matches_oracle(self):
        for i in range(5):
            gp = generate_problem(GenConfig(seed=5), i)
            out = enumerate_models(gp.problem, max_atoms=28)
            assert isinstance(out, Answered)
            assert out.verdict.value is gp.gold

    def test_texts_reparse_to_the_same_problem(self):
        for i in range(5):
            gp = generate_problem(GenConfig(seed=9), i)
            again = parse_prover9(gp.texts["prover9"])
            assert again.premises == gp.problem.premises
            assert again.conclusion == gp.problem.conclusion

    def test_z3_text_reparses_equivalently(self):
        for i in range(3):
            gp = generate_problem(GenConfig(seed=13), i)
            z = parse_z3(gp.texts["z3"])
            assert z.premises == gp.problem.premises
            assert z.conclusion == gp.problem.conclusion

    def test_pyke_text_parses(self):
        gp = generate_problem(GenConfig(seed=7), 0)
        prog = parse_pyke(gp.texts["pyke"])
        assert prog.query is not None

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GenConfig(constants=1)
        with pytest.raises(ValueError):
            GenConfig(fragment="horn", depth=6, unary_predicates=6)
        with pytest.raises(ValueError):
            GenConfig(fragment="nonsense")

    def test_suite_cycles_depths(self):
        suite = generate_suite(GenConfig(seed=3), 6, depths=(2, 3, 5))
        assert [gp.tags["depth"] for gp in suite] == ["2", "3", "5", "2", "3", "5"]

    def test_minimal_config_label_is_positive(self):
        # a bare chain with nothing to distract always derives its goal
        cfg = GenConfig(depth=1, distractor_facts=0, distractor_rules=0)
        assert generate_problem(cfg, 0).gold is Truth.TRUE

    def test_horn_labels_stay_balanced(self):
        # chi-square against uniform over {True, Unknown}; 6.635 is the
        # df=1 critical value at p=0.01
        cfg = GenConfig(seed=17)
        counts = Counter(generate_problem(cfg, i).gold for i in range(3000))
        assert set(counts) == {Truth.TRUE, Truth.UNKNOWN}
        expected = 3000 / 2
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2 < 6.635

    def test_full_fol_labels_stay_balanced(self):
        # df=2 critical value at p=0.01 is 9.210
        cfg = GenConfig(seed=17, fragment="full-fol")
        counts = Counter(generate_problem(cfg, i).gold for i in range(450))
        expected = 450 / 3
        chi2 = sum((counts.get(t, 0) - expected) ** 2 / expected
                   for t in (Truth.TRUE, Truth.FALSE, Truth.UNKNOWN))
        assert chi2 < 9.210


class TestDifferential:
    def test_clean_engines_agree(self):
        report = differential_check(20, GenConfig(seed=21))
        assert report.checked == 20
        assert report.ok

    def test_planted_bug_is_caught(self):
        def broken(gp, limits):
            return Answered(Verdict(Truth.TRUE))

        report = differential_check(10, GenConfig(seed=21),
                                    engines={"broken": broken})
        assert not report.ok
        bad = report.mismatches[0]
        assert bad.engine == "broken"
        assert bad.expected in ("True", "False", "Unknown")
        assert "prover9" in bad.texts

    def test_engine_names(self):
        assert sorted(DEFAULT_ENGINES) == ["chaining", "resolution", "sat"]
