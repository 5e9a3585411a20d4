# tests/test_chains.py
import pytest
from django.test import SimpleTestCase

from susy.chains import (
    build_chain,
    chain_constants,
    check_chain_conditions,
    check_generalized_chain_condition,
    matching_offsets,
)
from susy.exceptions import SpecError
from susy.expressions import Expression, SamplingPolicy, VerdictKind
from susy.models import FamilySpec
from susy.presets import PresetId, make

POLICY = SamplingPolicy(intervals=((0.3, 2.1),), samples=64, seed=12345)


def custom(N, W, E="0"):
    return FamilySpec(N=N, W=Expression.parse(W), E=Expression.parse(E))


@pytest.mark.unit
class ChainConstantsTest(SimpleTestCase):
    def test_exponential_constants_are_exact(self):
        c1, c = chain_constants(make(PresetId.exponential(E0=1, C1=0, C2=1, C3=0), 3))
        self.assertEqual(c1, Expression.parse("1/2"))
        self.assertEqual(c, Expression.constant(1))

    def test_non_constant_value_is_read_at_reference(self):
        c1, c = chain_constants(make(PresetId.quadratic(C1=-0.1, C2=1, C3=0), 3), q_ref=1.0)
        self.assertAlmostEqual(complex(c1.evaluate(0.0)), 0.8)
        self.assertTrue(c.is_syntactic_zero)

    def test_matching_offsets(self):
        offsets = matching_offsets(3, 2, 1)
        self.assertEqual([o.tree for o in offsets], [0, 2, 3])
        self.assertEqual(len(matching_offsets(1, 5, 5)), 1)

    def test_chain_conditions_for_exponential(self):
        spec = make(PresetId.exponential(), 4)
        verdicts = check_chain_conditions(spec, *chain_constants(spec), policy=POLICY)
        self.assertEqual(len(verdicts), 3)
        self.assertTrue(all(v.passed for v in verdicts))

    def test_chain_conditions_fail_for_wrong_constant(self):
        spec = make(PresetId.exponential(), 3)
        verdicts = check_chain_conditions(spec, 0, 1, POLICY)
        self.assertEqual(verdicts[0].kind, VerdictKind.NON_ZERO)


@pytest.mark.unit
class GeneralizedConditionTest(SimpleTestCase):
    def test_linear_constant_without_offset(self):
        self.assertTrue(check_generalized_chain_condition(custom(3, "q"), "2*q + 3", POLICY).passed)

    def test_exponential_constant_with_unit_offset(self):
        self.assertTrue(check_generalized_chain_condition(custom(3, "q", "1"), "exp(q)", POLICY).passed)

    def test_quadratic_constant_fails(self):
        verdict = check_generalized_chain_condition(custom(3, "q"), "q^2", POLICY)
        self.assertEqual(verdict.kind, VerdictKind.NON_ZERO)


@pytest.mark.unit
class BuildChainTest(SimpleTestCase):
    def test_exponential_chain_closes(self):
        report = build_chain(make(PresetId.exponential(E0=1, C1=0, C2=1, C3=0), 3), policy=POLICY)
        self.assertEqual(len(report.steps), 3)
        self.assertEqual(len(report.mismatches), 2)
        self.assertTrue(report.consistent)
        self.assertTrue(all(step.residual.passed for step in report.steps))
        self.assertTrue(report.product_matches.passed)
        self.assertTrue(report.chain_residual.passed)
        self.assertTrue(report.end_to_end.passed)

    def test_quadratic_chain_mismatches_but_intertwines(self):
        report = build_chain(make(PresetId.quadratic(C1=-0.1, C2=1, C3=0), 3), policy=POLICY)
        self.assertFalse(report.consistent)
        self.assertTrue(any(v.kind == VerdictKind.NON_ZERO for v in report.mismatch_verdicts))
        self.assertTrue(all(step.residual.passed for step in report.steps))
        self.assertTrue(report.product_matches.passed)
        self.assertTrue(report.end_to_end.passed)

    def test_single_step(self):
        report = build_chain(custom(1, "q^3"), policy=POLICY)
        self.assertEqual(report.mismatches, ())
        self.assertTrue(report.consistent)
        self.assertTrue(report.end_to_end.passed)
        self.assertTrue(report.chain_residual.passed)

    def test_explicit_offsets(self):
        spec = make(PresetId.exponential(), 2)
        shifted = build_chain(spec, offsets=[0, 0.5], policy=POLICY)
        self.assertEqual(shifted.steps[1].offset, Expression.parse("1/2"))
        self.assertFalse(shifted.consistent)
        self.assertTrue(build_chain(spec, offsets=[0, 0], policy=POLICY).consistent)

    def test_offset_count_must_match_fold(self):
        with self.assertRaises(SpecError):
            build_chain(make(PresetId.exponential(), 3), offsets=[0, 1])
