# tests/test_expressions.py
import cmath
import math

import numpy as np
import pytest
import sympy
from django.test import SimpleTestCase

from susy.exceptions import (
    ExpressionError,
    ExpressionSyntaxError,
    PoleError,
    SamplingDomainError,
    UnboundParameterError,
    UnknownFunctionError,
)
from susy.expressions import (
    Expression,
    SamplingPolicy,
    VerdictKind,
    canonicalize_rational,
    differentiate,
    evaluate,
    is_zero,
    parse,
    print_expression,
)
from susy.models import FamilySpec
from susy.parsing import Q, symbol


@pytest.mark.unit
class ParseTest(SimpleTestCase):
    def test_power_plus_evaluates(self):
        self.assertEqual(evaluate(parse("q^2 + 1"), 2.0), 5)

    def test_parameters_are_collected(self):
        expression = parse("C1*exp(E0*q)")
        self.assertEqual(expression.parameters, frozenset({'C1', 'E0'}))

    def test_malformed_input_reports_offset(self):
        with self.assertRaises(ExpressionSyntaxError) as ctx:
            parse("q+*2")
        self.assertEqual(ctx.exception.offset, 2)

    def test_unknown_function(self):
        with self.assertRaises(UnknownFunctionError) as ctx:
            parse("q + tanh(q)")
        self.assertEqual(ctx.exception.name, 'tanh')
        self.assertEqual(ctx.exception.offset, 4)

    def test_power_binds_tighter_than_unary_minus(self):
        self.assertEqual(evaluate(parse("-q^2"), 2.0), -4)

    def test_power_is_right_associative(self):
        self.assertEqual(evaluate(parse("2^3^2"), 0.0), 512)

    def test_non_integer_exponent_rejected(self):
        with self.assertRaises(ExpressionSyntaxError):
            parse("q^0.5")

    def test_imaginary_literal(self):
        self.assertEqual(parse("2i").tree, 2 * sympy.I)

    def test_decimals_are_exact(self):
        self.assertEqual(parse("0.1").tree, sympy.Rational(1, 10))

    def test_round_trip_through_printer(self):
        bindings = {'C1': 0.7, 'E0': -1.3}
        sources = [
            "C1*exp(E0*q) - 3/q^2 + sin(q)^2",
            "(q - 1)^3/(q + 2) + 1i*cos(2*q)",
            "-q^2 + log(q) + 0.25*q",
            "exp(log(q)/2)",
            "log(-2)*q + C1*exp(-log(q)/3)",
            "sin(1i*q) + cos(2i*q)",
        ]
        points = np.random.default_rng(7).uniform(0.3, 2.1, 32)
        for source in sources:
            expression = parse(source)
            again = parse(print_expression(expression))
            for point in points:
                first = evaluate(expression, point, bindings)
                second = evaluate(again, point, bindings)
                self.assertLessEqual(abs(first - second), 1e-12 * (1 + abs(first)))

    def test_rewritten_nodes_print_in_grammar(self):
        self.assertEqual(print_expression(parse("exp(log(q)/2)")), "exp((1/2)*log(q))")
        self.assertNotIn('pi', print_expression(parse("log(-2)")))

    def test_undefined_values_rejected(self):
        with self.assertRaises(ExpressionSyntaxError) as ctx:
            parse("q + log(0)")
        self.assertEqual(ctx.exception.offset, 4)

    def test_unprintable_tree(self):
        with self.assertRaises(ExpressionError):
            print_expression(Expression(sympy.conjugate(symbol('C1'))))

    def test_family_with_rewritten_prepotential_describes(self):
        spec = FamilySpec(N=2, W=parse("exp(log(q)/2) + log(-2)"), E=parse("0"))
        described = spec.describe()
        self.assertIsInstance(parse(described['W']), Expression)


@pytest.mark.unit
class DifferentiateTest(SimpleTestCase):
    def test_monomial(self):
        self.assertEqual(differentiate(parse("q^2")).tree, 2 * Q)

    def test_exponential_with_parameter(self):
        E0 = symbol('E0')
        self.assertEqual(differentiate(parse("exp(E0*q)")).tree, E0 * sympy.exp(E0 * Q))

    def test_reciprocal(self):
        self.assertEqual(differentiate(parse("1/q")).tree, -1 / Q ** 2)

    def test_linearity_and_product_rule(self):
        first, second = parse("sin(q)*q^2"), parse("exp(-q)/q")
        points = np.random.default_rng(3).uniform(0.3, 2.1, 16)
        linear = differentiate(3 * first + second.tree)
        product = differentiate(first * second.tree)
        expected = differentiate(first) * second.tree + first * differentiate(second).tree
        for point in points:
            self.assertAlmostEqual(
                evaluate(linear, point),
                3 * evaluate(differentiate(first), point) + evaluate(differentiate(second), point),
                places=10,
            )
            value = evaluate(product, point)
            self.assertLessEqual(abs(value - evaluate(expected, point)), 1e-10 * (1 + abs(value)))


@pytest.mark.unit
class EvaluateTest(SimpleTestCase):
    def test_pole_names_subexpression(self):
        with self.assertRaises(PoleError) as ctx:
            evaluate(parse("q + 1/q"), 0.0)
        self.assertEqual(ctx.exception.subexpression, "1/q")

    def test_unbound_parameter(self):
        with self.assertRaises(UnboundParameterError) as ctx:
            evaluate(parse("C1*q"), 1.0)
        self.assertEqual(ctx.exception.names, ('C1',))

    def test_euler_identity(self):
        value = evaluate(parse("exp(c*q)"), math.pi, {'c': 1j})
        self.assertLess(abs(value + 1), 1e-12)

    def test_vectorized_matches_pointwise(self):
        expression = parse("C1*q^3 + cos(q)")
        points = np.linspace(0.3, 2.1, 9)
        values = expression.evaluate_array(points, {'C1': 2})
        for point, value in zip(points, values):
            self.assertAlmostEqual(value, evaluate(expression, point, {'C1': 2}), places=12)

    def test_string_binding_values(self):
        self.assertEqual(evaluate(parse("g*q"), 2.0, {'g': "1i"}), 2j)


@pytest.mark.unit
class CanonicalizeTest(SimpleTestCase):
    def test_rational_identity_is_zero(self):
        form = canonicalize_rational(parse("(q^2 - 1)/(q - 1) - (q + 1)"))
        self.assertIsNotNone(form)
        self.assertTrue(form.is_zero)

    def test_exponential_is_not_rational(self):
        self.assertIsNone(canonicalize_rational(parse("exp(q)")))

    def test_denominator_is_monic(self):
        form = canonicalize_rational(parse("1/(2*q + 4)"))
        self.assertEqual(form.denominator.LC(), 1)

    def test_e_condition_with_reciprocal(self):
        E = parse("1/q")
        condition = (E.derivative(3) + E * E.derivative(2).tree
                     + 2 * E.derivative().tree ** 2 - 2 * E.tree ** 2 * E.derivative().tree)
        self.assertTrue(canonicalize_rational(condition).is_zero)


@pytest.mark.unit
class IsZeroTest(SimpleTestCase):
    def setUp(self):
        self.policy = SamplingPolicy(intervals=((0.3, 2.1),), samples=64, seed=12345)

    def test_polynomial_identity_is_proven(self):
        verdict = is_zero(parse("(q + 1)^2 - q^2 - 2*q - 1"), self.policy)
        self.assertEqual(verdict.kind, VerdictKind.PROVEN_ZERO)

    def test_pythagorean_identity_is_numerical(self):
        verdict = is_zero(parse("sin(q)^2 + cos(q)^2 - 1"), self.policy)
        self.assertEqual(verdict.kind, VerdictKind.NUMERICALLY_ZERO)
        self.assertEqual(verdict.samples_used, 64)
        self.assertLess(verdict.max_residual, 1e-12)

    def test_cube_is_non_zero_with_witness(self):
        verdict = is_zero(parse("q^3"), self.policy)
        self.assertEqual(verdict.kind, VerdictKind.NON_ZERO)
        self.assertIsNotNone(verdict.witness)
        self.assertAlmostEqual(verdict.witness.value, verdict.witness.point ** 3)
        self.assertTrue(0.3 <= verdict.witness.point <= 2.1)

    def test_bindings_are_substituted(self):
        verdict = is_zero(parse("a*q - q"), self.policy, {'a': 1})
        self.assertEqual(verdict.kind, VerdictKind.PROVEN_ZERO)

    def test_same_seed_same_verdict(self):
        first = is_zero(parse("exp(q) - 1"), self.policy)
        second = is_zero(parse("exp(q) - 1"), self.policy)
        self.assertEqual(first, second)

    def test_rational_zero_is_also_numerically_zero(self):
        expression = parse("(q^2 - 1)/(q - 1) - (q + 1) + 0*sin(q)")
        self.assertTrue(is_zero(expression, self.policy).passed)
        self.assertTrue(cmath.isclose(evaluate(expression, 1.5), 0, abs_tol=1e-12))

    def test_all_points_on_poles(self):
        policy = SamplingPolicy(intervals=((0.0, 1e-3),), poles=(0.0,), pole_margin=1.0)
        with self.assertRaises(SamplingDomainError):
            is_zero(parse("exp(q) - 1"), policy)

    def test_samples_avoid_declared_poles(self):
        policy = SamplingPolicy(intervals=((-1.0, 1.0),), poles=(0.0,), pole_margin=0.05)
        points = policy.sample_points()
        self.assertEqual(points.size, policy.samples)
        self.assertTrue(np.all(np.abs(points) > 0.05))
