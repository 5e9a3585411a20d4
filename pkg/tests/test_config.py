# tests/test_config.py
import math

import pytest
from django.test import SimpleTestCase

from susy.config import parse_config
from susy.exceptions import ConfigError, ExpressionSyntaxError, PresetError
from susy.expressions import VerdictKind, Witness, ZeroVerdict
from susy.reports import build_report, check_failed, clean, dumps, format_summary, numeric_check, verdict_check


@pytest.mark.unit
class RunConfigTest(SimpleTestCase):
    def test_extra_family_keys_become_parameters(self):
        config = parse_config({'family': {'preset': 'cubic', 'nu': -2, 'params': {'C2': 1}}})
        self.assertEqual(config.family.params, {'nu': -2, 'C2': 1})
        self.assertEqual(config.spec(1).label, "cubic(nu=-2)")

    def test_fold_range(self):
        config = parse_config({'family': {'W': 'q'}, 'fold': {'N_min': 2, 'N_max': 4}})
        self.assertEqual(config.fold.folds, [2, 3, 4])
        self.assertEqual(parse_config({'family': {'W': 'q'}}).fold.folds, [1])

    def test_empty_fold_range(self):
        with self.assertRaises(ConfigError):
            parse_config({'family': {'W': 'q'}, 'fold': {'N_min': 3, 'N_max': 2}})

    def test_preset_and_custom_are_exclusive(self):
        with self.assertRaises(ConfigError):
            parse_config({'family': {'preset': 'quadratic', 'W': 'q'}})
        with self.assertRaises(ConfigError):
            parse_config({'family': {}})

    def test_negative_tolerance(self):
        with self.assertRaises(ConfigError):
            parse_config({'family': {'W': 'q'}, 'verify': {'tol': -1.0}})

    def test_expression_errors_are_not_wrapped(self):
        with self.assertRaises(ExpressionSyntaxError):
            parse_config({'family': {'W': 'q+*2'}})
        with self.assertRaises(PresetError):
            parse_config({'family': {'preset': 'cubic', 'nu': 3}})

    def test_verify_poles_and_domain_reach_the_spec(self):
        config = parse_config({
            'family': {'W': 'q + 1/q', 'E': '0'},
            'verify': {'poles': [0.0], 'domain': [0.5, 3.0], 'samples': 32, 'seed': 9},
        })
        spec = config.spec(2)
        self.assertEqual(spec.poles, (0.0,))
        policy = spec.policy(config.verify.policy())
        self.assertEqual(policy.intervals, ((0.5, 3.0),))
        self.assertEqual((policy.samples, policy.seed), (32, 9))

    def test_spectral_box_falls_back_to_window(self):
        config = parse_config({'family': {'preset': 'periodic', 'g': 0.5}, 'spectral': {'n': 64}})
        problem = config.spectral.problem(config.spec(1))
        self.assertAlmostEqual(problem.a, -2 * math.pi)
        self.assertEqual(problem.n, 64)

    def test_overrides(self):
        config = parse_config({'family': {'W': 'q'}}).with_overrides(seed=3, out='x.json')
        self.assertEqual(config.verify.seed, 3)
        self.assertEqual(config.output.path, 'x.json')


@pytest.mark.unit
class ReportTest(SimpleTestCase):
    def test_clean_values(self):
        self.assertEqual(clean({'a': 1 + 2j, 'b': float('inf'), 'c': (1.5, 3 + 0j)}),
                         {'a': [1.0, 2.0], 'b': None, 'c': [1.5, 3.0]})

    def test_verdict_check_carries_witness(self):
        verdict = ZeroVerdict(VerdictKind.NON_ZERO, 2.0, Witness(1.2, 1.728 + 0j), 64)
        check = verdict_check('intertwining', "A H- - H+ A = 0", verdict)
        self.assertEqual(check['witness'], {'q': 1.2, 'value': [1.728, 0.0]})
        self.assertEqual(check['params']['samples'], 64)
        self.assertTrue(check_failed(check))

    def test_not_applicable_and_optional_checks_never_fail(self):
        self.assertFalse(check_failed(verdict_check('e_condition', "", None)))
        self.assertFalse(check_failed(numeric_check('kernel_normalizable', "", False, 3.0, required=False)))

    def test_fold_errors_fail_the_report(self):
        report = build_report(['check'], {}, [{'N': 1, 'checks': [], 'tables': {}, 'error': 'bad'}])
        self.assertFalse(report['passed'])
        self.assertIn('N=1: bad', format_summary(report))

    def test_dumps_is_sorted_and_headerless_on_request(self):
        report = build_report(['check'], {'b': 1, 'a': 2}, [{'N': 1, 'checks': [], 'tables': {}}])
        text = dumps(report, include_header=False)
        self.assertNotIn('header', text)
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertTrue(report['passed'])
