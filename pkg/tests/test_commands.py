# tests/test_commands.py
import json
import os
import tempfile
import textwrap
from io import StringIO
from unittest.mock import patch

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from susy.config import load_config
from susy.reports import build_report, dumps
from susy.tasks import run_folds

QUADRATIC = """
    [family]
    preset = "quadratic"
    C1 = -0.1
    C2 = 1
    C3 = 0

    [fold]
    N_min = 1
    N_max = 4
"""

CUBIC_NEGATIVE = """
    [family]
    W = "q^3"
    E = "0"

    [fold]
    N = 2
"""


class ConfigFilesMixin:
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write_config(self, text, name='run.toml'):
        path = os.path.join(self.tmp.name, name)
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(textwrap.dedent(text))
        return path

    def out_path(self, name='report.json'):
        return os.path.join(self.tmp.name, name)

    def run_verify(self, *commands, **options):
        stdout = StringIO()
        call_command('verify', *commands, stdout=stdout, summary=False, **options)
        return stdout.getvalue()


@pytest.mark.integration
class VerifyCommandTest(ConfigFilesMixin, SimpleTestCase):
    def test_quadratic_family_passes(self):
        out = self.out_path()
        output = self.run_verify('check', 'intertwine', 'mother',
                                 config=self.write_config(QUADRATIC), out=out)
        self.assertIn('✅ All checks passed', output)

        with open(out, encoding='utf-8') as handle:
            report = json.load(handle)
        self.assertTrue(report['passed'])
        self.assertEqual([fold['N'] for fold in report['folds']], [1, 2, 3, 4])
        self.assertEqual(report['run']['commands'], ['check', 'intertwine', 'mother'])
        first = {check['name']: check for check in report['folds'][0]['checks']}
        self.assertEqual(first['e_condition']['verdict'], 'not_applicable')
        self.assertEqual(first['w_condition']['verdict'], 'not_applicable')
        self.assertIn('recursion_step_condition', first)
        self.assertFalse(first['recursion_step_condition']['required'])

    def test_fractional_powers_in_prepotential(self):
        path = self.write_config("""
            [family]
            W = "exp(log(q)/2)"
            E = "0"

            [fold]
            N = 1
        """)
        out = self.out_path()
        output = self.run_verify('intertwine', config=path, out=out)
        self.assertIn('✅ All checks passed', output)
        with open(out, encoding='utf-8') as handle:
            report = json.load(handle)
        self.assertNotIn('error', report['folds'][0])

    def test_negative_control_reports_witness(self):
        out = self.out_path()
        with self.assertRaises(CommandError) as ctx:
            self.run_verify('intertwine', config=self.write_config(CUBIC_NEGATIVE), out=out)
        self.assertEqual(ctx.exception.returncode, 1)

        with open(out, encoding='utf-8') as handle:
            report = json.load(handle)
        self.assertFalse(report['passed'])
        check = next(c for c in report['folds'][0]['checks'] if c['name'] == 'intertwining')
        self.assertEqual(check['verdict'], 'non_zero')
        self.assertIn('witness', check)
        self.assertTrue(0.3 <= check['witness']['q'] <= 2.1)

    def test_malformed_expression(self):
        path = self.write_config("""
            [family]
            W = "q+*2"
        """)
        with self.assertRaises(CommandError) as ctx:
            self.run_verify('check', config=path)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('offset 2', str(ctx.exception))

    def test_unknown_command(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_verify('prove', config=self.write_config(QUADRATIC))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_config_file(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_verify('check', config=self.out_path('absent.toml'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_fold_error_exits_with_configuration_code(self):
        path = self.write_config("""
            [family]
            W = "q"

            [fold]
            N = 1

            [spectral]
            a = -1.0
            b = 1.0
            n = 16
            levels = 20
        """)
        with self.assertRaises(CommandError) as ctx:
            self.run_verify('spectrum', config=path)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('DiscretizationError', str(ctx.exception))

    def test_seed_override_is_recorded(self):
        out = self.out_path()
        self.run_verify('intertwine', config=self.write_config(QUADRATIC), out=out, seed=7)
        with open(out, encoding='utf-8') as handle:
            report = json.load(handle)
        self.assertEqual(report['run']['verify']['seed'], 7)

    def test_unexpected_errors_are_tracked(self):
        with patch('susy.management.commands.verify.run_folds', side_effect=RuntimeError('boom')), \
                patch('susy.management.commands.verify.ErrorTracker.track_error') as track:
            with self.assertRaises(CommandError) as ctx:
                self.run_verify('check', config=self.write_config(QUADRATIC))
        self.assertEqual(ctx.exception.returncode, 1)
        track.assert_called_once()


@pytest.mark.integration
class DeterminismTest(ConfigFilesMixin, SimpleTestCase):
    def test_reports_match_apart_from_header(self):
        config = load_config(self.write_config(QUADRATIC))
        commands = ['check', 'intertwine']
        run = {'family': config.family.model_dump(exclude_none=True)}
        first = build_report(commands, run, run_folds(config, commands))
        second = build_report(commands, run, run_folds(config, commands))
        self.assertEqual(dumps(first, include_header=False), dumps(second, include_header=False))
        self.assertNotIn('generated_at', dumps(first, include_header=False))

    @pytest.mark.slow
    def test_process_pool_matches_sequential(self):
        config = load_config(self.write_config(QUADRATIC))
        sequential = run_folds(config, ['intertwine'], jobs=1)
        parallel = run_folds(config, ['intertwine'], jobs=2)
        self.assertEqual(json.dumps(sequential, sort_keys=True, default=str),
                         json.dumps(parallel, sort_keys=True, default=str))


@pytest.mark.integration
class ListPresetsCommandTest(SimpleTestCase):
    def test_lists_families(self):
        stdout = StringIO()
        call_command('list_presets', stdout=stdout)
        output = stdout.getvalue()
        for name in ('quadratic', 'quartic_breaking', 'exponential', 'periodic', 'cubic'):
            self.assertIn(name, output)
