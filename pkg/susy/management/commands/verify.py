"""
Management command running type A verifications from a TOML config.

Exit codes: 0 when every required check passes, 1 on a verification failure,
2 on configuration or expression errors.
"""
import argparse
import logging

from django.core.management.base import BaseCommand, CommandError

from susy.analytics import ErrorTracker
from susy.conf import setting
from susy.config import load_config
from susy.exceptions import NFoldSusyError
from susy.reports import build_report, format_summary, write_report
from susy.tasks import COMMANDS, run_folds

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Verify type A N-fold supersymmetry for a family: ' + ', '.join(COMMANDS)

    def add_arguments(self, parser):
        parser.add_argument(
            'commands',
            nargs='+',
            metavar='command',
            help=f"Checks to run, any of: {', '.join(COMMANDS)}"
        )
        parser.add_argument(
            '--config',
            required=True,
            help='Path to the TOML run configuration'
        )
        parser.add_argument(
            '--out',
            help='Write the JSON report to this path (overrides output.path)'
        )
        parser.add_argument(
            '--seed',
            type=int,
            help='Sampling seed (overrides verify.seed)'
        )
        parser.add_argument(
            '--jobs',
            type=int,
            default=None,
            help='Worker processes for the folds (default FOLD_JOBS)'
        )
        parser.add_argument(
            '--log-level',
            choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
            help='Log level for the susy loggers'
        )
        parser.add_argument(
            '--summary',
            action=argparse.BooleanOptionalAction,
            default=True,
            help='Print the summary table to stdout'
        )

    def handle(self, *args, **options):
        if options['log_level']:
            for name in ('susy', 'nfoldsusy'):
                logging.getLogger(name).setLevel(options['log_level'])

        commands = list(dict.fromkeys(options['commands']))
        unknown = [command for command in commands if command not in COMMANDS]
        if unknown:
            raise CommandError(
                f"Unknown command(s): {', '.join(unknown)}; choose from {', '.join(COMMANDS)}",
                returncode=2,
            )

        try:
            config = load_config(options['config']).with_overrides(options['seed'], options['out'])
        except NFoldSusyError as e:
            raise CommandError(f"Invalid configuration: {e}", returncode=2)

        jobs = options['jobs'] if options['jobs'] is not None else setting('FOLD_JOBS')
        self.stdout.write(self.style.SUCCESS(
            f"🔍 Running {', '.join(commands)} for folds {config.fold.folds}..."
        ))

        try:
            folds = run_folds(config, commands, jobs)
        except Exception as e:
            ErrorTracker.track_error(e, {'config': options['config'], 'commands': commands})
            raise CommandError(f"Run failed: {e}", returncode=1)

        run = {
            'family': config.family.model_dump(exclude_none=True),
            'verify': config.verify.model_dump(),
            'spectral': config.spectral.model_dump(),
        }
        report = build_report(commands, run, folds)

        if config.output.path:
            write_report(report, config.output.path)
            self.stdout.write(f"📄 Report written to {config.output.path}")

        if options['summary']:
            self.stdout.write(format_summary(report))

        errors = [fold for fold in folds if fold.get('error')]
        if errors:
            first = errors[0]
            raise CommandError(f"N={first['N']}: {first['error_type']}: {first['error']}", returncode=2)
        if not report['passed']:
            raise CommandError("❌ Verification failed", returncode=1)
        self.stdout.write(self.style.SUCCESS('✅ All checks passed'))
