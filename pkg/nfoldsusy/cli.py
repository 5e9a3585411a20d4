"""
Console entry point: ``nfoldsusy <command...> --config path [--out path] [--seed n]``.

``nfoldsusy list-presets`` prints the preset catalogue; everything else is handed to
the ``verify`` management command, which exits with its own return code.
"""
import os
import sys


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "nfoldsusy.settings.dev")

    import django
    from django.core.management import call_command, load_command_class

    django.setup()

    if argv and argv[0] in ('list-presets', 'list_presets'):
        call_command('list_presets')
        return 0

    command = load_command_class('susy', 'verify')
    command.run_from_argv(['nfoldsusy', 'verify', *argv])
    return 0


if __name__ == '__main__':
    sys.exit(main())
