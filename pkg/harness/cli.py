"""``cli_main``: the laboratory subcommands with a fixed exit-code contract.

0 on success, 1 when a verification fails and 2 on usage errors.
"""
import os
import sys

SUBCOMMANDS = ('graph', 'mix', 'snake', 'verify', 'solve', 'adversary', 'sweep', 'selftest')

USAGE = ("usage: snakelab {" + ','.join(SUBCOMMANDS) + "} [options]\n"
         "Run 'snakelab <subcommand> --help' for the options of a subcommand.\n")


def cli_main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        sys.stderr.write(USAGE)
        return 2
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'snakelab.settings')
    from django.core.management import execute_from_command_line
    try:
        execute_from_command_line(['snakelab', *argv])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


if __name__ == '__main__':
    sys.exit(cli_main())
