#!/usr/bin/env python
"""Entry point for the snakelab management commands and the test runner.

``python manage.py sweep --family torus2 --sizes 10:40:10`` runs a lab
subcommand; ``python -m harness.cli`` does the same with the fixed
exit-code contract and a usage message for unknown subcommands.
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'snakelab.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "snakelab needs Django, numpy and pandas; install requirements.txt "
            "into the active environment first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
