"""
Точка входа prime-patterns: подкоманды - management-команды приложения.

parse_and_dispatch возвращает код выхода вместо sys.exit, поэтому его
удобно вызывать из тестов.
"""
import os
import sys
from importlib import import_module

import django

from .experiments import dumps

COMMANDS = (
    'sieve', 'multiset', 'gowers', 'beta', 'series', 'admissible', 'nu',
    'pattern', 'tuples', 'weyl', 'mung', 'polyforms', 'avgnorm', 'manifest',
)
PROG = 'prime-patterns'
EXIT_USAGE = 3


def usage():
    return f"usage: {PROG} <command> [options]\ncommands: {', '.join(COMMANDS)}"


def setup():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'main.settings')
    django.setup()


def parse_and_dispatch(argv, stdout=None, stderr=None):
    """Запуск подкоманды argv[0] с аргументами argv[1:]; возвращает код выхода."""
    setup()
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if argv and argv[0] in ('-h', '--help'):
        stdout.write(usage() + '\n')
        return 0
    if not argv or argv[0] not in COMMANDS:
        message = f"unknown command {argv[0]!r}" if argv else "no command given"
        error = {'error': 'usage', 'message': message, 'exit_code': EXIT_USAGE, 'usage': usage()}
        stderr.write(dumps(error) + '\n')
        return EXIT_USAGE
    module = import_module(f'patterns.management.commands.{argv[0]}')
    command = module.Command(stdout=stdout, stderr=stderr)
    try:
        return command.run_argv(PROG, argv[0], argv[1:])
    except SystemExit as exc:
        # --help печатает справку и завершает разбор
        return exc.code or 0


def main():
    sys.exit(parse_and_dispatch(sys.argv[1:]))
