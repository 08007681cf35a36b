#!/usr/bin/env python
"""Командная строка проекта: python manage.py <sieve|gowers|beta|...> [флаги]."""
import os
import sys


def main():
    """Запуск management-команд; тесты - python manage.py test patterns."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'main.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the project with `pip install -e .` "
            "or `pip install -r r.txt` first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
