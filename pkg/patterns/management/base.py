"""
Общая основа команд.

Каждая команда печатает один JSON-объект в stdout. Ошибки печатаются
JSON-объектом в stderr, коды выхода: 1 - нарушение предусловия,
2 - превышен лимит, 3 - ошибка использования.
"""
import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import yaml
from django.core.management.base import BaseCommand, CommandError, handle_default_options
from rest_framework import serializers

from ..api.serializers import EstimatorArgsSerializer, PatternFileSerializer, WTrickArgsSerializer
from ..arith import build_factor_table
from ..exceptions import PatternsError
from ..experiments import EstimateReport, dumps

logger = logging.getLogger(__name__)

EXIT_USAGE = 3


def int_list(text):
    """'1,2,3' -> [1, 2, 3]."""
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _flatten_errors(detail):
    if isinstance(detail, dict):
        return '; '.join(f"{key}: {_flatten_errors(value)}" for key, value in detail.items())
    if isinstance(detail, list):
        return '; '.join(_flatten_errors(item) for item in detail)
    return str(detail)


def read_document(path):
    """JSON или YAML с диска; ошибки чтения - ошибки использования."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}", returncode=EXIT_USAGE) from None
    try:
        if path.suffix in ('.yaml', '.yml'):
            return yaml.safe_load(text)
        return json.loads(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise CommandError(f"cannot parse {path}: {exc}", returncode=EXIT_USAGE) from None


def validated(serializer_class, data, **context):
    """Проверка сериализатором и сборка объекта через save()."""
    serializer = serializer_class(data=data, context=context)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


class ExperimentCommand(BaseCommand):
    """Команда с общими флагами оценивателя и JSON-выводом"""
    requires_system_checks = []
    uses_estimator = True
    default_samples = None
    default_mode = 'exact'
    exit_code = 0

    def add_arguments(self, parser):
        if self.uses_estimator:
            group = parser.add_argument_group('estimator')
            group.add_argument('--mode', default=self.default_mode, help="exact | mc")
            group.add_argument('--samples', type=int, default=self.default_samples)
            group.add_argument('--chunk-size', type=int, dest='chunk_size')
        parser.add_argument('--seed', type=int, help="RNG seed (default from settings)")
        parser.add_argument('--workers', type=int, help="worker threads (default: all cores)")
        parser.add_argument('--op-cap', type=int, dest='op_cap', help="exact-mode operation budget")
        parser.add_argument('--timing', action='store_true', help="include runtime_ms in the output")
        parser.add_argument('--trace', metavar='FILE', help="write a CSV trace")

    # --- разбор и коды выхода ---

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # ошибки разбора должны стать CommandError, а не SystemExit(2)
        parser.called_from_command_line = False
        return parser

    def run_argv(self, prog_name, subcommand, args):
        """Разбор аргументов и запуск; возвращает код выхода."""
        self._called_from_command_line = True
        parser = self.create_parser(prog_name, subcommand)
        try:
            options = parser.parse_args(args)
            handle_default_options(options)
            options = vars(options)
            positional = options.pop('args', ())
            self.execute(*positional, **options)
        except CommandError as exc:
            return self.report_error('usage', str(exc), EXIT_USAGE, parser.format_usage())
        except serializers.ValidationError as exc:
            return self.report_error('usage', _flatten_errors(exc.detail), EXIT_USAGE, parser.format_usage())
        except PatternsError as exc:
            return self.report_error(exc.kind, str(exc), exc.exit_code)
        return self.exit_code

    def run_from_argv(self, argv):
        code = self.run_argv(os.path.basename(argv[0]), argv[1], argv[2:])
        if code:
            sys.exit(code)

    def report_error(self, kind, message, exit_code, usage=None):
        error = {'error': kind, 'message': message, 'exit_code': exit_code}
        if usage:
            error['usage'] = usage.strip()
        self.stderr.write(dumps(error), style_func=lambda text: text)
        return exit_code

    # --- помощники для handle() ---

    def estimator_config(self, options):
        return validated(EstimatorArgsSerializer, {
            'mode': options.get('mode') or 'exact',
            'samples': options.get('samples'),
            'seed': options.get('seed'),
            'workers': options.get('workers'),
            'op_cap': options.get('op_cap'),
            'chunk_size': options.get('chunk_size'),
        })

    def wtrick_context(self, options):
        return validated(WTrickArgsSerializer, {
            'w': options['w'],
            'N': options['N'],
            'R': options.get('R'),
            'kappa': options.get('kappa'),
            'b': options.get('b') or 1,
        })

    def load_pattern(self, path, N=None, M=None):
        return validated(PatternFileSerializer, read_document(path), N=N, M=M)

    def factor_table(self, limit):
        logger.info("building factor table up to %d", limit)
        return build_factor_table(limit)

    def emit(self, result, options):
        """JSON для stdout: отчёт или словарь; runtime_ms только с --timing."""
        if isinstance(result, EstimateReport):
            data = result.as_dict(options.get('timing'))
        else:
            data = dict(result)
        return dumps(data)

    def write_trace(self, path, rows):
        if not path:
            return
        rows = list(rows)
        fields = []
        for row in rows:
            fields += [key for key in row if key not in fields]
        try:
            with open(path, 'w', newline='', encoding='utf-8') as stream:
                writer = csv.DictWriter(stream, fieldnames=fields)
                writer.writeheader()
                for row in rows:
                    writer.writerow({key: json.dumps(value) if isinstance(value, (list, dict)) else value
                                     for key, value in row.items()})
        except OSError as exc:
            raise CommandError(f"cannot write trace {path}: {exc.strerror}", returncode=EXIT_USAGE) from None
        logger.info("trace with %d rows written to %s", len(rows), path)
