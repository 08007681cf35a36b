"""
Приёмочный набор: последовательность запусков команд с ожидаемыми значениями.

Манифест - JSON или YAML вида {"runs": [...]} (или просто список
запусков). Структура проверяется JSON-схемой, каждая запись -
ManifestEntrySerializer. Запуски выполняются через call_command, вывод
разбирается как JSON и сравнивается по полю field.
"""
import csv
import io
import json
import logging
import math
from importlib import resources
from pathlib import Path

import attrs
import jsonschema
from django.core.management import call_command
from django.core.management.base import CommandError
from rest_framework import serializers

from .api.serializers import ManifestEntrySerializer
from .exceptions import PatternsError
from .experiments import stopwatch

logger = logging.getLogger(__name__)

CSV_FIELDS = ['name', 'command', 'check', 'field', 'actual', 'expected', 'reference',
              'tolerance', 'passed', 'message', 'runtime_ms']
FILE_SUFFIXES = ('.json', '.yaml', '.yml')


def manifest_schema():
    text = resources.files('patterns').joinpath('fixtures/manifest.schema.json').read_text(encoding='utf-8')
    return json.loads(text)


def normalise_document(document):
    """None, список или {"runs": [...]} -> список записей."""
    if document is None:
        return []
    if isinstance(document, list):
        document = {'runs': document}
    try:
        jsonschema.validate(document, manifest_schema())
    except jsonschema.ValidationError as exc:
        raise CommandError(f"invalid manifest: {exc.message}", returncode=3) from None
    return document['runs']


def to_argv(args, base_dir):
    """{"N": 1000, "stats": true, "form": ["1:0", "1:m"]} -> ['--N', '1000', '--stats', ...]."""
    argv = []
    for key, value in args.items():
        flag = '--' + key.replace('_', '-')
        values = value if isinstance(value, list) else [value]
        for item in values:
            if item is True:
                argv.append(flag)
            elif item is False or item is None:
                continue
            else:
                argv += [flag, _resolve(str(item), base_dir)]
    return argv


def _resolve(text, base_dir):
    if text.endswith(FILE_SUFFIXES) and not Path(text).is_absolute():
        candidate = base_dir / text
        if candidate.exists():
            return str(candidate)
    return text


def lookup(data, field):
    """Значение по пути через точки: 'diagnostics.mean'."""
    for part in field.split('.'):
        if isinstance(data, list):
            data = data[int(part)]
        elif isinstance(data, dict) and part in data:
            data = data[part]
        else:
            raise KeyError(field)
    return data


@attrs.define
class ManifestRow:
    """Строка отчёта по одному запуску"""
    name: str
    command: str
    check: str
    field: str
    actual: float | None = None
    expected: float | None = None
    reference: float | None = None
    tolerance: float = 0.0
    passed: bool = False
    message: str = ''
    runtime_ms: float = 0.0

    def as_dict(self, include_timing=False):
        data = attrs.asdict(self)
        if not include_timing:
            data.pop('runtime_ms')
        return data


class ManifestRunner:
    """Выполняет записи манифеста по очереди"""

    def __init__(self, path):
        self.path = Path(path)
        self.base_dir = self.path.parent

    def execute(self, command, args):
        """Запуск команды; возвращает (сырой stdout, разобранный JSON)."""
        buffer = io.StringIO()
        call_command(command, *to_argv(args, self.base_dir), stdout=buffer)
        raw = buffer.getvalue()
        return raw, json.loads(raw)

    def run(self, entries):
        rows = []
        for data in entries:
            serializer = ManifestEntrySerializer(data=data)
            serializer.is_valid(raise_exception=True)
            rows.append(self.run_entry(serializer.validated_data))
        return rows

    def run_entry(self, entry):
        row = ManifestRow(entry['name'], entry['command'], entry['check'], entry['field'],
                          expected=entry.get('expected'), tolerance=entry['tolerance'])
        with stopwatch() as timer:
            try:
                raw, output = self.execute(entry['command'], entry['args'])
                row.actual = float(lookup(output, entry['field']))
                reference = None
                if 'reference' in entry:
                    reference = self.run_reference(entry)
                    if reference[1] is not None:
                        row.reference = reference[1]
                row.passed, row.message = evaluate(entry, raw, output, row.actual, reference)
            except (PatternsError, CommandError, KeyError, ValueError, serializers.ValidationError) as exc:
                row.passed = False
                row.message = f"{type(exc).__name__}: {exc}"
        row.runtime_ms = timer['ms']
        logger.info("%s: %s", row.name, 'pass' if row.passed else f"FAIL {row.message}")
        return row

    def run_reference(self, entry):
        spec = entry['reference']
        command = spec.get('command', entry['command'])
        args = dict(spec.get('args', {})) if 'command' in spec else {**entry['args'], **spec.get('args', {})}
        raw, output = self.execute(command, args)
        field = spec.get('field', entry['field'])
        value = float(lookup(output, field)) if entry['check'] != 'identical_to_reference' else None
        return raw, value, float(output.get('stderr') or 0.0)


def _within(actual, target, tolerance, relative):
    allowed = tolerance * abs(target) if relative else tolerance
    return abs(actual - target) <= allowed


def evaluate(entry, raw, output, actual, reference):
    """(прошла ли проверка, пояснение)."""
    check = entry['check']
    expected = entry.get('expected')
    tolerance = entry['tolerance']
    if not math.isfinite(actual):
        return False, "non-finite value"
    if check == 'approx':
        passed = _within(actual, expected, tolerance, entry['relative'])
        return passed, f"|{actual:.6g} - {expected:.6g}| vs {tolerance:g}"
    if check == 'at_most':
        return actual <= expected + tolerance, f"{actual:.6g} <= {expected:.6g} + {tolerance:g}"
    if check == 'at_least':
        return actual >= expected - tolerance, f"{actual:.6g} >= {expected:.6g} - {tolerance:g}"
    ref_raw, ref_value, ref_stderr = reference
    if check == 'identical_to_reference':
        return raw == ref_raw, "outputs identical" if raw == ref_raw else "outputs differ"
    if check == 'not_below_reference':
        spread = math.hypot(float(output.get('stderr') or 0.0), ref_stderr)
        return actual >= ref_value - tolerance * spread, \
            f"{actual:.6g} >= {ref_value:.6g} - {tolerance:g}*{spread:.3g}"
    if check == 'nearer_than_reference':
        passed = abs(actual - expected) <= abs(ref_value - expected) + tolerance
        return passed, f"|{actual:.6g} - {expected:.6g}| <= |{ref_value:.6g} - {expected:.6g}|"
    if check == 'matches_reference':
        return abs(actual - ref_value) <= tolerance, f"|{actual:.6g} - {ref_value:.6g}| vs {tolerance:g}"
    if check == 'ratio_to_reference':
        if ref_value == 0:
            return False, "reference value is zero"
        return abs(actual / ref_value - 1) <= tolerance, f"ratio {actual / ref_value:.6g}"
    raise ValueError(f"unknown check {check!r}")


def write_csv(rows, path):
    with open(path, 'w', newline='', encoding='utf-8') as stream:
        writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.as_dict(include_timing=True))


def run_manifest(path, document, csv_path=None):
    """Прогон манифеста; возвращает (строки, код выхода)."""
    entries = normalise_document(document)
    rows = ManifestRunner(path).run(entries)
    if csv_path:
        write_csv(rows, csv_path)
    failed = sum(not row.passed for row in rows)
    return rows, 1 if failed else 0
