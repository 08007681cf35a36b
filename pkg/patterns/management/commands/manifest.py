from ...experiments import dumps
from ...manifest import run_manifest
from ..base import ExperimentCommand, read_document


class Command(ExperimentCommand):
    help = "Прогон приёмочного манифеста; ненулевой код при любом провале"
    uses_estimator = False

    def add_arguments(self, parser):
        parser.add_argument('path', help="manifest file (JSON or YAML)")
        parser.add_argument('--csv', metavar='FILE', help="write per-run pass/fail CSV")
        super().add_arguments(parser)

    def handle(self, *args, **options):
        rows, self.exit_code = run_manifest(options['path'], read_document(options['path']), options['csv'])
        passed = sum(row.passed for row in rows)
        return dumps({
            'runs': len(rows),
            'passed': passed,
            'failed': len(rows) - passed,
            'rows': [row.as_dict(options['timing']) for row in rows],
        })
