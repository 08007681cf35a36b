from ...wtrick import singular_series
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Усечённый особый ряд ∏_{p <= pmax} β_p"
    uses_estimator = False

    def add_arguments(self, parser):
        parser.add_argument('--pattern', required=True, metavar='FILE')
        parser.add_argument('--pmax', type=int, required=True)
        super().add_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.estimator_config(options)
        spec = self.load_pattern(options['pattern'])
        series = singular_series(spec, options['pmax'], options['op_cap'], cfg.workers)
        self.write_trace(options['trace'], series.trace_rows())
        result = {**series.as_dict(), 'value': series.product, 'config': spec.echo()}
        return self.emit(result, options)
