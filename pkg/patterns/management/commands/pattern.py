from ...experiments import WEIGHTS, pattern_average
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "E_n E_m Π Λ'(n + P_i(m)) точно или по выборке"

    def add_arguments(self, parser):
        parser.add_argument('--pattern', required=True, metavar='FILE')
        parser.add_argument('--N', type=int, required=True)
        parser.add_argument('--M', type=int, required=True)
        parser.add_argument('--weight', choices=WEIGHTS, default='mangoldt_prime')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.estimator_config(options)
        spec = self.load_pattern(options['pattern'], N=options['N'], M=options['M'])
        table = self.factor_table(max(spec.argument_bound(spec.N, spec.M), 2))
        report = pattern_average(spec, table, cfg, weight=options['weight'])
        self.write_trace(options['trace'], report.trace)
        return self.emit(report, options)
