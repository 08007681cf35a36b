from ...experiments import find_prime_tuples
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Первые кортежи (n, m), для которых все n + P_i(m) простые"
    uses_estimator = False

    def add_arguments(self, parser):
        parser.add_argument('--pattern', required=True, metavar='FILE')
        parser.add_argument('--N', type=int, required=True)
        parser.add_argument('--M', type=int, default=1)
        parser.add_argument('--count', type=int, default=10)
        super().add_arguments(parser)

    def handle(self, *args, **options):
        spec = self.load_pattern(options['pattern'], N=options['N'], M=options['M'])
        table = self.factor_table(max(spec.argument_bound(spec.N, spec.M), 2))
        found = find_prime_tuples(spec, table, options['count'], options['op_cap'])
        tuples = [{'n': n, 'm': list(m), 'values': [n + p.evaluate(m) for p in spec.polys]}
                  for n, m in found]
        self.write_trace(options['trace'], tuples)
        result = {
            'value': len(tuples),
            'tuples': tuples,
            'config': {**spec.echo(), 'N': spec.N, 'M': spec.M, 'count': options['count']},
        }
        return self.emit(result, options)
