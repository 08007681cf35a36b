import numpy as np

from ...wtrick import CUTOFFS, nu_b, nu_b_direct, nu_diagnostics
from ..base import ExperimentCommand

ORACLE_LIMIT = 10**4


class Command(ExperimentCommand):
    help = "Мажоранта ν: среднее, поточечная оценка, сверка с прямым вычислением"
    uses_estimator = False

    def add_arguments(self, parser):
        parser.add_argument('--w', type=int, required=True)
        parser.add_argument('--N', type=int, required=True)
        parser.add_argument('--R', type=int)
        parser.add_argument('--kappa', type=float, help="R = ceil(N^kappa)")
        parser.add_argument('--b', type=int, default=1)
        parser.add_argument('--check', choices=('mean', 'pointwise', 'oracle'), default='mean')
        parser.add_argument('--cutoff', choices=sorted(CUTOFFS), default='cosine')
        parser.add_argument('--oracle-upto', type=int, dest='oracle_upto', default=ORACLE_LIMIT)
        super().add_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.estimator_config(options)
        ctx = self.wtrick_context(options)
        table = self.factor_table(ctx.sieve_limit)
        config = {**ctx.echo(), 'check': options['check'], 'cutoff': options['cutoff']}
        if options['check'] == 'oracle':
            upto = min(options['oracle_upto'], ctx.N - 1) if ctx.N > 1 else 0
            inverted = nu_b(ctx, table, options['cutoff'], cfg.workers).values[1:upto + 1]
            direct = nu_b_direct(ctx, table, upto, options['cutoff'])[1:]
            difference = float(np.max(np.abs(inverted - direct))) if upto else 0.0
            config['oracle_upto'] = upto
            result = {'value': difference, 'identical': bool(np.array_equal(inverted, direct)),
                      'checked': upto}
        else:
            diagnostics = nu_diagnostics(ctx, table, options['cutoff'], cfg.workers)
            result = diagnostics.as_dict()
            if options['check'] == 'mean':
                result['value'] = diagnostics.mean
                result['deviation'] = abs(diagnostics.mean - 1)
            else:
                result['value'] = diagnostics.violations
        result['config'] = config
        return self.emit(result, options)
