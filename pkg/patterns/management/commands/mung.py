import numpy as np

from ...experiments import mung_tv_average, random_polynomials
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Средний inf_q d_TV(Q(h), Q(h) + q·Q_0) по случайным h"
    default_samples = 64
    default_mode = 'mc'

    def add_arguments(self, parser):
        parser.add_argument('--d', type=int, required=True)
        parser.add_argument('--r', type=int, default=1)
        parser.add_argument('--k', type=int, required=True)
        parser.add_argument('--A', type=int, required=True)
        parser.add_argument('--M', type=int, required=True)
        parser.add_argument('--pattern', metavar='FILE', help="k polynomials of degree d-1 in r variables")
        parser.add_argument('--poly-seed', type=int, dest='poly_seed',
                            help="seed for random coefficient polynomials (default: --seed)")
        parser.add_argument('--q-max', type=int, dest='q_max', help="default: A")
        super().add_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.estimator_config(options)
        if options['pattern']:
            polys = self.load_pattern(options['pattern']).polys
        else:
            seed = cfg.rng_seed if options['poly_seed'] is None else options['poly_seed']
            polys = random_polynomials(options['d'] - 1, options['r'], options['k'], options['A'],
                                       np.random.default_rng(seed))
        q_max = options['q_max'] or options['A']
        report = mung_tv_average(options['d'], options['r'], options['k'], options['A'], options['M'],
                                 polys, q_max, cfg)
        if options['poly_seed'] is not None:
            report.config['poly_seed'] = options['poly_seed']
        self.write_trace(options['trace'], report.trace)
        return self.emit(report, options)
