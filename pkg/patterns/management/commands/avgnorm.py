from ...api.serializers import PolynomialListSerializer
from ...experiments import avg_gowers_of_w_tricked
from ..base import ExperimentCommand, validated


class Command(ExperimentCommand):
    help = "Усреднённая локальная норма Гауэрса функции Λ'_{b,W} - 1"
    default_mode = 'mc'
    default_samples = 4096

    def add_arguments(self, parser):
        parser.add_argument('--w', type=int, required=True)
        parser.add_argument('--N', type=int, required=True)
        parser.add_argument('--R', type=int)
        parser.add_argument('--kappa', type=float)
        parser.add_argument('--b', type=int, default=1)
        parser.add_argument('--M', type=int, required=True)
        parser.add_argument('--poly', action='append', required=True, help="side polynomial P_j(h); repeat")
        parser.add_argument('--h-samples', type=int, dest='h_samples', help="number of sampled h")
        super().add_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.estimator_config(options)
        ctx = self.wtrick_context(options)
        polys = validated(PolynomialListSerializer, {'polys': options['poly']})
        table = self.factor_table(ctx.sieve_limit)
        report = avg_gowers_of_w_tricked(ctx, table, polys, options['M'], len(polys), cfg,
                                         h_samples=options['h_samples'])
        self.write_trace(options['trace'], report.trace)
        return self.emit(report, options)
