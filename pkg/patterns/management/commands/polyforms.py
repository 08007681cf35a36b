from django.core.management.base import CommandError

from ...api.serializers import PolynomialListSerializer
from ...experiments import polyforms_check
from ..base import EXIT_USAGE, ExperimentCommand, validated


class Command(ExperimentCommand):
    help = "Условие полиномиальных форм: E Π ν_{b_i}(x + P_i(m))"

    def add_arguments(self, parser):
        parser.add_argument('--w', type=int, required=True)
        parser.add_argument('--N', type=int, required=True)
        parser.add_argument('--R', type=int)
        parser.add_argument('--kappa', type=float)
        parser.add_argument('--M', type=int, required=True)
        parser.add_argument('--form', action='append', required=True, metavar='b:P',
                            help="residue and polynomial, e.g. 1:m; repeat per form")
        super().add_arguments(parser)

    def parse_forms(self, texts):
        residues, polys = [], []
        for text in texts:
            b, sep, poly = text.partition(':')
            if not sep or not b.strip().isdigit():
                raise CommandError(f"form {text!r} must look like b:P", returncode=EXIT_USAGE)
            residues.append(int(b))
            polys.append(poly)
        return list(zip(residues, validated(PolynomialListSerializer, {'polys': polys})))

    def handle(self, *args, **options):
        cfg = self.estimator_config(options)
        system = self.parse_forms(options['form'])
        ctx = self.wtrick_context({**options, 'b': system[0][0]})
        table = self.factor_table(ctx.W * ctx.N + max(b for b, _ in system))
        report = polyforms_check(system, ctx, table, options['M'], cfg)
        self.write_trace(options['trace'], report.trace)
        return self.emit(report, options)
