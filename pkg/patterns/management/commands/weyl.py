from ...api.serializers import PhaseSerializer
from ...experiments import major_arc_detect, weyl_sum
from ..base import ExperimentCommand, int_list, validated


class Command(ExperimentCommand):
    help = "Сумма Вейля |E e(P(n))| и поиск большой дуги"
    uses_estimator = False

    def add_arguments(self, parser):
        parser.add_argument('--poly', required=True, help="phase polynomial, e.g. 'n^2/5' or 'phi*n^2'")
        parser.add_argument('--dims', type=int_list, required=True, help="N1,N2,...")
        parser.add_argument('--eps', type=float, default=0.1)
        parser.add_argument('--q-max', type=int, dest='q_max', help="search denominators up to this bound")
        super().add_arguments(parser)

    def handle(self, *args, **options):
        data = validated(PhaseSerializer, {'poly': options['poly'], 'dims': options['dims']})
        phase, dims = data['phase'], data['dims']
        certificate = None
        if options['q_max']:
            certificate = major_arc_detect(phase, dims, options['eps'], options['q_max'], options['op_cap'])
        value = certificate.weyl if certificate else weyl_sum(phase, dims, options['op_cap'])
        result = {
            'value': value,
            'weyl_sum': value,
            'certificate': certificate.as_dict() if certificate else None,
            'config': {'poly': str(phase), 'dims': dims, 'eps': options['eps'], 'q_max': options['q_max']},
        }
        return self.emit(result, options)
