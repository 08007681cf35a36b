from ...arith import primorial
from ...wtrick import admissible_count_formula, admissible_pairs, is_admissible
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Допустимые пары (b, c) по модулю W и проверка допустимости системы"
    uses_estimator = False

    def add_arguments(self, parser):
        parser.add_argument('--w', type=int, required=True)
        parser.add_argument('--pattern', required=True, metavar='FILE')
        parser.add_argument('--check-limit', type=int, dest='check_limit', default=100,
                            help="check β_p != 0 for p up to this bound")
        parser.add_argument('--list', action='store_true', help="include the pairs themselves")
        super().add_arguments(parser)

    def handle(self, *args, **options):
        spec = self.load_pattern(options['pattern'])
        W = primorial(options['w'])
        pairs = admissible_pairs(W, spec.polys, options['op_cap'])
        formula = admissible_count_formula(options['w'], spec)
        check = is_admissible(spec, options['check_limit'])
        result = {
            'W': W,
            'count': pairs.count,
            'value': pairs.count,
            'formula': float(formula),
            'formula_fraction': f"{formula.numerator}/{formula.denominator}",
            'identity_holds': formula == pairs.count,
            **check.as_dict(),
            'config': {**spec.echo(), 'w': options['w']},
        }
        if options['list']:
            result['pairs'] = [[b, list(c)] for b, c in pairs]
        return self.emit(result, options)
