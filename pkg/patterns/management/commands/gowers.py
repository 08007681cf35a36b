import math

from django.core.management.base import CommandError

from ...gowers import (
    BoxNormSpec, CyclicFn, box_norm, box_norm_power, builtin_function, dual_function, lp_norm,
)
from ...multiset import Multiset, interval
from ..base import EXIT_USAGE, ExperimentCommand, read_document

OPERATIONS = ('norm', 'power', 'dual', 'lp')


def parse_side(text, modulus):
    """'full', '0,1,5' или диапазоны 'a:b' через запятую."""
    if text == 'full':
        return interval(0, modulus - 1)
    values = []
    try:
        for part in text.split(','):
            lo, sep, hi = part.partition(':')
            values += list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
    except ValueError:
        raise CommandError(f"bad side {text!r}", returncode=EXIT_USAGE) from None
    return Multiset.from_values(values)


class Command(ExperimentCommand):
    help = "Нормы Гауэрса функции на Z/NZ"

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--builtin', help="parity | constant:c | indicator:a,b,.. | random")
        source.add_argument('--function', metavar='FILE', help="JSON or YAML list of N values")
        parser.add_argument('--N', type=int, help="modulus (taken from the file when omitted)")
        parser.add_argument('--dim', type=int, default=1)
        parser.add_argument('--sides', action='append', default=[],
                            help="side multiset: full | list of values and a:b ranges; repeat per side")
        parser.add_argument('--operation', choices=OPERATIONS, default='norm')
        parser.add_argument('--p', type=float, default=2.0, help="exponent for --operation lp")
        super().add_arguments(parser)

    def load_function(self, options):
        if options['builtin']:
            if not options['N']:
                raise CommandError("--N is required with --builtin", returncode=EXIT_USAGE)
            return builtin_function(options['builtin'], options['N'], options['seed'])
        values = read_document(options['function'])
        if not isinstance(values, list) or not values:
            raise CommandError("function file must hold a non-empty list", returncode=EXIT_USAGE)
        if options['N'] and options['N'] != len(values):
            raise CommandError(f"function file has {len(values)} values, --N is {options['N']}",
                               returncode=EXIT_USAGE)
        return CyclicFn(values)

    def spec(self, options, modulus):
        texts = options['sides'] or ['full']
        if len(texts) > options['dim']:
            raise CommandError(f"{len(texts)} sides given for dimension {options['dim']}", returncode=EXIT_USAGE)
        texts = texts + [texts[-1]] * (options['dim'] - len(texts))
        return BoxNormSpec(tuple(parse_side(text, modulus) for text in texts))

    def handle(self, *args, **options):
        cfg = self.estimator_config(options)
        f = self.load_function(options)
        config = {**cfg.echo(), 'N': f.modulus, 'dim': options['dim'],
                  'sides': options['sides'] or ['full'], 'operation': options['operation'],
                  'function': options['builtin'] or options['function']}
        operation = options['operation']
        if operation == 'lp':
            config['p'] = options['p']
            return self.emit({'value': lp_norm(f, options['p']), 'config': config}, options)
        spec = self.spec(options, f.modulus)
        if operation == 'norm':
            result = box_norm(f, spec, cfg).as_dict()
        elif operation == 'power':
            result = {**box_norm_power(f, spec, cfg).as_dict(), 'mode': str(cfg.mode)}
        else:
            dual = dual_function(f, spec, cfg)
            result = {'value': math.fsum(f.values * dual.values) / f.modulus,
                      'dual': dual.values.tolist(), 'mode': str(cfg.mode)}
        result['config'] = config
        return self.emit(result, options)
