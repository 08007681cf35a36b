import csv
import io

from ...conf import pattern_settings
from ...multiset import GapSpec, box, dilate, gap_build, sumset, tv_distance
from ..base import ExperimentCommand, int_list


class Command(ExperimentCommand):
    help = "Обобщённая прогрессия a_1[-M,M] + ... + a_k[-M,M]: носитель или гистограмма"
    uses_estimator = False

    def add_arguments(self, parser):
        parser.add_argument('--steps', type=int_list, required=True, help="a1,a2,...")
        parser.add_argument('--radius', type=int, required=True, help="M")
        parser.add_argument('--histogram', action='store_true', help="print value,count CSV instead of JSON")
        parser.add_argument('--shift-step', type=int, dest='shift_step', help="q for d_TV(Q, Q + q[-R0,R0])")
        parser.add_argument('--shift-radius', type=int, dest='shift_radius', default=1, help="R0")
        parser.add_argument('--support-cap', type=int, dest='support_cap')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        spec = GapSpec(options['steps'], options['radius'])
        support_cap = options['support_cap'] or pattern_settings.SUPPORT_CAP
        progression = gap_build(spec, support_cap)

        if options['histogram']:
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator='\n')
            writer.writerow(['value', 'count'])
            writer.writerows(zip(progression.values.tolist(), progression.counts.tolist()))
            return buffer.getvalue().rstrip('\n')

        result = {
            'steps': list(spec.steps),
            'radius': spec.radius,
            'size': progression.size,
            'support_size': progression.support_size,
            'lo': progression.lo,
            'hi': progression.hi,
            'width': spec.width,
            'predicted_support': spec.predicted_support,
            'config': {'support_cap': support_cap},
        }
        if options['shift_step'] is not None:
            shifted = sumset(progression, dilate(options['shift_step'], box(options['shift_radius'])), support_cap)
            result['tv_to_shift'] = tv_distance(progression, shifted)
            result['config'].update(shift_step=options['shift_step'], shift_radius=options['shift_radius'])
        return self.emit(result, options)
