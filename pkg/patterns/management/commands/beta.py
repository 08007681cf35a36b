from ...wtrick import beta_p, beta_p_sampled
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Локальный множитель β_p системы многочленов"

    def add_arguments(self, parser):
        parser.add_argument('--pattern', required=True, metavar='FILE')
        parser.add_argument('--p', type=int, required=True)
        super().add_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.estimator_config(options)
        spec = self.load_pattern(options['pattern'])
        if cfg.is_exact:
            factor = beta_p(spec, options['p'], options['op_cap'], cfg.workers)
        else:
            factor = beta_p_sampled(spec, options['p'], cfg.samples, cfg.rng_seed)
        config = {**spec.echo(), 'p': options['p'], 'mode': str(cfg.mode)}
        if not cfg.is_exact:
            config.update(samples=cfg.samples, rng_seed=cfg.rng_seed)
        return self.emit({**factor.as_dict(), 'config': config}, options)
