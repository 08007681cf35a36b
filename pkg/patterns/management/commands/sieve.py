import math

from ...arith import count_primes, segmented_mangoldt_prime
from ...conf import pattern_settings
from ...exceptions import DomainError
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Сегментированное решето: число простых до L"
    uses_estimator = False

    def add_arguments(self, parser):
        parser.add_argument('--limit', type=int, required=True)
        parser.add_argument('--stats', action='store_true', help="add θ(L)/L and per-window counts")
        parser.add_argument('--window', type=int, help="segment length")
        super().add_arguments(parser)

    def handle(self, *args, **options):
        limit = options['limit']
        if limit < 0:
            raise DomainError(f"limit must be >= 0, got {limit}")
        cfg = self.estimator_config(options)
        window = options['window'] or pattern_settings.SIEVE_WINDOW
        if window < 1:
            raise DomainError(f"window must be >= 1, got {window}")
        result = {'limit': limit, 'config': {'window': window}}
        if not options['stats']:
            result['prime_count'] = count_primes(limit, window, cfg.workers)
            return self.emit(result, options)

        windows = segmented_mangoldt_prime(2, limit, window, cfg.workers) if limit >= 2 else []
        theta = math.fsum(float(w.mangoldt_prime.sum()) for w in windows)
        rows = [{'lo': w.lo, 'hi': w.hi, 'primes': w.prime_count} for w in windows]
        result.update(
            prime_count=sum(row['primes'] for row in rows),
            theta=theta,
            theta_ratio=theta / limit if limit else 0.0,
            windows=len(rows),
        )
        self.write_trace(options['trace'], rows)
        return self.emit(result, options)
