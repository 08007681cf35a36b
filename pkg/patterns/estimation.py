"""
Конфигурация оценивателей и общий Monte Carlo движок.

Выборка режется на чанки фиксированной длины; чанк j потока s получает
собственный генератор Philox(SeedSequence([seed, s, j])). Частичные
моменты сливаются в порядке чанков, поэтому результат не зависит от
числа рабочих потоков.
"""
import enum
import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor

import attrs
import numpy as np

from .conf import pattern_settings
from .exceptions import DomainError

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64
# нижняя граница stderr выборочной оценки при нулевом наблюдённом разбросе
STDERR_FLOOR = float(np.finfo(np.float64).eps)


class Mode(enum.StrEnum):
    """Режим вычисления"""
    EXACT = 'exact'
    MONTE_CARLO = 'monte_carlo'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if value in ('mc', 'montecarlo', 'monte-carlo'):
            return cls.MONTE_CARLO
        try:
            return cls(value)
        except ValueError:
            raise DomainError(f"unknown estimator mode: {value!r}") from None


def _default_samples():
    return pattern_settings.MC_SAMPLES


def _default_seed():
    return pattern_settings.DEFAULT_SEED


def _default_workers():
    return pattern_settings.workers


def _default_op_cap():
    return pattern_settings.OP_CAP


def _default_chunk():
    return pattern_settings.CHUNK_SIZE


@attrs.frozen
class EstimatorConfig:
    """Режим (exact | monte_carlo), число выборок, зерно и ресурсы"""
    mode: Mode = attrs.field(default=Mode.EXACT, converter=Mode.parse)
    samples: int = attrs.field(factory=_default_samples)
    rng_seed: int = attrs.field(factory=_default_seed)
    workers: int = attrs.field(factory=_default_workers)
    op_cap: int | None = attrs.field(factory=_default_op_cap)
    chunk_size: int = attrs.field(factory=_default_chunk)

    @samples.validator
    def _check_samples(self, attribute, value):
        if self.mode is Mode.MONTE_CARLO and value < 1:
            raise DomainError("monte_carlo mode needs samples >= 1")

    @rng_seed.validator
    def _check_seed(self, attribute, value):
        if not 0 <= value < SEED_LIMIT:
            raise DomainError("rng_seed must be a 64-bit unsigned integer")

    @workers.validator
    def _check_workers(self, attribute, value):
        if value < 1:
            raise DomainError("workers must be >= 1")

    @chunk_size.validator
    def _check_chunk(self, attribute, value):
        if value < 1:
            raise DomainError("chunk_size must be >= 1")

    @property
    def is_exact(self):
        return self.mode is Mode.EXACT

    def echo(self):
        # workers не входит в эхо: вывод обязан совпадать при любом числе потоков
        return {
            'mode': str(self.mode),
            'samples': self.samples,
            'rng_seed': self.rng_seed,
            'op_cap': self.op_cap,
            'chunk_size': self.chunk_size,
        }


@attrs.frozen
class Estimate:
    """Значение со стандартной ошибкой; samples=None означает точный режим"""
    value: float
    stderr: float = 0.0
    samples: int | None = None

    @property
    def exact(self):
        return self.samples is None

    def as_dict(self):
        return {
            'value': self.value,
            'stderr': self.stderr,
            'samples': self.samples,
            'exact': self.exact,
        }


@attrs.frozen
class Moments:
    """Число наблюдений, среднее и сумма квадратов отклонений"""
    count: int
    mean: float
    m2: float

    @classmethod
    def of(cls, values):
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return cls(0, 0.0, 0.0)
        mean = float(values.mean())
        return cls(int(values.size), mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other):
        # параллельное обновление Чана
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return Moments(count, mean, m2)

    def to_estimate(self):
        """Выборочная оценка; её stderr всегда > 0, нулевая ошибка только у точного режима."""
        if self.count < 2:
            # по одному наблюдению разброс не оценить
            return Estimate(self.mean, math.inf, self.count)
        stderr = math.sqrt(self.m2 / (self.count - 1) / self.count)
        stderr = max(stderr, STDERR_FLOOR * max(1.0, abs(self.mean)))
        return Estimate(self.mean, stderr, self.count)


def stream_id(label):
    """Стабильный номер потока по имени оценивателя."""
    return zlib.crc32(label.encode('utf-8'))


def chunk_rng(seed, stream, chunk):
    """Генератор чанка: счётчиковый Philox, ключ из SeedSequence."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, chunk])))


def chunk_plan(total, chunk_size):
    """Разбиение total выборок на чанки [(номер, длина), ...]."""
    full, rest = divmod(total, chunk_size)
    plan = [(index, chunk_size) for index in range(full)]
    if rest:
        plan.append((full, rest))
    return plan


def ordered_map(func, items, workers):
    """map с пулом потоков; порядок результатов совпадает с порядком items."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def run_chunks(job, cfg, label, samples=None):
    """job(rng, index, length) по всем чанкам; результаты в порядке чанков."""
    samples = cfg.samples if samples is None else samples
    if samples < 1:
        raise DomainError("monte_carlo needs at least one sample")
    stream = stream_id(label)

    def run(chunk):
        index, length = chunk
        return job(chunk_rng(cfg.rng_seed, stream, index), index, length)

    return ordered_map(run, chunk_plan(samples, cfg.chunk_size), cfg.workers)


def merge_moments(parts):
    total = Moments(0, 0.0, 0.0)
    for part in parts:
        total = total.merge(part)
    return total


def monte_carlo(kernel, cfg, label, samples=None):
    """
    Несмещённое среднее kernel(rng, n) -> массив из n слагаемых.

    label задаёт поток, чтобы разные оцениватели с одним зерном
    не делили случайные числа.
    """
    parts = run_chunks(lambda rng, index, length: Moments.of(kernel(rng, length)), cfg, label, samples)
    logger.debug("%s: %d chunks", label, len(parts))
    return merge_moments(parts).to_estimate()


def pairwise_mean(values):
    """Среднее с попарным суммированием numpy."""
    values = np.asarray(values, dtype=np.float64)
    return float(np.sum(values) / values.size)
