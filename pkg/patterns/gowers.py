"""
Нормы Гауэрса на Z/NZ.

Примитив - 2^d-я степень нормы (у неё есть несмещённая оценка),
корень с отсечением отрицательных значений - обёртка над ним.

Точный режим раскручивает рекурсию
    ||f||^{2^d}_{Q_1..Q_d} = E_{h_d} ||Δ_{h_d} f||^{2^{d-1}}_{Q_1..Q_{d-1}},
где h_i пробегает мультимножество разностей Q_i - Q_i с весами кратностей;
последняя сторона считается одной матричной операцией.
Режим monte_carlo сэмплирует x и h_i = a_i - b_i, a_i, b_i из Q_i.
"""
import itertools
import logging
import math

import attrs
import numpy as np

from .conf import pattern_settings
from .estimation import Estimate, Moments, chunk_plan, chunk_rng, monte_carlo, ordered_map, stream_id
from .exceptions import DomainError, check_cap
from .multiset import Multiset, box, difference, dilate

logger = logging.getLogger(__name__)

MAX_DIMENSION = 16
DUAL_BLOCK = 2**20


def _finite_readonly(values):
    array = np.array(values, dtype=np.float64)
    if array.ndim != 1 or array.size == 0:
        raise DomainError("a cyclic function needs a non-empty 1-d array of values")
    if not np.all(np.isfinite(array)):
        raise DomainError("cyclic function values must be finite")
    array.setflags(write=False)
    return array


# === Функции на Z/NZ ===

@attrs.frozen(eq=False)
class CyclicFn:
    """Вещественная функция на Z/NZ, плотный массив из N значений"""
    values: np.ndarray = attrs.field(converter=_finite_readonly, repr=False)

    @property
    def modulus(self):
        return int(self.values.size)

    def __repr__(self):
        return f"CyclicFn(N={self.modulus})"

    def __call__(self, x):
        return float(self.values[int(x) % self.modulus])

    @classmethod
    def constant(cls, modulus, value):
        return cls(np.full(modulus, float(value)))

    @classmethod
    def indicator(cls, modulus, points):
        values = np.zeros(modulus)
        values[np.mod(np.asarray(list(points), dtype=np.int64), modulus)] = 1.0
        return cls(values)

    @classmethod
    def parity(cls, modulus):
        """(-1)^x."""
        return cls(np.where(np.arange(modulus) % 2 == 0, 1.0, -1.0))

    @classmethod
    def random(cls, modulus, rng, bound=1.0):
        return cls(rng.uniform(-bound, bound, size=modulus))

    def shift(self, t):
        """x -> f(x + t)."""
        return CyclicFn(np.roll(self.values, -int(t)))

    def mean(self):
        return float(np.mean(self.values))

    def _combine(self, other, op):
        if isinstance(other, CyclicFn):
            if other.modulus != self.modulus:
                raise DomainError("cyclic functions have different moduli")
            other = other.values
        return CyclicFn(op(self.values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__


def builtin_function(name, modulus, seed=None):
    """Встроенные тестовые функции CLI: parity, constant:c, indicator:a,b,.., random."""
    kind, _, argument = name.partition(':')
    if kind == 'parity':
        return CyclicFn.parity(modulus)
    if kind == 'constant':
        return CyclicFn.constant(modulus, float(argument or 1))
    if kind == 'indicator':
        return CyclicFn.indicator(modulus, [int(a) for a in argument.split(',') if a])
    if kind == 'random':
        seed = pattern_settings.DEFAULT_SEED if seed is None else seed
        return CyclicFn.random(modulus, np.random.default_rng(seed))
    raise DomainError(f"unknown builtin function {name!r}")


# === Спецификация нормы ===

def _side_tuple(sides):
    return tuple(sides)


@attrs.frozen
class BoxNormSpec:
    """Стороны Q_1..Q_d нормы □^d"""
    sides: tuple = attrs.field(converter=_side_tuple)

    @sides.validator
    def _check_sides(self, attribute, value):
        if not 1 <= len(value) <= MAX_DIMENSION:
            raise DomainError(f"box norm dimension must lie in [1, {MAX_DIMENSION}]")
        for side in value:
            if not isinstance(side, Multiset) or side.is_empty:
                raise DomainError("every side of a box norm must be a non-empty multiset")

    @property
    def dimension(self):
        return len(self.sides)

    @classmethod
    def uniform(cls, side, dimension):
        return cls((side,) * dimension)

    def reduced(self, modulus):
        """Стороны по модулю N; неинъективная редукция только логируется."""
        reduced = []
        for side in self.sides:
            image = side.reduce_mod(modulus)
            if side.span > modulus and image.support_size < side.support_size:
                logger.warning("side of span %d is not injective modulo %d", side.span, modulus)
            reduced.append(image)
        return BoxNormSpec(tuple(reduced))

    def difference_weights(self, modulus):
        """[(значения h, веса), ...] для Q_i - Q_i по модулю N."""
        weights = []
        for side in self.sides:
            diff = difference(side, side).reduce_mod(modulus)
            weights.append((diff.values, diff.counts / diff.size))
        return weights


@attrs.frozen
class BoxNorm:
    """Норма, её 2^d-я степень и признак отсечения"""
    value: float
    power: Estimate
    mode: str
    clamped: bool
    tolerance: float

    @property
    def stderr(self):
        return self.power.stderr

    def as_dict(self):
        return {
            'value': self.value,
            'power': self.power.value,
            'stderr': self.power.stderr,
            'mode': self.mode,
            'clamped': self.clamped,
            'tolerance': self.tolerance,
        }


def _omega(dimension):
    """Матрица вершин куба {0,1}^d: строка w - биты числа w."""
    w = np.arange(2**dimension)[:, None]
    return (w >> np.arange(dimension)[None, :]) & 1


def _stack(functions):
    moduli = {f.modulus for f in functions}
    if len(moduli) != 1:
        raise DomainError("all functions of a Gowers inner product must share the modulus")
    return np.stack([f.values for f in functions]), moduli.pop()


def _exact_cost(modulus, weights):
    return modulus * math.prod(len(values) for values, _ in weights)


def _correlate(fs, weights):
    """x -> E_h Π_ω fs[ω](x + ω·h); ω кодируется битами индекса строки."""
    if not weights:
        return fs[0]
    modulus = fs.shape[1]
    values, probabilities = weights[-1]
    half = fs.shape[0] // 2
    lower, upper = fs[:half], fs[half:]
    if len(weights) == 1:
        index = (np.arange(modulus)[:, None] + values[None, :]) % modulus
        return lower[0] * (upper[0][index] @ probabilities)
    acc = np.zeros(modulus)
    for h, p in zip(values, probabilities):
        acc += p * _correlate(lower * np.roll(upper, -int(h), axis=1), weights[:-1])
    return acc


def _product_kernel(fs, sides, modulus, skip_zero=False):
    """Ядро Monte Carlo: слагаемые Π_ω f_ω(x + ω·h) при случайных x, h."""
    dimension = len(sides)
    omega = _omega(dimension)
    rows = np.arange(2**dimension)[:, None]
    if skip_zero:
        omega, rows = omega[1:], rows[1:]

    def kernel(rng, n):
        x = rng.integers(0, modulus, size=n)
        offsets = np.zeros((omega.shape[0], n), dtype=np.int64)
        for i, side in enumerate(sides):
            h = side.sample(rng, n) - side.sample(rng, n)
            offsets += omega[:, i:i + 1] * h[None, :]
        return np.prod(fs[rows, (x[None, :] + offsets) % modulus], axis=0)

    return kernel


def _inner_product_array(fs, modulus, spec, cfg, label):
    spec = spec.reduced(modulus)
    if cfg.is_exact:
        weights = spec.difference_weights(modulus)
        check_cap(_exact_cost(modulus, weights), cfg.op_cap, "exact box norm")
        return Estimate(float(np.mean(_correlate(fs, weights))))
    return monte_carlo(_product_kernel(fs, spec.sides, modulus), cfg, label)


# === Операции ===

def gowers_inner_product(fs, spec, cfg):
    """
    <(f_ω)>_{□^d} = E_x E_h Π_ω f_ω(x + ω·h).

    fs - словарь {ω: CyclicFn} по всем вершинам {0,1}^d (кортежи из 0/1)
    либо список длины 2^d, где вершина ω имеет номер Σ ω_i 2^i.
    """
    dimension = spec.dimension
    if isinstance(fs, dict):
        missing = [w for w in itertools.product((0, 1), repeat=dimension) if w not in fs]
        if missing:
            raise DomainError(f"inner product slots not filled: {missing[:3]}")
        ordered = [fs[tuple((index >> i) & 1 for i in range(dimension))] for index in range(2**dimension)]
    else:
        ordered = list(fs)
        if len(ordered) != 2**dimension:
            raise DomainError(f"expected {2**dimension} functions, got {len(ordered)}")
    stacked, modulus = _stack(ordered)
    return _inner_product_array(stacked, modulus, spec, cfg, 'gowers-inner-product')


def box_norm_power(f, spec, cfg):
    """||f||^{2^d}; в режиме monte_carlo - со стандартной ошибкой."""
    stacked = np.broadcast_to(f.values, (2**spec.dimension, f.modulus))
    return _inner_product_array(stacked, f.modulus, spec, cfg, 'box-norm-power')


def box_norm(f, spec, cfg):
    """max(степень, 0)^{1/2^d}."""
    power = box_norm_power(f, spec, cfg)
    tolerance = pattern_settings.NEGATIVITY_TOLERANCE
    clamped = power.value < 0
    if cfg.is_exact and power.value < -tolerance:
        logger.warning("exact box norm power %.3e is below -%.0e", power.value, tolerance)
    value = max(power.value, 0.0) ** (1.0 / 2**spec.dimension)
    return BoxNorm(value, power, str(cfg.mode), clamped, tolerance)


def dual_function(f, spec, cfg):
    """D(f)(x) = E_h Π_{ω≠0} f(x + ω·h)."""
    modulus = f.modulus
    spec = spec.reduced(modulus)
    dimension = spec.dimension
    stacked = np.broadcast_to(f.values, (2**dimension, modulus)).copy()
    stacked[0] = 1.0
    if cfg.is_exact:
        weights = spec.difference_weights(modulus)
        # лимит считается на одну точку выхода
        check_cap(_exact_cost(modulus, weights) // modulus, cfg.op_cap, "exact dual function")
        return CyclicFn(_correlate(stacked, weights))

    omega = _omega(dimension)[1:]
    positions = np.arange(modulus)
    stream = stream_id('dual-function')

    def run(job):
        index, length = job
        rng = chunk_rng(cfg.rng_seed, stream, index)
        offsets = np.zeros((omega.shape[0], length), dtype=np.int64)
        for i, side in enumerate(spec.sides):
            h = side.sample(rng, length) - side.sample(rng, length)
            offsets += omega[:, i:i + 1] * h[None, :]
        total = np.zeros(modulus)
        block = max(1, DUAL_BLOCK // (modulus * omega.shape[0]))
        for start in range(0, length, block):
            part = offsets[:, start:start + block]
            idx = (positions[None, None, :] + part[:, :, None]) % modulus
            total += np.prod(f.values[idx], axis=0).sum(axis=0)
        return total

    totals = ordered_map(run, chunk_plan(cfg.samples, cfg.chunk_size), cfg.workers)
    return CyclicFn(np.sum(totals, axis=0) / cfg.samples)


def uniformity_norm(f, side, dimension, cfg):
    """Локальная норма U^d_Q: все стороны равны Q."""
    return box_norm(f, BoxNormSpec.uniform(side, dimension), cfg)


def lp_norm(f, p):
    """(E|f|^p)^{1/p}; при p = inf - максимум модуля."""
    if p < 1:
        raise DomainError(f"L^p norm needs p >= 1, got {p}")
    magnitudes = np.abs(f.values)
    if math.isinf(p):
        return float(magnitudes.max())
    return float(np.mean(magnitudes**p) ** (1.0 / p))


# === Усреднённая локальная норма ===

@attrs.frozen
class LocalGowersEstimate:
    """Среднее по h норм со сторонами P_j(h)[-M,M] и диагностика"""
    estimate: Estimate
    h_count: int
    degenerate_sides: int
    trace: tuple = attrs.field(default=(), repr=False, eq=False)
    h_sampled: bool = False

    def diagnostics(self):
        return {'h_count': self.h_count, 'h_sampled': self.h_sampled,
                'degenerate_sides': self.degenerate_sides}


def _inner_seed(seed, index):
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def averaged_local_gowers(f, polys, radius, cfg, h_samples=None):
    """
    E_{h in [M]^r} ||f||_{□^D} со сторонами P_j(h)·[-M, M] по модулю N.

    В точном режиме при h_samples=None перебираются все h; иначе h
    выбираются равномерно (по умолчанию H_SAMPLES штук), среднее и ошибка
    считаются по выборке h.
    """
    if not polys:
        raise DomainError("averaged local Gowers norm needs at least one polynomial")
    arity = polys[0].arity
    if any(p.arity != arity for p in polys):
        raise DomainError("all side polynomials must share the arity")
    if radius < 1:
        raise DomainError(f"radius M must be >= 1, got {radius}")
    modulus = f.modulus
    base = box(radius)
    if cfg.is_exact and h_samples is None:
        check_cap(radius**arity, cfg.op_cap, "enumeration of h in [M]^r")
        points = np.array(list(itertools.product(range(1, radius + 1), repeat=arity)), dtype=np.int64)
        sampled = False
    else:
        count = h_samples or pattern_settings.H_SAMPLES
        rng = chunk_rng(cfg.rng_seed, stream_id('local-gowers-h'), 0)
        points = rng.integers(1, radius + 1, size=(count, arity))
        sampled = True
    steps = np.stack([p.evaluate_many(points) for p in polys], axis=1)

    values = []
    trace = []
    degenerate = 0
    for index, row in enumerate(steps):
        degenerate += int(np.count_nonzero(row == 0))
        spec = BoxNormSpec(tuple(dilate(int(a), base).reduce_mod(modulus) for a in row))
        inner_cfg = attrs.evolve(cfg, rng_seed=_inner_seed(cfg.rng_seed, index))
        norm = box_norm(f, spec, inner_cfg)
        values.append(norm.value)
        trace.append({'h': [int(v) for v in points[index]], 'steps': [int(a) for a in row],
                      'norm': norm.value})
    if degenerate:
        logger.info("averaged local norm: %d degenerate sides P_j(h) = 0", degenerate)
    moments = Moments.of(values)
    if sampled or not cfg.is_exact:
        estimate = moments.to_estimate()
    else:
        estimate = Estimate(moments.mean)
    return LocalGowersEstimate(estimate, len(values), degenerate, tuple(trace), sampled)
