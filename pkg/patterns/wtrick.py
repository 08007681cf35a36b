"""
W-трюк: Λ'_{b,W}, мажоранта ν, локальные множители β_p и особый ряд.

Все функции от x возвращаются как CyclicFn по модулю N; значение в x = N
хранится в позиции 0.
"""
import functools
import logging
import math
from fractions import Fraction

import attrs
import numpy as np

from .arith import euler_phi, is_prime, primes_up_to, primorial
from .conf import pattern_settings
from .estimation import Moments, chunk_rng, ordered_map, stream_id
from .exceptions import DomainError, ResourceLimitError, check_cap
from .gowers import CyclicFn
from .poly import check_top_degree_distinct

logger = logging.getLogger(__name__)

BLOCK = 2**16


# === Контекст ===

@attrs.frozen
class WTrickContext:
    """Параметры w, N, R, b; W - праймориал w"""
    w: int
    N: int
    R: int
    b: int = 1

    def __attrs_post_init__(self):
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if self.R < 2:
            raise DomainError(f"sieve level R must be >= 2, got {self.R}")
        if not 1 <= self.b <= self.W:
            raise DomainError(f"b={self.b} must lie in [1, W={self.W}]")
        if math.gcd(self.b, self.W) != 1:
            raise DomainError(f"b={self.b} is not coprime to W={self.W}")

    @functools.cached_property
    def W(self):
        return primorial(self.w)

    @functools.cached_property
    def phi_W(self):
        return euler_phi(self.W)

    @property
    def density(self):
        """φ(W)/W."""
        return self.phi_W / self.W

    @property
    def sieve_limit(self):
        return self.W * self.N + self.b

    def require_table(self, table):
        if table.limit < self.sieve_limit:
            raise DomainError(
                f"factor table up to {table.limit} does not cover W*N + b = {self.sieve_limit}"
            )

    def echo(self):
        return {'w': self.w, 'W': self.W, 'N': self.N, 'R': self.R, 'b': self.b}


def level_from_kappa(N, kappa):
    """R = ⌈N^κ⌉, не меньше 2."""
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa must lie in (0, 1], got {kappa}")
    return max(2, math.ceil(N**kappa))


def _cyclic_from_range(values):
    """values[x] для x = 0..N; ячейка x = N переносится в позицию 0."""
    out = values[:-1].copy()
    out[0] = values[-1]
    return CyclicFn(out)


# === Локальные множители ===

def lambda_p(p, n):
    """Λ_p(n) = p/(p-1) при p ∤ n, иначе 0."""
    return p / (p - 1) if n % p else 0.0


@attrs.frozen
class PatternSpec:
    """Система многочленов P_1..P_k от r переменных степени не выше d"""
    r: int
    d: int
    polys: tuple = attrs.field(converter=tuple)
    N: int | None = None
    M: int | None = None

    def __attrs_post_init__(self):
        if not self.polys:
            raise DomainError("a pattern needs at least one polynomial")
        for i, poly in enumerate(self.polys, 1):
            if poly.arity != self.r:
                raise DomainError(f"polynomial {i} has arity {poly.arity}, expected r={self.r}")
            if poly.degree > self.d:
                raise DomainError(f"polynomial {i} has degree {poly.degree} > d={self.d}")
        if self.M is not None and self.M < 1:
            raise DomainError(f"M must be >= 1, got {self.M}")
        if self.N is not None and self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")

    @property
    def k(self):
        return len(self.polys)

    def with_scale(self, N=None, M=None):
        return attrs.evolve(self, N=self.N if N is None else N, M=self.M if M is None else M)

    def top_degree_check(self):
        check = check_top_degree_distinct(self.polys, self.d)
        if not check:
            logger.warning("degree %d components of polynomials %s coincide", self.d, check.witness)
        return check

    def argument_bound(self, N, M):
        """Граница сверху для n + P_i(m) при n <= N, m в [1, M]^r."""
        return N + max(p.magnitude_bound(M) for p in self.polys)

    def echo(self):
        return {'r': self.r, 'd': self.d, 'k': self.k, 'polys': [str(p) for p in self.polys]}


@attrs.frozen
class LocalFactor:
    """β_p = (p/(p-1))^k · numerator / p^{r+1}"""
    p: int
    numerator: int
    k: int
    r: int

    @property
    def value(self):
        return Fraction(self.p**self.k * self.numerator, (self.p - 1) ** self.k * self.p ** (self.r + 1))

    def as_dict(self):
        value = self.value
        return {
            'p': self.p,
            'numerator': self.numerator,
            'value': float(value),
            'fraction': f"{value.numerator}/{value.denominator}",
            'exact': True,
        }


@attrs.frozen
class SampledLocalFactor:
    """Оценка β_p стратифицированной выборкой"""
    p: int
    value: float
    stderr: float
    samples: int

    def as_dict(self):
        return {'p': self.p, 'value': self.value, 'stderr': self.stderr,
                'samples': self.samples, 'exact': False}


def _require_prime(p):
    if not is_prime(p):
        raise DomainError(f"p={p} is not prime")


def _grid_points(p, r, start, stop):
    """Точки (Z/pZ)^r с номерами [start, stop); первая координата - старший разряд."""
    index = np.arange(start, stop, dtype=np.int64)
    points = np.empty((index.size, r), dtype=np.int64)
    for j in range(r - 1, -1, -1):
        points[:, j] = index % p
        index //= p
    return points


def _good_residues(polys, points, p):
    """p - #{различных -P_i(m) mod p} для каждой строки points."""
    residues = np.stack([poly.evaluate_many_mod(points, p) for poly in polys])
    residues.sort(axis=0)
    distinct = 1 + np.count_nonzero(np.diff(residues, axis=0), axis=0)
    return p - distinct


def beta_p(spec, p, cap=None, workers=1):
    """Точный β_p перебором (Z/pZ)^r."""
    _require_prime(p)
    cap = pattern_settings.ENUMERATION_CAP if cap is None else cap
    total = p**spec.r
    if cap is not None and total > cap:
        raise ResourceLimitError(
            f"local factor at p={p}: p^r = {total} exceeds cap {cap}; use sampled local factors",
            cost=total,
            cap=cap,
        )

    def count(bounds):
        return int(_good_residues(spec.polys, _grid_points(p, spec.r, *bounds), p).sum())

    blocks = [(a, min(a + BLOCK, total)) for a in range(0, total, BLOCK)]
    numerator = sum(ordered_map(count, blocks, workers))
    return LocalFactor(p, numerator, spec.k, spec.r)


def beta_p_sampled(spec, p, samples, seed=None):
    """
    β_p по выборке, страты - вычеты первой переменной.

    На страту приходится max(1, samples // p) точек; при r = 1 страты
    исчерпывают пространство и ошибка равна нулю.
    """
    _require_prime(p)
    seed = pattern_settings.DEFAULT_SEED if seed is None else seed
    per_stratum = max(1, samples // p)
    check_cap(p * per_stratum, pattern_settings.ENUMERATION_CAP, "stratified local factor",
              hint="lower the sample count")
    scale = (p / (p - 1)) ** spec.k / p
    first = np.repeat(np.arange(p, dtype=np.int64), per_stratum)
    if spec.r == 1:
        good = _good_residues(spec.polys, first[::per_stratum, None], p)
        return SampledLocalFactor(p, float(good.mean() * scale), 0.0, p)
    rng = chunk_rng(seed, stream_id('beta-p-sampled'), p)
    rest = rng.integers(0, p, size=(first.size, spec.r - 1))
    points = np.column_stack([first, rest])
    good = (_good_residues(spec.polys, points, p) * scale).reshape(p, per_stratum)
    value = float(good.mean())
    if per_stratum > 1:
        variance = float(np.sum(good.var(axis=1, ddof=1) / per_stratum)) / p**2
    else:
        variance = Moments.of(good.ravel()).m2 / max(good.size - 1, 1) / good.size
    return SampledLocalFactor(p, value, math.sqrt(variance), int(good.size))


# === Особый ряд и допустимость ===

@attrs.frozen
class SingularSeries:
    """Усечённое произведение ∏_{p <= p_max} β_p"""
    product: float
    tail_bound: float
    zeros: tuple
    p_max: int
    factors: tuple = attrs.field(default=(), repr=False, eq=False)

    def as_dict(self):
        return {
            'product': self.product,
            'tail_bound': self.tail_bound,
            'zeros': list(self.zeros),
            'p_max': self.p_max,
        }

    def trace_rows(self):
        partial = 1.0
        for factor in self.factors:
            value = float(factor.value)
            partial *= value
            yield {'p': factor.p, 'numerator': factor.numerator, 'beta': value, 'partial_product': partial}


def singular_series(spec, p_max, cap=None, workers=1):
    """
    ∏_{p <= p_max} β_p.

    tail_bound - эвристика C/p_max, где C = max |β_p - 1|·p^2 по простым
    последней декады (p_max/10, p_max].
    """
    if p_max < 2:
        raise DomainError(f"p_max must be >= 2, got {p_max}")
    factors = []
    product = 1.0
    zeros = []
    for p in primes_up_to(p_max):
        factor = beta_p(spec, int(p), cap, workers)
        factors.append(factor)
        value = float(factor.value)
        if factor.numerator == 0:
            zeros.append(int(p))
        product *= value
    decade = [f for f in factors if f.p > p_max / 10] or factors[-1:]
    constant = max(abs(float(f.value) - 1) * f.p**2 for f in decade)
    tail_bound = 0.0 if zeros else constant / p_max
    return SingularSeries(product, tail_bound, tuple(zeros), p_max, tuple(factors))


@attrs.frozen
class AdmissibilityCheck:
    """Результат проверки; checked_up_to - фактически проверенная граница"""
    admissible: bool
    witness: int | None
    checked_up_to: int

    def __bool__(self):
        return self.admissible

    def as_dict(self):
        return {'admissible': self.admissible, 'witness': self.witness, 'checked_up_to': self.checked_up_to}


def is_admissible(spec, p_check_limit, cap=None):
    """β_p ≠ 0 для всех простых p <= p_check_limit; иначе - первое такое p."""
    if p_check_limit < 2:
        raise DomainError(f"p_check_limit must be >= 2, got {p_check_limit}")
    # при p > k хотя бы p - k вычетов n свободны, так что β_p > 0
    for p in primes_up_to(min(p_check_limit, spec.k)):
        if beta_p(spec, int(p), cap).numerator == 0:
            return AdmissibilityCheck(False, int(p), p_check_limit)
    return AdmissibilityCheck(True, None, p_check_limit)


class AdmissiblePairs:
    """Пары (b, c) из [0, W) x [0, W)^r с gcd(b + P_i(c), W) = 1 при всех i"""

    def __init__(self, W, polys, cap=None):
        if W < 1:
            raise DomainError(f"W must be >= 1, got {W}")
        self.W = W
        self.polys = tuple(polys)
        self.r = self.polys[0].arity
        cap = pattern_settings.ENUMERATION_CAP if cap is None else cap
        check_cap(W ** (self.r + 1), cap, "admissible pair enumeration", hint="lower w")
        self._coprime = np.array([math.gcd(x, W) == 1 for x in range(W)])
        self.count = sum(int(mask.sum()) for _, mask in self._blocks())

    def _blocks(self):
        total = self.W**self.r
        step = max(1, BLOCK // self.W)
        residues = np.arange(self.W, dtype=np.int64)[:, None]
        for start in range(0, total, step):
            points = _grid_points(self.W, self.r, start, min(start + step, total))
            mask = np.ones((self.W, points.shape[0]), dtype=bool)
            for poly in self.polys:
                values = poly.evaluate_many_mod(points, self.W)
                mask &= self._coprime[(residues + values[None, :]) % self.W]
            yield points, mask

    def __len__(self):
        return self.count

    def __iter__(self):
        """(b, c) в порядке возрастания c, затем b."""
        for points, mask in self._blocks():
            for column in range(points.shape[0]):
                c = tuple(int(v) for v in points[column])
                for b in np.nonzero(mask[:, column])[0]:
                    yield int(b), c


def admissible_pairs(W, polys, cap=None):
    return AdmissiblePairs(W, polys, cap)


def admissible_count_formula(w, spec):
    """W^{r+1}·(φ(W)/W)^k·∏_{p <= w} β_p как точная дробь."""
    W = primorial(w)
    result = Fraction(W ** (spec.r + 1)) * Fraction(euler_phi(W), W) ** spec.k
    for p in primes_up_to(w):
        result *= beta_p(spec, int(p)).value
    return result


# === Λ'_{b,W} ===

def lambda_prime_bw(ctx, table):
    """(φ(W)/W)·Λ'(Wx + b) при x в [R, N], иначе 0."""
    ctx.require_table(table)
    x = np.arange(ctx.N + 1, dtype=np.int64)
    n = ctx.W * x + ctx.b
    values = np.where(table.is_prime[n], np.log(n.astype(np.float64)), 0.0) * ctx.density
    values[: min(ctx.R, ctx.N + 1)] = 0.0
    return _cyclic_from_range(values)


# === Срезающие функции ===

class Cutoff:
    """χ: гладкая, носитель [-1, 1], ∫_0^1 |χ'(t)|^2 dt = 1"""
    name = None

    def __call__(self, t):
        raise NotImplementedError

    def at_zero(self):
        return float(self(np.zeros(1))[0])


class CosineSquaredCutoff(Cutoff):
    """χ(t) = (2√2/π)·cos²(πt/2)"""
    name = 'cosine'
    amplitude = 2 * math.sqrt(2) / math.pi

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(np.abs(t) <= 1, self.amplitude * np.cos(np.pi * t / 2) ** 2, 0.0)


class SmoothBumpCutoff(Cutoff):
    """χ(t) = a·exp(-1/(1 - t²)), a подобрано численно"""
    name = 'bump'
    grid = 200_001

    @functools.cached_property
    def amplitude(self):
        t = np.linspace(0.0, 1.0, self.grid)[:-1]
        derivative = np.exp(-1.0 / (1.0 - t**2)) * (-2.0 * t / (1.0 - t**2) ** 2)
        integral = np.trapezoid(np.append(derivative**2, 0.0), dx=1.0 / (self.grid - 1))
        return 1.0 / math.sqrt(integral)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        inside = np.abs(t) < 1
        safe = np.where(inside, t, 0.0)
        return np.where(inside, self.amplitude * np.exp(-1.0 / (1.0 - safe**2)), 0.0)


CUTOFFS = {
    CosineSquaredCutoff.name: CosineSquaredCutoff,
    SmoothBumpCutoff.name: SmoothBumpCutoff,
}


def get_cutoff(name=None):
    if isinstance(name, Cutoff):
        return name
    try:
        return CUTOFFS[name or CosineSquaredCutoff.name]()
    except KeyError:
        raise DomainError(f"unknown cutoff {name!r}; choose from {sorted(CUTOFFS)}") from None


def chi_eval(t):
    """Стандартный χ в точке t."""
    return float(CosineSquaredCutoff()(t))


# === Мажоранта ν ===

def _sieve_coefficients(ctx, table, cutoff):
    """[(m, μ(m)χ(log m/log R)), ...] для бесквадратных m <= R, взаимно простых с W."""
    if table.limit < ctx.R:
        raise DomainError(f"factor table up to {table.limit} does not cover R = {ctx.R}")
    mobius = table.mobius_array(ctx.R)
    ms = np.arange(1, ctx.R + 1, dtype=np.int64)
    keep = (mobius[1:] != 0) & (np.gcd(ms, ctx.W) == 1)
    ms = ms[keep]
    weights = mobius[1:][keep] * cutoff(np.log(ms.astype(np.float64)) / math.log(ctx.R))
    return [(int(m), float(c)) for m, c in zip(ms, weights) if c != 0]


def nu_b(ctx, table, cutoff=None, workers=1):
    """
    ν(x) = (φ(W)/W)·log R·(Σ_{m | Wx+b} μ(m)χ(log m/log R))^2.

    Обратный цикл: каждый m <= R добавляет свой коэффициент всем
    x ≡ -b·W^{-1} (mod m). Блоки x независимы, а внутри блока m идут по
    возрастанию, поэтому сумма совпадает с прямым вычислением побитно.
    """
    ctx.require_table(table)
    coefficients = _sieve_coefficients(ctx, table, get_cutoff(cutoff))
    starts = [(m, c, (-ctx.b * pow(ctx.W, -1, m)) % m if m > 1 else 0) for m, c in coefficients]

    def block(bounds):
        lo, hi = bounds
        inner = np.zeros(hi - lo + 1)
        for m, c, residue in starts:
            first = lo + (residue - lo) % m
            inner[first - lo::m] += c
        return inner

    bounds = [(lo, min(lo + BLOCK * 16 - 1, ctx.N)) for lo in range(1, ctx.N + 1, BLOCK * 16)]
    inner = np.concatenate([np.zeros(1)] + ordered_map(block, bounds, workers))
    factor = ctx.density * math.log(ctx.R)
    return _cyclic_from_range(factor * (inner * inner))


def _squarefree_divisors(factors):
    divisors = [1]
    for p, _ in factors:
        divisors += [d * p for d in divisors]
    return sorted(divisors)


def nu_b_direct(ctx, table, x_max=None, cutoff=None):
    """ν(x) при x в [1, x_max] прямым перебором делителей Wx + b."""
    x_max = ctx.N if x_max is None else min(x_max, ctx.N)
    ctx.require_table(table)
    weights = dict(_sieve_coefficients(ctx, table, get_cutoff(cutoff)))
    inner = np.zeros(x_max + 1)
    for x in range(1, x_max + 1):
        total = 0.0
        for m in _squarefree_divisors(table.factorize(ctx.W * x + ctx.b)):
            if m > ctx.R:
                break
            if m in weights:
                total += weights[m]
        inner[x] = total
    factor = ctx.density * math.log(ctx.R)
    return factor * (inner * inner)


@attrs.frozen
class NuDiagnostics:
    """Среднее ν и запас мажорирования ν - c·Λ'_{b,W}"""
    mean: float
    min_slack: float
    constant: float
    violations: int

    def as_dict(self):
        return {'mean': self.mean, 'min_slack': self.min_slack,
                'constant': self.constant, 'violations': self.violations}


def nu_diagnostics(ctx, table, cutoff=None, workers=1):
    cutoff = get_cutoff(cutoff)
    nu = nu_b(ctx, table, cutoff, workers)
    lam = lambda_prime_bw(ctx, table)
    constant = cutoff.at_zero() ** 2 * math.log(ctx.R) / math.log(ctx.sieve_limit)
    slack = nu.values - constant * lam.values
    tolerance = pattern_settings.NEGATIVITY_TOLERANCE
    violations = int(np.count_nonzero(slack < -tolerance))
    if violations:
        logger.warning("majorant bound fails at %d points", violations)
    return NuDiagnostics(nu.mean(), float(slack.min()), constant, violations)
