"""
Эксперименты настольного масштаба.

Каждый эксперимент возвращает EstimateReport: значение, стандартную
ошибку (0 в точном режиме), эхо конфигурации, диагностику и трассу.
"""
import contextlib
import itertools
import json
import logging
import math
import time

import attrs
import numpy as np
from rest_framework.utils.encoders import JSONEncoder

from .conf import pattern_settings
from .estimation import Estimate, Moments, merge_moments, ordered_map, run_chunks
from .exceptions import DomainError, check_cap
from .gowers import CyclicFn, averaged_local_gowers
from .multiset import GapSpec, comb_window, gap_dense
from .poly import IntPolynomial
from .wtrick import lambda_prime_bw, nu_b

logger = logging.getLogger(__name__)

BLOCK = 2**22
WEIGHTS = ('mangoldt_prime', 'mangoldt', 'mobius')


# === Отчёт ===

@attrs.define
class EstimateReport:
    """Результат эксперимента; runtime_ms не входит в JSON без include_timing"""
    value: float
    stderr: float = 0.0
    samples: int | None = None
    runtime_ms: float = 0.0
    config: dict = attrs.Factory(dict)
    diagnostics: dict = attrs.Factory(dict)
    trace: list = attrs.field(factory=list, repr=False)

    @classmethod
    def from_estimate(cls, estimate, **kwargs):
        return cls(estimate.value, estimate.stderr, estimate.samples, **kwargs)

    @property
    def exact(self):
        return self.samples is None

    def as_dict(self, include_timing=False):
        data = {
            'value': self.value,
            'stderr': self.stderr,
            'samples': self.samples,
            'exact': self.exact,
            'config': self.config,
            'diagnostics': self.diagnostics,
        }
        if include_timing:
            data['runtime_ms'] = self.runtime_ms
        return data

    def to_json(self, include_timing=False):
        return dumps(self.as_dict(include_timing))


def dumps(data):
    """Детерминированный JSON: ключи отсортированы, numpy через кодировщик DRF."""
    return json.dumps(data, cls=JSONEncoder, sort_keys=True)


@contextlib.contextmanager
def stopwatch():
    timer = {'ms': 0.0}
    start = time.perf_counter()
    try:
        yield timer
    finally:
        timer['ms'] = (time.perf_counter() - start) * 1000


def _grid(radius, arity, start, stop):
    """Точки [1, M]^r с номерами [start, stop) в лексикографическом порядке."""
    index = np.arange(start, stop, dtype=np.int64)
    points = np.empty((index.size, arity), dtype=np.int64)
    for j in range(arity - 1, -1, -1):
        points[:, j] = index % radius + 1
        index //= radius
    return points


def _blocks(total, size):
    return [(start, min(start + size, total)) for start in range(0, total, size)]


# === Среднее по шаблону ===

def _weight_array(table, weight, upto):
    if weight == 'mangoldt_prime':
        return table.mangoldt_prime_array(upto)
    if weight == 'mangoldt':
        return table.mangoldt_array(upto)
    if weight == 'mobius':
        return table.mobius_array(upto).astype(np.float64)
    raise DomainError(f"unknown weight {weight!r}; choose from {WEIGHTS}")


def _lookup(weights, arguments):
    """weights[n] при n >= 1; неположительные аргументы дают 0."""
    inside = arguments >= 1
    return np.where(inside, weights[np.where(inside, arguments, 0)], 0.0), int(np.count_nonzero(~inside))


def pattern_average(spec, table, cfg, weight='mangoldt_prime', weights=None):
    """
    E_{n in [N]} E_{m in [M]^r} Π_i w(n + P_i(m)).

    weights - необязательный массив значений w на [0, limit] вместо
    встроенного веса.
    """
    N, M = spec.N, spec.M
    if N is None or M is None:
        raise DomainError("pattern average needs N and M")
    check = spec.top_degree_check()
    bound = spec.argument_bound(N, M)
    if weights is None:
        table.require(bound)
        weights = _weight_array(table, weight, bound)
    elif weights.size <= bound:
        raise DomainError(f"weight override covers [0, {weights.size - 1}], need {bound}")
    r = spec.r
    total_points = M**r

    with stopwatch() as timer:
        if cfg.is_exact:
            check_cap(N * total_points, cfg.op_cap, "exact pattern average")
            n = np.arange(1, N + 1, dtype=np.int64)
            rows = max(1, BLOCK // N)

            def block(bounds):
                points = _grid(M, r, *bounds)
                product = np.ones((points.shape[0], N))
                negatives = 0
                for poly in spec.polys:
                    values, bad = _lookup(weights, n[None, :] + poly.evaluate_many(points)[:, None])
                    product *= values
                    negatives += bad
                return float(product.sum()), negatives

            parts = ordered_map(block, _blocks(total_points, rows), cfg.workers)
            value = math.fsum(s for s, _ in parts) / (N * total_points)
            negatives = sum(bad for _, bad in parts)
            estimate = Estimate(value)
            trace = [{'block': i, 'sum': s, 'negatives': bad} for i, (s, bad) in enumerate(parts)]
        else:
            def job(rng, index, length):
                n = rng.integers(1, N + 1, size=length)
                points = rng.integers(1, M + 1, size=(length, r))
                product = np.ones(length)
                negatives = 0
                for poly in spec.polys:
                    values, bad = _lookup(weights, n + poly.evaluate_many(points))
                    product *= values
                    negatives += bad
                return Moments.of(product), negatives

            parts = run_chunks(job, cfg, f'pattern-average-{weight}')
            estimate = merge_moments(m for m, _ in parts).to_estimate()
            negatives = sum(bad for _, bad in parts)
            trace = [{'chunk': i, 'samples': m.count, 'mean': m.mean, 'negatives': bad}
                     for i, (m, bad) in enumerate(parts)]

    if negatives:
        logger.info("pattern average: %d non-positive arguments counted as 0", negatives)
    config = {**cfg.echo(), **spec.echo(), 'N': N, 'M': M, 'weight': weight}
    diagnostics = {
        'negative_arguments': negatives,
        'top_degree_distinct': check.distinct,
        'top_degree_witness': list(check.witness) if check.witness else None,
    }
    return EstimateReport.from_estimate(estimate, runtime_ms=timer['ms'], config=config,
                                        diagnostics=diagnostics, trace=trace)


# === Поиск простых кортежей ===

def find_prime_tuples(spec, table, limit_count, cap=None):
    """Первые limit_count пар (n, m) в лексикографическом порядке, где все n + P_i(m) простые."""
    N = spec.N
    M = spec.M or 1
    if N is None:
        raise DomainError("prime tuple search needs N")
    if limit_count < 1:
        return []
    table.require(spec.argument_bound(N, M))
    cap = pattern_settings.OP_CAP if cap is None else cap
    check_cap(N * M**spec.r, cap, "prime tuple search", hint="lower N or M")
    points = _grid(M, spec.r, 0, M**spec.r)
    shifts = np.stack([poly.evaluate_many(points) for poly in spec.polys])
    rows = max(1, BLOCK // points.shape[0])
    found = []
    for start in range(1, N + 1, rows):
        n = np.arange(start, min(start + rows, N + 1), dtype=np.int64)
        mask = np.ones((n.size, points.shape[0]), dtype=bool)
        for shift in shifts:
            arguments = n[:, None] + shift[None, :]
            inside = arguments >= 2
            mask &= inside & table.is_prime[np.where(inside, arguments, 0)]
        for i, j in zip(*np.nonzero(mask)):
            found.append((int(n[i]), tuple(int(v) for v in points[j])))
            if len(found) == limit_count:
                return found
    return found


# === Суммы Вейля ===

def weyl_sum(phase, dims, cap=None):
    """|E_{n in [N_1] x ... x [N_r]} e(P(n))| прямым суммированием."""
    dims = tuple(int(n) for n in dims)
    if len(dims) != phase.arity or any(n < 1 for n in dims):
        raise DomainError(f"need {phase.arity} positive ranges, got {dims}")
    total = math.prod(dims)
    cap = pattern_settings.OP_CAP if cap is None else cap
    check_cap(total, cap, "Weyl sum")
    acc = 0j
    for start, stop in _blocks(total, BLOCK):
        index = np.arange(start, stop, dtype=np.int64)
        points = np.empty((index.size, len(dims)), dtype=np.int64)
        for j in range(len(dims) - 1, -1, -1):
            points[:, j] = index % dims[j] + 1
            index //= dims[j]
        acc += complex(np.exp(2j * np.pi * phase.phases(points)).sum())
    return abs(acc) / total


def _circle_distance(x):
    """‖x‖_{R/Z}."""
    frac = x - math.floor(x)
    return min(frac, 1 - frac)


@attrs.frozen
class MajorArcCertificate:
    """Знаменатель q и достигнутые ‖qα_i‖·N^i по мономам"""
    q: int
    bounds: dict
    weyl: float | None = None

    @property
    def worst(self):
        return max(self.bounds.values(), default=0.0)

    def as_dict(self):
        return {'q': self.q, 'bounds': self.bounds, 'worst': self.worst, 'weyl_sum': self.weyl}


def _monomial(exponent):
    return '*'.join(f"n{j + 1}^{e}" for j, e in enumerate(exponent) if e) or '1'


def best_denominator(phase, dims, q_max):
    """q из [1, q_max] с наименьшим max_i ‖qα_i‖·N^i; при равенстве - меньший q."""
    if q_max < 1:
        raise DomainError(f"q_max must be >= 1, got {q_max}")
    terms = [(e, c) for e, c in phase.coefficients if sum(e)]
    scales = [math.prod(n**k for n, k in zip(dims, e)) for e, _ in terms]
    # свободный член на |сумму Вейля| не влияет: его граница всегда 0
    constant = {} if terms and len(terms) == len(phase.coefficients) else {_monomial(()): 0.0}
    best = None
    for q in range(1, q_max + 1):
        bounds = dict(constant)
        for (exponent, alpha), scale in zip(terms, scales):
            distance = _circle_distance(q * alpha)
            bounds[_monomial(exponent)] = float(distance * scale)
        worst = max(bounds.values(), default=0.0)
        if best is None or worst < best[0]:
            best = (worst, q, bounds)
        if worst == 0:
            break
    return MajorArcCertificate(best[1], best[2])


def major_arc_detect(phase, dims, eps, q_max, cap=None):
    """Сертификат большой дуги или None, если |сумма Вейля| < eps."""
    if not 0 < eps <= 1:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    weyl = weyl_sum(phase, dims, cap)
    if weyl < eps:
        return None
    return attrs.evolve(best_denominator(phase, dims, q_max), weyl=weyl)


# === Приближённая глобальная симметрия ===

def random_polynomials(degree, arity, count, bound, rng):
    """count многочленов степени ровно degree с коэффициентами из [-A, A]."""
    if degree < 0 or bound < 1:
        raise DomainError("random polynomials need degree >= 0 and A >= 1")
    monomials = [e for e in itertools.product(range(degree + 1), repeat=arity) if sum(e) <= degree]
    top = [e for e in monomials if sum(e) == degree]
    polys = []
    for _ in range(count):
        terms = {e: int(rng.integers(-bound, bound + 1)) for e in monomials}
        leading = top[int(rng.integers(len(top)))]
        terms[leading] = int(rng.choice([-1, 1])) * int(rng.integers(1, bound + 1))
        polys.append(IntPolynomial.from_terms(arity, terms))
    return polys


def _q0_radius(M, d, A, k):
    raw = M**d // A ** (2 * k)
    return max(raw, 1), raw < 1


def _inf_tv(counts, radius, q_max):
    """min_q d_TV(Q, Q + q·[-R, R]) и лучшее q по плотным кратностям Q."""
    width = 2 * radius + 1
    size = int(counts.sum())
    best = (math.inf, None)
    for q in range(1, q_max + 1):
        smeared = comb_window(counts, q, radius)
        padded = np.zeros_like(smeared)
        padded[q * radius: q * radius + counts.size] = counts * width
        tv = float(np.abs(padded - smeared).sum()) / (size * width)
        if tv < best[0]:
            best = (tv, q)
    return min(best[0], 2.0), best[1]


def mung_tv_average(d, r, k, A, M, polys, q_max, cfg):
    """
    E_h inf_{q <= q_max} d_TV(Q(h), Q(h) + q·Q_0) по выборке h из ([M]^r)^k.

    Q(h) = P_1(h_1)[-M, M] + ... + P_k(h_k)[-M, M],
    Q_0 = [-⌊M^d / A^{2k}⌋, ⌊M^d / A^{2k}⌋] с радиусом не меньше 1.
    """
    polys = list(polys)
    if len(polys) != k:
        raise DomainError(f"expected k={k} polynomials, got {len(polys)}")
    for i, poly in enumerate(polys, 1):
        if poly.arity != r:
            raise DomainError(f"polynomial {i} has arity {poly.arity}, expected r={r}")
        if poly.degree != d - 1:
            raise DomainError(f"polynomial {i} must have degree exactly {d - 1}")
        if poly.max_abs_coefficient > A:
            raise DomainError(f"polynomial {i} has a coefficient above A={A}")
    if q_max < 1 or M < 1:
        raise DomainError("mung needs q_max >= 1 and M >= 1")
    radius, clamped = _q0_radius(M, d, A, k)
    if clamped:
        logger.warning("Q_0 radius M^d / A^(2k) < 1 clamped to 1")

    def job(rng, index, length):
        values, rows = [], []
        for offset in range(length):
            h = rng.integers(1, M + 1, size=(k, r))
            steps = [int(poly.evaluate_many(h[j:j + 1])[0]) for j, poly in enumerate(polys)]
            _, counts = gap_dense(GapSpec(steps, M))
            tv, q = _inf_tv(counts, radius, q_max)
            values.append(tv)
            rows.append({'sample': index * cfg.chunk_size + offset, 'steps': steps, 'q': q, 'tv': tv})
        return Moments.of(values), rows

    with stopwatch() as timer:
        parts = run_chunks(job, cfg, 'mung-tv-average')
    estimate = merge_moments(m for m, _ in parts).to_estimate()
    config = {**cfg.echo(), 'd': d, 'r': r, 'k': k, 'A': A, 'M': M, 'q_max': q_max,
              'polys': [str(p) for p in polys]}
    diagnostics = {'q0_radius': radius, 'q0_radius_clamped': clamped}
    trace = [row for _, rows in parts for row in rows]
    return EstimateReport.from_estimate(estimate, runtime_ms=timer['ms'], config=config,
                                        diagnostics=diagnostics, trace=trace)


# === Условие полиномиальных форм ===

def polyforms_check(system, ctx, table, M, cfg, majorants=None):
    """
    E_{x in Z/NZ} E_{m in [M]^r} Π_i ν_{b_i}(x + P_i(m)); ожидается 1.

    system - список пар (b_i, P_i); majorants заменяет ν_{b_i} заданными
    функциями.
    """
    if not system:
        raise DomainError("polynomial forms check needs at least one form")
    polys = [poly for _, poly in system]
    arity = polys[0].arity
    if any(p.arity != arity for p in polys):
        raise DomainError("all forms must share the arity")
    for i, j in itertools.combinations(range(len(polys)), 2):
        if (polys[i] - polys[j]).is_constant:
            raise DomainError(f"forms {i + 1} and {j + 1} differ by a constant")
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    N = ctx.N
    if majorants is None:
        majorants = [nu_b(attrs.evolve(ctx, b=b), table, workers=cfg.workers) for b, _ in system]
    stacked = np.stack([f.values for f in majorants])
    total_points = M**arity

    with stopwatch() as timer:
        if cfg.is_exact:
            check_cap(N * total_points, cfg.op_cap, "exact polynomial forms average")
            x = np.arange(N, dtype=np.int64)
            rows = max(1, BLOCK // N)

            def block(bounds):
                points = _grid(M, arity, *bounds)
                product = np.ones((points.shape[0], N))
                for values, poly in zip(stacked, polys):
                    product *= values[(x[None, :] + poly.evaluate_many(points)[:, None]) % N]
                return float(product.sum())

            sums = ordered_map(block, _blocks(total_points, rows), cfg.workers)
            estimate = Estimate(math.fsum(sums) / (N * total_points))
            trace = [{'block': i, 'sum': s} for i, s in enumerate(sums)]
        else:
            def job(rng, index, length):
                x = rng.integers(0, N, size=length)
                points = rng.integers(1, M + 1, size=(length, arity))
                product = np.ones(length)
                for values, poly in zip(stacked, polys):
                    product *= values[(x + poly.evaluate_many(points)) % N]
                return Moments.of(product)

            parts = run_chunks(job, cfg, 'polyforms-check')
            estimate = merge_moments(parts).to_estimate()
            trace = [{'chunk': i, 'samples': m.count, 'mean': m.mean} for i, m in enumerate(parts)]

    config = {**cfg.echo(), **ctx.echo(), 'M': M,
              'forms': [{'b': b, 'poly': str(p)} for b, p in system]}
    return EstimateReport.from_estimate(estimate, runtime_ms=timer['ms'], config=config,
                                        diagnostics={'forms': len(system)}, trace=trace)


# === Усреднённая норма Гауэрса для Λ'_{b,W} - 1 ===

def avg_gowers_of_w_tricked(ctx, table, polys, M, D, cfg, lambda_override=None, h_samples=None):
    """Усреднённая локальная норма функции Λ'_{b,W} - 1 (lambda_override заменяет Λ'_{b,W})."""
    polys = list(polys)
    if len(polys) != D:
        raise DomainError(f"expected D={D} side polynomials, got {len(polys)}")
    lam = lambda_prime_bw(ctx, table) if lambda_override is None else lambda_override
    if not isinstance(lam, CyclicFn) or lam.modulus != ctx.N:
        raise DomainError("replacement function must be a CyclicFn modulo N")
    with stopwatch() as timer:
        result = averaged_local_gowers(lam - 1.0, polys, M, cfg, h_samples)
    config = {**cfg.echo(), **ctx.echo(), 'M': M, 'D': D, 'polys': [str(p) for p in polys],
              'h_samples': result.h_count if result.h_sampled else None}
    return EstimateReport.from_estimate(result.estimate, runtime_ms=timer['ms'], config=config,
                                        diagnostics=result.diagnostics(), trace=list(result.trace))
