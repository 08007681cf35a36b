"""
Решето и классические мультипликативные функции.

FactorTable хранит наименьший простой делитель для всех n <= limit;
SieveWindow - сегмент [lo, hi] со значениями Λ'(n). Значения Λ в натах,
в double: дальше они только усредняются.
"""
import functools
import logging
import math

import attrs
import numpy as np

from .conf import pattern_settings
from .estimation import ordered_map
from .exceptions import DomainError, PrimorialOverflowError

logger = logging.getLogger(__name__)

INT64_MAX = 2**63 - 1
SPF_LIMIT = 2**32 - 1


def _readonly(array):
    array.setflags(write=False)
    return array


def primes_up_to(n):
    """Простые <= n обычным решетом Эратосфена."""
    if n < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if is_prime[i]:
            is_prime[i * i::i] = False
    return np.nonzero(is_prime)[0].astype(np.int64)


# === Таблица наименьших простых делителей ===

@attrs.frozen(eq=False)
class FactorTable:
    """spf[n] - наименьший простой делитель n при 2 <= n <= limit"""
    limit: int
    spf: np.ndarray = attrs.field(converter=_readonly, repr=False)

    @functools.cached_property
    def is_prime(self):
        flags = self.spf == np.arange(self.limit + 1, dtype=self.spf.dtype)
        flags[:2] = False
        return _readonly(flags)

    @functools.cached_property
    def primes(self):
        return _readonly(np.nonzero(self.is_prime)[0].astype(np.int64))

    @property
    def prime_count(self):
        return int(self.primes.size)

    def covers(self, n):
        return 1 <= n <= self.limit

    def require(self, n):
        if not self.covers(n):
            raise DomainError(f"n={n} outside factor table range [1, {self.limit}]")

    def factorize(self, n):
        """[(p, e), ...] по возрастанию p."""
        self.require(n)
        factors = []
        while n > 1:
            p = int(self.spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            factors.append((p, e))
        return factors

    # --- векторные версии для экспериментов ---

    def _chain(self, upto):
        """(степенной ли n, бесквадратный ли n, чётность числа простых) для n <= upto."""
        n = np.arange(upto + 1, dtype=np.int64)
        spf = self.spf[: upto + 1].astype(np.int64)
        first = spf.copy()
        prime_power = np.ones(upto + 1, dtype=bool)
        squarefree = np.ones(upto + 1, dtype=bool)
        parity = np.zeros(upto + 1, dtype=np.int8)
        cur = n.copy()
        previous = np.zeros(upto + 1, dtype=np.int64)
        active = cur > 1
        while active.any():
            p = np.where(active, spf[np.where(active, cur, 0)], 0)
            # spf вдоль цепочки не убывает: повтор простого идёт подряд
            squarefree &= ~(active & (p == previous))
            prime_power &= ~active | (p == first)
            parity ^= active.astype(np.int8)
            previous = np.where(active, p, previous)
            cur = np.where(active, cur // np.where(active, p, 1), cur)
            active = cur > 1
        return prime_power, squarefree, parity

    def mangoldt_prime_array(self, upto=None):
        """Λ'(n) для 0 <= n <= upto; Λ'(0) = Λ'(1) = 0."""
        upto = self.limit if upto is None else upto
        self.require(max(upto, 1))
        values = np.zeros(upto + 1, dtype=np.float64)
        flags = self.is_prime[: upto + 1]
        values[flags] = np.log(np.nonzero(flags)[0].astype(np.float64))
        return values

    def mangoldt_array(self, upto=None):
        upto = self.limit if upto is None else upto
        self.require(max(upto, 1))
        prime_power, _, _ = self._chain(upto)
        prime_power[:2] = False
        values = np.zeros(upto + 1, dtype=np.float64)
        values[prime_power] = np.log(self.spf[: upto + 1][prime_power].astype(np.float64))
        return values

    def mobius_array(self, upto=None):
        upto = self.limit if upto is None else upto
        self.require(max(upto, 1))
        _, squarefree, parity = self._chain(upto)
        values = np.where(parity == 1, -1, 1).astype(np.int8)
        values[~squarefree] = 0
        values[0] = 0
        values[1] = 1
        return values


def build_factor_table(limit):
    """Таблица spf на [2, limit]."""
    if limit < 2:
        raise DomainError(f"factor table needs limit >= 2, got {limit}")
    if limit > SPF_LIMIT:
        raise DomainError(f"factor table limit {limit} exceeds {SPF_LIMIT}")
    spf = np.zeros(limit + 1, dtype=np.uint32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            multiples = spf[p * p::p]
            multiples[multiples == 0] = p
    unset = spf == 0
    unset[:2] = False
    spf[unset] = np.nonzero(unset)[0].astype(np.uint32)
    logger.debug("factor table built up to %d", limit)
    return FactorTable(limit, spf)


# === Сегментированное решето ===

@attrs.frozen(eq=False)
class SieveWindow:
    """Λ'(n) для n в [lo, hi]"""
    lo: int
    hi: int
    mangoldt_prime: np.ndarray = attrs.field(converter=_readonly, repr=False)

    def __attrs_post_init__(self):
        if self.mangoldt_prime.size != self.hi - self.lo + 1:
            raise DomainError("window values do not match [lo, hi]")

    @property
    def prime_count(self):
        return int(np.count_nonzero(self.mangoldt_prime))

    def value(self, n):
        if not self.lo <= n <= self.hi:
            raise DomainError(f"n={n} outside window [{self.lo}, {self.hi}]")
        return float(self.mangoldt_prime[n - self.lo])


def sieve_window(lo, hi, base_primes=None):
    """Одно окно сегментированного решета."""
    if lo < 0 or hi < lo:
        raise DomainError(f"invalid sieve window [{lo}, {hi}]")
    if base_primes is None:
        base_primes = primes_up_to(math.isqrt(hi))
    flags = np.ones(hi - lo + 1, dtype=bool)
    if lo < 2:
        flags[: 2 - lo] = False
    for p in base_primes:
        p = int(p)
        if p * p > hi:
            break
        start = max(p * p, -(-lo // p) * p)
        flags[start - lo::p] = False
    values = np.zeros(hi - lo + 1, dtype=np.float64)
    values[flags] = np.log(np.arange(lo, hi + 1, dtype=np.float64)[flags])
    return SieveWindow(lo, hi, values)


def iter_windows(lo, hi, size=None):
    """Границы окон [(a, b), ...], покрывающих [lo, hi]."""
    size = size or pattern_settings.SIEVE_WINDOW
    a = lo
    while a <= hi:
        b = min(hi, a + size - 1)
        yield a, b
        a = b + 1


def segmented_mangoldt_prime(lo, hi, size=None, workers=1):
    """Λ' на [lo, hi] окнами; окна независимы и считаются параллельно."""
    base = primes_up_to(math.isqrt(hi))
    windows = ordered_map(lambda bounds: sieve_window(*bounds, base_primes=base),
                          iter_windows(lo, hi, size), workers)
    return windows


def count_primes(limit, size=None, workers=1):
    """π(limit) без полной таблицы."""
    if limit < 2:
        return 0
    return sum(window.prime_count for window in segmented_mangoldt_prime(2, limit, size, workers))


# === Точечные функции ===

def mangoldt_prime(n, table):
    """Λ'(n): log n для простого n, иначе 0."""
    table.require(n)
    return math.log(n) if table.is_prime[n] else 0.0


def mangoldt(n, table):
    """Λ(n): log p при n = p^j, иначе 0."""
    table.require(n)
    factors = table.factorize(n)
    if len(factors) == 1:
        return math.log(factors[0][0])
    return 0.0


def mobius(n, table):
    table.require(n)
    result = 1
    for _, e in table.factorize(n):
        if e > 1:
            return 0
        result = -result
    return result


def _trial_factor(n):
    # 2, 3, затем 6k +- 1
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            yield p, e
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            if e:
                yield q, e
        p += 6
    if n > 1:
        yield n, 1


def is_prime(n):
    """Проверка делением; для одиночных n вне таблицы."""
    if n < 2:
        return False
    factors = list(_trial_factor(n))
    return len(factors) == 1 and factors[0][1] == 1


def euler_phi(n, table=None):
    if n < 1:
        raise DomainError(f"euler_phi needs n >= 1, got {n}")
    factors = table.factorize(n) if table is not None and table.covers(n) else _trial_factor(n)
    result = n
    for p, _ in factors:
        result = result // p * (p - 1)
    return result


def primorial(w):
    """W = произведение простых p <= w; переполнение int64 - ошибка."""
    if w < 2:
        raise DomainError(f"primorial needs w >= 2, got {w}")
    result = 1
    # произведение простых до 53 уже не помещается в int64
    for p in primes_up_to(min(w, 64)):
        result *= int(p)
        if result > INT64_MAX:
            raise PrimorialOverflowError(f"primorial({w}) does not fit in 64 bits")
    return result
