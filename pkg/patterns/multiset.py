"""
Конечные мультимножества целых чисел.

Храним пары (значение, кратность): values отсортированы и уникальны,
counts строго положительны. Сумма - свёртка кратностей; расстояние по
вариации - Σ|p_A - p_B| без деления пополам (максимум 2).
"""
import logging

import attrs
import numpy as np

from .conf import pattern_settings
from .exceptions import DomainError, MultiplicityOverflowError, ResourceLimitError, check_cap

logger = logging.getLogger(__name__)

INT64_MAX = 2**63 - 1
PAIR_CHUNK = 2**20


def _int_array(values):
    array = np.ascontiguousarray(values, dtype=np.int64)
    array.setflags(write=False)
    return array


def _merge(values, counts):
    """Склейка повторов: уникальные значения и суммы кратностей."""
    values = np.asarray(values, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.int64)
    unique, inverse = np.unique(values, return_inverse=True)
    merged = np.zeros(unique.size, dtype=np.int64)
    np.add.at(merged, inverse, counts)
    keep = merged > 0
    return unique[keep], merged[keep]


@attrs.frozen(eq=False)
class Multiset:
    """Мультимножество: значение -> положительная кратность"""
    values: np.ndarray = attrs.field(converter=_int_array, repr=False)
    counts: np.ndarray = attrs.field(converter=_int_array, repr=False)

    def __attrs_post_init__(self):
        if self.values.shape != self.counts.shape:
            raise DomainError("values and counts must have the same length")
        if self.counts.size and self.counts.min() <= 0:
            raise DomainError("multiplicities must be strictly positive")
        if self.values.size > 1 and np.any(np.diff(self.values) <= 0):
            raise DomainError("multiset values must be sorted and unique")

    # --- конструкторы ---

    @classmethod
    def from_arrays(cls, values, counts=None):
        values = np.asarray(values, dtype=np.int64).ravel()
        counts = np.ones(values.size, dtype=np.int64) if counts is None else counts
        return cls(*_merge(values, np.asarray(counts, dtype=np.int64).ravel()))

    @classmethod
    def from_counts(cls, mapping):
        items = sorted((int(v), int(c)) for v, c in dict(mapping).items() if c)
        return cls.from_arrays([v for v, _ in items], [c for _, c in items])

    @classmethod
    def from_values(cls, iterable):
        return cls.from_arrays(list(iterable))

    @classmethod
    def from_dense(cls, lo, counts):
        counts = np.asarray(counts, dtype=np.int64)
        support = np.nonzero(counts)[0]
        return cls(support + lo, counts[support])

    # --- свойства ---

    @property
    def size(self):
        """|A| с учётом кратностей."""
        return int(self.counts.sum(dtype=np.int64))

    @property
    def support_size(self):
        return int(self.values.size)

    @property
    def is_empty(self):
        return self.values.size == 0

    @property
    def lo(self):
        return int(self.values[0])

    @property
    def hi(self):
        return int(self.values[-1])

    @property
    def span(self):
        return self.hi - self.lo + 1

    def require_nonempty(self):
        if self.is_empty:
            raise DomainError("operation needs a non-empty multiset")
        return self

    def as_dict(self):
        return {int(v): int(c) for v, c in zip(self.values, self.counts)}

    def multiplicity(self, x):
        i = int(np.searchsorted(self.values, x))
        if i < self.values.size and self.values[i] == x:
            return int(self.counts[i])
        return 0

    def dense(self):
        """(lo, массив кратностей на [lo, hi])."""
        self.require_nonempty()
        out = np.zeros(self.span, dtype=np.int64)
        out[self.values - self.lo] = self.counts
        return self.lo, out

    def __eq__(self, other):
        if not isinstance(other, Multiset):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash((self.values.tobytes(), self.counts.tobytes()))

    def __repr__(self):
        if self.support_size <= 12:
            return f"Multiset({self.as_dict()})"
        return f"Multiset(size={self.size}, support={self.support_size}, range=[{self.lo}, {self.hi}])"

    def __add__(self, other):
        if isinstance(other, Multiset):
            return sumset(self, other)
        return self.shift(other)

    def __sub__(self, other):
        if isinstance(other, Multiset):
            return difference(self, other)
        return self.shift(-other)

    # --- операции ---

    def shift(self, t):
        return Multiset(self.values + int(t), self.counts)

    def negate(self):
        return Multiset(-self.values[::-1], self.counts[::-1])

    def density(self, x):
        """p_A(x) = mult_A(x) / |A|."""
        self.require_nonempty()
        return self.multiplicity(x) / self.size

    def reduce_mod(self, modulus):
        """Образ при n -> n mod N; |A| сохраняется."""
        if modulus < 1:
            raise DomainError(f"modulus must be >= 1, got {modulus}")
        return Multiset.from_arrays(np.mod(self.values, modulus), self.counts)

    def sample(self, rng, n):
        """n независимых элементов с вероятностями p_A."""
        self.require_nonempty()
        cumulative = np.cumsum(self.counts)
        picks = rng.integers(0, int(cumulative[-1]), size=n)
        return self.values[np.searchsorted(cumulative, picks, side='right')]

    def expectation(self, f):
        """E_{a in A} f(a) для векторной f."""
        self.require_nonempty()
        return float(np.sum(np.asarray(f(self.values), dtype=np.float64) * self.counts) / self.size)


# === Конструкторы интервалов ===

def interval(lo, hi):
    """[lo, hi] с кратностью 1."""
    if lo > hi:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    return Multiset(np.arange(lo, hi + 1, dtype=np.int64), np.ones(hi - lo + 1, dtype=np.int64))


def box(radius):
    """[-M, M]."""
    if radius < 1:
        raise DomainError(f"box radius must be >= 1, got {radius}")
    return interval(-radius, radius)


# === Свёртки ===

def _check_sizes(a, b):
    if a.size * b.size > INT64_MAX:
        raise MultiplicityOverflowError("multiplicities of the sum overflow 64 bits")


def _is_dense(m):
    return m.span <= 4 * m.support_size


def sumset(a, b, support_cap=None):
    """A + B: кратность x равна Σ_y mult_A(y) mult_B(x - y)."""
    a.require_nonempty()
    b.require_nonempty()
    _check_sizes(a, b)
    support_cap = support_cap or pattern_settings.SUPPORT_CAP
    if _is_dense(a) and _is_dense(b) and a.span + b.span <= support_cap:
        lo_a, dense_a = a.dense()
        lo_b, dense_b = b.dense()
        return Multiset.from_dense(lo_a + lo_b, np.convolve(dense_a, dense_b))
    check_cap(a.support_size * b.support_size, support_cap, "multiset sum", hint="raise the support cap")
    # разреженный путь: внешние суммы кусками по носителю A
    rows = max(1, PAIR_CHUNK // b.support_size)
    values, counts = [], []
    for start in range(0, a.support_size, rows):
        va = a.values[start:start + rows, None]
        ca = a.counts[start:start + rows, None]
        values.append((va + b.values[None, :]).ravel())
        counts.append((ca * b.counts[None, :]).ravel())
    return Multiset.from_arrays(np.concatenate(values), np.concatenate(counts))


def difference(a, b, support_cap=None):
    """A - B как мультимножество."""
    return sumset(a, b.negate(), support_cap)


def dilate(q, a):
    """q·A: значения умножаются на q, кратности сохраняются."""
    a.require_nonempty()
    q = int(q)
    if q == 0:
        return Multiset(np.zeros(1, dtype=np.int64), np.array([a.size], dtype=np.int64))
    if max(abs(a.lo), abs(a.hi)) * abs(q) > INT64_MAX:
        raise DomainError(f"dilation by {q} leaves the int64 range")
    values = a.values * q
    counts = a.counts
    if q < 0:
        values, counts = values[::-1], counts[::-1]
    return Multiset(values, counts)


def tv_distance(a, b):
    """Σ_x |p_A(x) - p_B(x)| (без деления пополам)."""
    a.require_nonempty()
    b.require_nonempty()
    values = np.concatenate([a.values, b.values])
    weights = np.concatenate([a.counts / a.size, -(b.counts / b.size)])
    _, inverse = np.unique(values, return_inverse=True)
    diff = np.zeros(inverse.max() + 1, dtype=np.float64)
    np.add.at(diff, inverse, weights)
    return float(np.sum(np.abs(diff)))


# === Обобщённые арифметические прогрессии ===

def comb_window(counts, step, radius):
    """
    Свёртка плотного массива кратностей с step·[-radius, radius].

    Результат сдвинут на step·radius влево относительно входа и имеет
    длину len(counts) + 2·|step|·radius. Каждая цепочка вычетов по
    модулю step сводится к скользящей сумме ширины 2·radius + 1.
    """
    counts = np.asarray(counts, dtype=np.int64)
    step = abs(int(step))
    width = 2 * radius + 1
    if step == 0:
        return counts * width
    out = np.zeros(counts.size + 2 * step * radius, dtype=np.int64)
    for residue in range(min(step, counts.size)):
        chain = counts[residue::step]
        prefix = np.concatenate(([0], np.cumsum(chain)))
        index = np.arange(chain.size + 2 * radius)
        upper = np.minimum(index + 1, chain.size)
        lower = np.clip(index - 2 * radius, 0, chain.size)
        out[residue::step][: index.size] = prefix[upper] - prefix[lower]
    return out


@attrs.frozen
class GapSpec:
    """Шаги a_1..a_k и радиус M прогрессии a_1[-M,M] + ... + a_k[-M,M]"""
    steps: tuple = attrs.field(converter=lambda steps: tuple(int(a) for a in steps))
    radius: int = attrs.field(converter=int)

    @steps.validator
    def _check_steps(self, attribute, value):
        if not value:
            raise DomainError("a generalised progression needs at least one step")

    @radius.validator
    def _check_radius(self, attribute, value):
        if value < 1:
            raise DomainError(f"progression radius must be >= 1, got {value}")

    @property
    def width(self):
        """Длина отрезка, содержащего носитель."""
        return 2 * self.radius * sum(abs(a) for a in self.steps) + 1

    @property
    def predicted_support(self):
        return min(self.width, (2 * self.radius + 1) ** len(self.steps))

    @property
    def size(self):
        return (2 * self.radius + 1) ** len(self.steps)


def gap_dense(spec, support_cap=None):
    """(lo, плотные кратности) прогрессии на отрезке ширины spec.width."""
    support_cap = support_cap or pattern_settings.SUPPORT_CAP
    check_cap(spec.width, support_cap, "progression span", hint="raise the support cap")
    if spec.size > INT64_MAX:
        raise MultiplicityOverflowError("progression size overflows 64 bits")
    counts = np.ones(1, dtype=np.int64)
    lo = 0
    for step in spec.steps:
        counts = comb_window(counts, step, spec.radius)
        lo -= abs(step) * spec.radius
    return lo, counts


def gap_build(spec, support_cap=None):
    """k-кратная свёртка растянутых коробок a_i·[-M, M]."""
    support_cap = support_cap or pattern_settings.SUPPORT_CAP
    if spec.predicted_support > support_cap:
        raise ResourceLimitError(
            f"progression support {spec.predicted_support} exceeds cap {support_cap}",
            cost=spec.predicted_support,
            cap=support_cap,
        )
    if spec.width <= support_cap:
        return Multiset.from_dense(*gap_dense(spec, support_cap))
    # широкий разреженный носитель: честные свёртки по парам
    result = None
    for step in spec.steps:
        side = dilate(step, box(spec.radius))
        result = side if result is None else sumset(result, side, support_cap)
    return result
