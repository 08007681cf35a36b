"""
Многочлены от r переменных с целыми коэффициентами.

Синтаксис: `2*m1^2+3*m2-5`; переменная без номера (`m`) - это m1.
Вычисление точное, с проверкой выхода за 128 бит; по модулю q -
с редукцией каждого слагаемого.
"""
import math
import re
from fractions import Fraction

import attrs
import numpy as np

from .exceptions import DomainError, EvaluationOverflowError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1
INT128_LIMIT = 2**127
VECTOR_LIMIT = 2**62
MOD_VECTOR_LIMIT = 2**31

ZERO_DEGREE = -math.inf

CONSTANTS = {
    'phi': (1 + math.sqrt(5)) / 2,
    'sqrt2': math.sqrt(2),
    'pi': math.pi,
}

_TOKEN = re.compile(r"\s*(?:(?P<number>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^])|(?P<bad>\S))")
_VARIABLE = re.compile(r"^([a-z])(\d*)$")


def _checked128(value):
    if not -INT128_LIMIT <= value < INT128_LIMIT:
        raise EvaluationOverflowError("polynomial evaluation exceeds 128-bit range")
    return value


def _powmod_array(base, exponent, q):
    result = np.ones_like(base)
    for _ in range(exponent):
        result = (result * base) % q
    return result


# === Разбор текста ===

class _Parser:
    """Рекурсивный спуск по сумме одночленов"""

    def __init__(self, text, allow_real):
        self.text = text
        self.allow_real = allow_real
        self.tokens = []
        for match in _TOKEN.finditer(text):
            kind = match.lastgroup
            if kind == 'bad':
                raise DomainError(f"unexpected character {match.group('bad')!r} in {text!r}")
            self.tokens.append((kind, match.group(kind)))
        self.pos = 0
        self.letters = set()

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        token = self.peek()
        self.pos += 1
        return token

    def parse(self):
        if not self.tokens:
            raise DomainError("empty polynomial")
        terms = []
        sign = 1
        kind, value = self.peek()
        if kind == 'op' and value in '+-':
            self.take()
            sign = -1 if value == '-' else 1
        terms.append(self.term(sign))
        while self.pos < len(self.tokens):
            kind, value = self.take()
            if kind != 'op' or value not in '+-':
                raise DomainError(f"expected '+' or '-' in {self.text!r}, got {value!r}")
            terms.append(self.term(-1 if value == '-' else 1))
        if len(self.letters) > 1:
            raise DomainError(f"mixed variable names {sorted(self.letters)} in {self.text!r}")
        return terms

    def term(self, sign):
        exponents = {}
        coefficient = sign * self.factor(exponents)
        while True:
            kind, value = self.peek()
            if kind == 'op' and value == '*':
                self.take()
                coefficient = coefficient * self.factor(exponents)
            elif kind == 'op' and value == '/':
                self.take()
                kind, value = self.take()
                if not self.allow_real:
                    raise DomainError(f"non-integer coefficient in {self.text!r}")
                if kind != 'number' or '.' in value or int(value) == 0:
                    raise DomainError(f"division must be by a nonzero integer in {self.text!r}")
                if isinstance(coefficient, float):
                    coefficient = coefficient / int(value)
                else:
                    coefficient = Fraction(coefficient) / int(value)
            else:
                break
        return coefficient, exponents

    def factor(self, exponents):
        """Число, константа или переменная; возвращает множитель коэффициента."""
        kind, value = self.take()
        if kind == 'number':
            if '.' in value:
                if not self.allow_real:
                    raise DomainError(f"non-integer coefficient {value!r} in {self.text!r}")
                return float(value)
            return int(value)
        if kind == 'name':
            if self.allow_real and value in CONSTANTS:
                return CONSTANTS[value]
            match = _VARIABLE.match(value)
            if match is None:
                raise DomainError(f"unknown name {value!r} in {self.text!r}")
            self.letters.add(match.group(1))
            index = int(match.group(2) or 1)
            if index < 1:
                raise DomainError(f"variable index must start at 1 in {self.text!r}")
            power = 1
            kind, op = self.peek()
            if kind == 'op' and op == '^':
                self.take()
                kind, raw = self.take()
                if kind != 'number' or '.' in raw:
                    raise DomainError(f"exponent must be a natural number in {self.text!r}")
                power = int(raw)
            exponents[index] = exponents.get(index, 0) + power
            return 1
        raise DomainError(f"expected a number or variable in {self.text!r}, got {value!r}")


def _parse_terms(text, allow_real):
    parser = _Parser(text, allow_real)
    raw = parser.parse()
    top = max((max(exps) for _, exps in raw if exps), default=0)
    return raw, top


def _to_exponent(exps, arity):
    if exps and max(exps) > arity:
        raise DomainError(f"variable index {max(exps)} exceeds arity {arity}")
    return tuple(exps.get(j, 0) for j in range(1, arity + 1))


def _variable_name(index, arity, letter='m'):
    return letter if arity == 1 else f"{letter}{index}"


def _format(terms, arity, letter, render_coefficient):
    if not terms:
        return '0'
    pieces = []
    for exponent, coefficient in sorted(terms, key=lambda item: (-sum(item[0]), item[0])):
        monomial = '*'.join(
            _variable_name(j + 1, arity, letter) + (f"^{e}" if e > 1 else '')
            for j, e in enumerate(exponent) if e
        )
        text = render_coefficient(coefficient, bool(monomial))
        if monomial:
            text = f"{text}*{monomial}" if text not in ('', '-') else f"{text}{monomial}"
        pieces.append(text)
    out = pieces[0]
    for piece in pieces[1:]:
        out += piece if piece.startswith('-') else '+' + piece
    return out


def _render_int(coefficient, has_monomial):
    if has_monomial and coefficient == 1:
        return ''
    if has_monomial and coefficient == -1:
        return '-'
    return str(coefficient)


# === Целочисленные многочлены ===

def _normalise_terms(items):
    merged = {}
    for exponent, coefficient in items:
        merged[exponent] = merged.get(exponent, 0) + coefficient
    return tuple(sorted((e, c) for e, c in merged.items() if c != 0))


@attrs.frozen
class IntPolynomial:
    """Многочлен из Z[m_1..m_r]; нулевые коэффициенты не хранятся"""
    arity: int
    coefficients: tuple = attrs.field(converter=_normalise_terms)

    def __attrs_post_init__(self):
        if self.arity < 1:
            raise DomainError("polynomial arity must be >= 1")
        for exponent, coefficient in self.coefficients:
            if len(exponent) != self.arity or any(e < 0 for e in exponent):
                raise DomainError(f"bad exponent vector {exponent} for arity {self.arity}")
            if not isinstance(coefficient, int):
                raise DomainError(f"non-integer coefficient {coefficient!r}")
            if not INT64_MIN <= coefficient <= INT64_MAX:
                raise EvaluationOverflowError(f"coefficient {coefficient} does not fit in 64 bits")

    # --- конструкторы ---

    @classmethod
    def from_terms(cls, arity, terms):
        return cls(arity, tuple((tuple(e), int(c)) for e, c in dict(terms).items()))

    @classmethod
    def zero(cls, arity=1):
        return cls(arity, ())

    @classmethod
    def constant(cls, value, arity=1):
        return cls(arity, (((0,) * arity, value),))

    @classmethod
    def parse(cls, text, arity=None):
        raw, top = _parse_terms(text, allow_real=False)
        arity = arity or max(top, 1)
        return cls(arity, tuple((_to_exponent(exps, arity), c) for c, exps in raw))

    # --- свойства ---

    @property
    def terms(self):
        return dict(self.coefficients)

    @property
    def degree(self):
        """Полная степень; у нулевого многочлена - -inf."""
        if not self.coefficients:
            return ZERO_DEGREE
        return max(sum(e) for e, _ in self.coefficients)

    @property
    def is_zero(self):
        return not self.coefficients

    @property
    def is_constant(self):
        return all(sum(e) == 0 for e, _ in self.coefficients)

    @property
    def max_abs_coefficient(self):
        return max((abs(c) for _, c in self.coefficients), default=0)

    def __str__(self):
        return _format(self.coefficients, self.arity, 'm', _render_int)

    def __neg__(self):
        return IntPolynomial(self.arity, tuple((e, -c) for e, c in self.coefficients))

    def __sub__(self, other):
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        if other.arity != self.arity:
            raise DomainError("cannot subtract polynomials of different arity")
        return IntPolynomial(self.arity, self.coefficients + tuple((e, -c) for e, c in other.coefficients))

    # --- вычисление ---

    def _check_point(self, point):
        if len(point) != self.arity:
            raise DomainError(f"point of length {len(point)} for arity {self.arity}")

    def evaluate(self, point):
        """Точное значение; выход за 128 бит - EvaluationOverflowError."""
        self._check_point(point)
        point = [int(x) for x in point]
        total = 0
        for exponent, coefficient in self.coefficients:
            term = coefficient
            for x, e in zip(point, exponent):
                for _ in range(e):
                    term = _checked128(term * x)
            total = _checked128(total + term)
        return total

    def evaluate_mod(self, point, q):
        if q < 1:
            raise DomainError(f"modulus must be >= 1, got {q}")
        self._check_point(point)
        total = 0
        for exponent, coefficient in self.coefficients:
            term = coefficient % q
            for x, e in zip(point, exponent):
                term = term * pow(int(x) % q, e, q) % q
            total = (total + term) % q
        return total

    def magnitude_bound(self, radius):
        """Верхняя граница |P(x)| при |x_j| <= radius."""
        return sum(abs(c) * radius ** sum(e) for e, c in self.coefficients)

    def evaluate_many(self, points):
        """P в строках массива points формы (n, r) в int64 с проверкой границы."""
        points = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        radius = int(np.abs(points).max()) if points.size else 0
        if self.magnitude_bound(radius) >= VECTOR_LIMIT:
            raise EvaluationOverflowError("vectorised evaluation would leave the int64 range")
        total = np.zeros(points.shape[0], dtype=np.int64)
        for exponent, coefficient in self.coefficients:
            term = np.full(points.shape[0], coefficient, dtype=np.int64)
            for j, e in enumerate(exponent):
                if e:
                    term = term * points[:, j] ** e
            total += term
        return total

    def evaluate_many_mod(self, points, q):
        if not 1 <= q < MOD_VECTOR_LIMIT:
            raise DomainError(f"vectorised modulus must lie in [1, 2^31), got {q}")
        points = np.asarray(points, dtype=np.int64).reshape(-1, self.arity) % q
        total = np.zeros(points.shape[0], dtype=np.int64)
        for exponent, coefficient in self.coefficients:
            term = np.full(points.shape[0], coefficient % q, dtype=np.int64)
            for j, e in enumerate(exponent):
                if e:
                    term = term * _powmod_array(points[:, j], e, q) % q
            total = (total + term) % q
        return total

    def degree_component(self, d):
        """Однородная часть степени d."""
        if d < 0:
            raise DomainError(f"degree must be >= 0, got {d}")
        return IntPolynomial(self.arity, tuple((e, c) for e, c in self.coefficients if sum(e) == d))


def parse_polynomials(texts, arity=None):
    """Разбор списка многочленов с общей арностью."""
    parsed = [_parse_terms(text, allow_real=False) for text in texts]
    arity = arity or max([top for _, top in parsed] + [1])
    return [IntPolynomial(arity, tuple((_to_exponent(exps, arity), c) for c, exps in raw))
            for raw, _ in parsed]


@attrs.frozen
class TopDegreeCheck:
    """Результат проверки различности компонент степени d"""
    distinct: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.distinct


def check_top_degree_distinct(polys, d):
    """Различны ли компоненты степени d; свидетель - первая пара (i, j), с 1."""
    if len({p.arity for p in polys}) > 1:
        raise DomainError("all polynomials must share the same arity")
    components = [p.degree_component(d) for p in polys]
    for i in range(len(components)):
        for j in range(i + 1, len(components)):
            if components[i] == components[j]:
                return TopDegreeCheck(False, (i + 1, j + 1))
    return TopDegreeCheck(True)


# === Фазы с вещественными коэффициентами ===

def _render_real(coefficient, has_monomial):
    if isinstance(coefficient, Fraction) and coefficient.denominator != 1:
        return f"{coefficient.numerator}/{coefficient.denominator}"
    if isinstance(coefficient, Fraction):
        coefficient = coefficient.numerator
    return _render_int(coefficient, has_monomial) if isinstance(coefficient, int) else repr(coefficient)


@attrs.frozen
class PhasePolynomial:
    """P(n) = Σ α_i n^i с рациональными (точно) или вещественными α"""
    arity: int
    coefficients: tuple

    def __attrs_post_init__(self):
        for exponent, coefficient in self.coefficients:
            if len(exponent) != self.arity:
                raise DomainError(f"bad exponent vector {exponent} for arity {self.arity}")
            if isinstance(coefficient, float) and not math.isfinite(coefficient):
                raise DomainError("phase coefficients must be finite")

    @classmethod
    def parse(cls, text, arity=None):
        raw, top = _parse_terms(text, allow_real=True)
        arity = arity or max(top, 1)
        merged = {}
        for coefficient, exps in raw:
            if isinstance(coefficient, int):
                coefficient = Fraction(coefficient)
            exponent = _to_exponent(exps, arity)
            merged[exponent] = merged.get(exponent, 0) + coefficient
        return cls(arity, tuple(sorted((e, c) for e, c in merged.items() if c != 0)))

    @classmethod
    def from_int(cls, polynomial, scale=1):
        return cls(polynomial.arity, tuple((e, Fraction(c) * scale) for e, c in polynomial.coefficients))

    @property
    def degree(self):
        if not self.coefficients:
            return ZERO_DEGREE
        return max(sum(e) for e, _ in self.coefficients)

    def __str__(self):
        return _format(self.coefficients, self.arity, 'n', _render_real)

    def phases(self, points):
        """Дробные части P(n) в [0, 1) для строк points (n, r)."""
        points = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        total = np.zeros(points.shape[0], dtype=np.float64)
        for exponent, alpha in self.coefficients:
            if isinstance(alpha, Fraction):
                q = alpha.denominator
                if q < MOD_VECTOR_LIMIT and abs(alpha.numerator) < VECTOR_LIMIT:
                    # точная дробная часть: (a * n^i mod q) / q
                    residue = np.full(points.shape[0], alpha.numerator % q, dtype=np.int64)
                    for j, e in enumerate(exponent):
                        if e:
                            residue = residue * _powmod_array(points[:, j] % q, e, q) % q
                    total += residue / q
                    continue
                alpha = float(alpha)
            monomial = np.ones(points.shape[0], dtype=np.float64)
            for j, e in enumerate(exponent):
                if e:
                    monomial *= points[:, j].astype(np.float64) ** e
            total += np.mod(alpha * monomial, 1.0)
        return np.mod(total, 1.0)
