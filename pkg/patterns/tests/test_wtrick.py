import math
from fractions import Fraction

import attrs
import numpy as np
from django.test import SimpleTestCase

from patterns.arith import build_factor_table, primes_up_to
from patterns.exceptions import DomainError, ResourceLimitError
from patterns.poly import parse_polynomials
from patterns.wtrick import (
    CosineSquaredCutoff, PatternSpec, SmoothBumpCutoff, WTrickContext, admissible_count_formula,
    admissible_pairs, beta_p, beta_p_sampled, chi_eval, get_cutoff, is_admissible, lambda_p,
    lambda_prime_bw, level_from_kappa, nu_b, nu_b_direct, nu_diagnostics, singular_series,
)


def pattern(*texts, r=1, d=None):
    polys = parse_polynomials(texts, arity=r)
    return PatternSpec(r, max(p.degree for p in polys if not p.is_zero) if d is None else d, polys)


AP3 = pattern("0", "m", "2*m")
PAIR = pattern("0", "m")
SQUARE = pattern("0", "m^2")
CONSECUTIVE = pattern("0", "1", d=0)


class LocalFactorTests(SimpleTestCase):

    def test_three_term_progression(self):
        self.assertEqual(beta_p(AP3, 2).value, 2)
        self.assertEqual(beta_p(AP3, 3).value, Fraction(3, 4))
        self.assertEqual(beta_p(AP3, 5).value, Fraction(15, 16))

    def test_pair_factors_are_one(self):
        for p in primes_up_to(50):
            self.assertEqual(beta_p(PAIR, int(p)).value, 1, p)

    def test_ap3_closed_form(self):
        for p in primes_up_to(60)[1:]:
            p = int(p)
            self.assertEqual(beta_p(AP3, p).value, Fraction(p * p * (p - 2), (p - 1) ** 3) * Fraction(p - 1, p))

    def test_factors_approach_one(self):
        primes = primes_up_to(2000)
        for p in primes[primes >= 50]:
            p = int(p)
            deviation = abs(beta_p(AP3, p).value - 1) * p * p
            self.assertLessEqual(deviation, 2, p)

    def test_square_pattern(self):
        for p in (2, 3, 7, 11):
            self.assertEqual(beta_p(SQUARE, p).value, 1)

    def test_parallel_blocks_agree(self):
        spec = pattern("0", "m1", "m1+m2", "m1^2+m2", r=2, d=2)
        self.assertEqual(beta_p(spec, 257, workers=1), beta_p(spec, 257, workers=4))

    def test_as_dict(self):
        data = beta_p(AP3, 3).as_dict()
        self.assertEqual(data['fraction'], "3/4")
        self.assertEqual(data['value'], 0.75)
        self.assertTrue(data['exact'])

    def test_errors(self):
        with self.assertRaises(DomainError):
            beta_p(AP3, 4)
        with self.assertRaises(ResourceLimitError):
            beta_p(pattern("0", "m1", "m2", r=2), 101, cap=100)

    def test_sampled_one_variable_is_exact(self):
        sampled = beta_p_sampled(AP3, 5, samples=1000)
        self.assertAlmostEqual(sampled.value, 15 / 16, places=12)
        self.assertEqual(sampled.stderr, 0.0)

    def test_sampled_two_variables(self):
        spec = pattern("0", "m1", "m2", r=2)
        exact = float(beta_p(spec, 31).value)
        sampled = beta_p_sampled(spec, 31, samples=31 * 400, seed=3)
        self.assertLessEqual(abs(sampled.value - exact), 6 * sampled.stderr + 1e-9)
        self.assertEqual(sampled.samples, 31 * 400)

    def test_lambda_p(self):
        self.assertEqual(lambda_p(3, 3), 0.0)
        self.assertEqual(lambda_p(3, 4), 1.5)


class SingularSeriesTests(SimpleTestCase):

    def test_ap3_product(self):
        expected = 2.0
        for p in primes_up_to(100)[1:]:
            p = int(p)
            expected *= p * (p - 2) / (p - 1) ** 2
        series = singular_series(AP3, 100)
        self.assertAlmostEqual(series.product, expected, places=12)
        self.assertEqual(series.zeros, ())
        self.assertGreater(series.tail_bound, 0.0)
        self.assertEqual(len(list(series.trace_rows())), 25)

    def test_consecutive_vanishes(self):
        series = singular_series(CONSECUTIVE, 50)
        self.assertEqual(series.product, 0.0)
        self.assertEqual(series.zeros, (2,))
        self.assertEqual(series.tail_bound, 0.0)

    def test_admissibility(self):
        self.assertTrue(is_admissible(AP3, 100))
        check = is_admissible(CONSECUTIVE, 100)
        self.assertFalse(check)
        self.assertEqual(check.witness, 2)
        self.assertEqual(check.checked_up_to, 100)
        with self.assertRaises(DomainError):
            is_admissible(AP3, 1)


class AdmissiblePairsTests(SimpleTestCase):

    def test_pairs_listing(self):
        pairs = admissible_pairs(6, PAIR.polys)
        self.assertEqual(len(pairs), 4)
        self.assertEqual(list(pairs), [(1, (0,)), (5, (0,)), (5, (2,)), (1, (4,))])

    def test_count_identity(self):
        for spec in (PAIR, AP3, SQUARE, CONSECUTIVE, pattern("0", "m1", "m2", r=2)):
            for w in (2, 3, 5):
                with self.subTest(spec=spec.echo(), w=w):
                    W = math.prod(int(p) for p in primes_up_to(w))
                    self.assertEqual(admissible_count_formula(w, spec), admissible_pairs(W, spec.polys).count)

    def test_ap3_modulo_two(self):
        self.assertEqual(admissible_pairs(2, AP3.polys).count, 1)


class ContextTests(SimpleTestCase):

    def test_validation(self):
        ctx = WTrickContext(3, 100, 10, 5)
        self.assertEqual(ctx.W, 6)
        self.assertEqual(ctx.phi_W, 2)
        self.assertEqual(ctx.sieve_limit, 605)
        with self.assertRaises(DomainError):
            WTrickContext(3, 100, 10, 2)
        with self.assertRaises(DomainError):
            WTrickContext(3, 100, 1)
        with self.assertRaises(DomainError):
            WTrickContext(3, 0, 10)
        with self.assertRaises(DomainError):
            WTrickContext(3, 100, 10, 7)

    def test_level_from_kappa(self):
        self.assertEqual(level_from_kappa(10**6, 0.5), 1000)
        self.assertEqual(level_from_kappa(10**6, 0.1), 4)
        self.assertEqual(level_from_kappa(3, 0.1), 2)
        with self.assertRaises(DomainError):
            level_from_kappa(100, 0)

    def test_lambda_prime_bw(self):
        ctx = WTrickContext(2, 10, 2)
        table = build_factor_table(ctx.sieve_limit)
        lam = lambda_prime_bw(ctx, table)
        self.assertEqual(lam.modulus, 10)
        self.assertAlmostEqual(lam.values[3], 0.5 * math.log(7))
        self.assertEqual(lam.values[1], 0.0)
        self.assertEqual(lam.values[4], 0.0)
        self.assertEqual(lam.values[0], 0.0)

    def test_table_must_cover(self):
        ctx = WTrickContext(3, 100, 10)
        with self.assertRaises(DomainError):
            lambda_prime_bw(ctx, build_factor_table(100))


class CutoffTests(SimpleTestCase):

    def derivative_energy(self, cutoff):
        t = np.linspace(0.0, 1.0, 200_001)
        return float(np.trapezoid(np.gradient(cutoff(t), t) ** 2, t))

    def test_normalisation(self):
        self.assertAlmostEqual(self.derivative_energy(CosineSquaredCutoff()), 1.0, places=4)
        self.assertAlmostEqual(self.derivative_energy(SmoothBumpCutoff()), 1.0, places=3)

    def test_support(self):
        for cutoff in (CosineSquaredCutoff(), SmoothBumpCutoff()):
            self.assertEqual(float(cutoff(np.array([1.5]))[0]), 0.0)
            self.assertEqual(float(cutoff(np.array([-2.0]))[0]), 0.0)
        self.assertAlmostEqual(chi_eval(0.0), 2 * math.sqrt(2) / math.pi)
        self.assertAlmostEqual(chi_eval(1.0), 0.0)

    def test_registry(self):
        self.assertIsInstance(get_cutoff(), CosineSquaredCutoff)
        self.assertIsInstance(get_cutoff('bump'), SmoothBumpCutoff)
        with self.assertRaises(DomainError):
            get_cutoff('gaussian')


class MajorantTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.ctx = WTrickContext(3, 3000, 40)
        cls.table = build_factor_table(attrs.evolve(cls.ctx, b=5).sieve_limit)

    def test_inverted_loop_matches_direct(self):
        for cutoff in ('cosine', 'bump'):
            inverted = nu_b(self.ctx, self.table, cutoff, workers=3).values[1:]
            direct = nu_b_direct(self.ctx, self.table, self.ctx.N - 1, cutoff)[1:]
            self.assertTrue(np.array_equal(inverted, direct), cutoff)

    def test_nonnegative(self):
        self.assertGreaterEqual(float(nu_b(self.ctx, self.table).values.min()), 0.0)

    def test_majorises_lambda(self):
        diagnostics = nu_diagnostics(self.ctx, self.table)
        self.assertEqual(diagnostics.violations, 0)
        self.assertGreaterEqual(diagnostics.min_slack, -1e-9)
        self.assertGreater(diagnostics.mean, 0.0)

    def test_other_residue(self):
        ctx = WTrickContext(3, 3000, 40, 5)
        inverted = nu_b(ctx, self.table).values[1:200]
        direct = nu_b_direct(ctx, self.table, 199)[1:]
        self.assertTrue(np.array_equal(inverted, direct))

    def test_inverted_loop_matches_direct_at_larger_level(self):
        ctx = WTrickContext(3, 10001, 50)
        table = build_factor_table(ctx.sieve_limit)
        upto = 10000
        inverted = nu_b(ctx, table, workers=4).values[1:upto + 1]
        direct = nu_b_direct(ctx, table, upto)[1:]
        self.assertEqual(inverted.shape, direct.shape)
        self.assertTrue(np.array_equal(inverted, direct))
