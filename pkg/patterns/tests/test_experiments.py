import cmath
import math

import numpy as np
from django.test import SimpleTestCase

from patterns.arith import build_factor_table
from patterns.estimation import EstimatorConfig
from patterns.exceptions import DomainError, ResourceLimitError
from patterns.experiments import (
    EstimateReport, avg_gowers_of_w_tricked, best_denominator, dumps, find_prime_tuples, major_arc_detect,
    mung_tv_average, pattern_average, polyforms_check, random_polynomials, weyl_sum,
)
from patterns.gowers import CyclicFn
from patterns.multiset import interval, sumset, tv_distance
from patterns.poly import IntPolynomial, PhasePolynomial, parse_polynomials
from patterns.wtrick import PatternSpec, WTrickContext

EXACT = EstimatorConfig()


def pattern(*texts, N=None, M=None, d=1):
    return PatternSpec(1, d, parse_polynomials(texts, arity=1), N=N, M=M)


def brute_force_average(spec, table):
    total = 0.0
    for n in range(1, spec.N + 1):
        for m in range(1, spec.M + 1):
            term = 1.0
            for poly in spec.polys:
                x = n + poly.evaluate((m,))
                term *= math.log(x) if x >= 1 and table.is_prime[x] else 0.0
            total += term
    return total / (spec.N * spec.M)


class ReportTests(SimpleTestCase):

    def test_timing_is_optional(self):
        report = EstimateReport(1.0, runtime_ms=12.5, config={'b': 1, 'a': 2})
        self.assertNotIn('runtime_ms', report.as_dict())
        self.assertEqual(report.as_dict(include_timing=True)['runtime_ms'], 12.5)
        self.assertTrue(report.exact)

    def test_dumps_is_sorted(self):
        self.assertEqual(dumps({'b': 1, 'a': np.int64(2)}), '{"a": 2, "b": 1}')
        self.assertEqual(dumps({'v': np.array([1, 2])}), '{"v": [1, 2]}')


class PatternAverageTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.table = build_factor_table(5000)

    def test_exact_matches_brute_force(self):
        for spec in (pattern("0", "m", N=60, M=8), pattern("0", "m", "2*m", N=40, M=9),
                     pattern("0", "m^2", N=50, M=6, d=2)):
            with self.subTest(polys=spec.echo()['polys']):
                report = pattern_average(spec, self.table, EXACT)
                self.assertAlmostEqual(report.value, brute_force_average(spec, self.table), places=12)
                self.assertEqual(report.stderr, 0.0)
                self.assertIsNone(report.samples)

    def test_non_positive_arguments_count_as_zero(self):
        spec = pattern("0", "-m", N=5, M=6)
        report = pattern_average(spec, self.table, EXACT)
        self.assertGreater(report.diagnostics['negative_arguments'], 0)
        self.assertAlmostEqual(report.value, brute_force_average(spec, self.table), places=12)

    def test_top_degree_diagnostic(self):
        report = pattern_average(pattern("m", "m+2", N=20, M=3), self.table, EXACT)
        self.assertFalse(report.diagnostics['top_degree_distinct'])
        self.assertEqual(report.diagnostics['top_degree_witness'], [1, 2])

    def test_monte_carlo_close_to_exact(self):
        spec = pattern("0", "m", N=2000, M=30)
        exact = pattern_average(spec, self.table, EXACT).value
        sampled = pattern_average(spec, self.table, EstimatorConfig(mode='mc', samples=200_000))
        self.assertEqual(sampled.samples, 200_000)
        self.assertLessEqual(abs(sampled.value - exact), 6 * sampled.stderr)

    def test_monte_carlo_independent_of_workers(self):
        spec = pattern("0", "m", "2*m", N=1000, M=50)
        one = pattern_average(spec, self.table, EstimatorConfig(mode='mc', samples=30_000, chunk_size=2048, workers=1))
        many = pattern_average(spec, self.table, EstimatorConfig(mode='mc', samples=30_000, chunk_size=2048, workers=4))
        self.assertEqual(one.as_dict(), many.as_dict())

    def test_weight_override_and_mobius(self):
        spec = pattern("0", "m", N=30, M=4)
        ones = np.ones(100)
        self.assertAlmostEqual(pattern_average(spec, self.table, EXACT, weights=ones).value, 1.0)
        report = pattern_average(spec, self.table, EXACT, weight='mobius')
        self.assertLessEqual(abs(report.value), 1.0)
        with self.assertRaises(DomainError):
            pattern_average(spec, self.table, EXACT, weights=np.ones(10))

    def test_limits(self):
        with self.assertRaises(ResourceLimitError):
            pattern_average(pattern("0", "m", N=1000, M=1000), self.table, EstimatorConfig(op_cap=1000))
        with self.assertRaises(DomainError):
            pattern_average(pattern("0", "m"), self.table, EXACT)


class PrimeTupleTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.table = build_factor_table(1000)

    def test_three_term_progressions(self):
        found = find_prime_tuples(pattern("0", "m", "2*m", N=100, M=10), self.table, 3)
        self.assertEqual(found, [(3, (2,)), (3, (4,)), (3, (8,))])

    def test_consecutive_stream_ends(self):
        found = find_prime_tuples(pattern("0", "1", N=100, M=1, d=0), self.table, 10)
        self.assertEqual(found, [(2, (1,))])

    def test_zero_count(self):
        self.assertEqual(find_prime_tuples(pattern("0", "m", N=10, M=2), self.table, 0), [])


class WeylSumTests(SimpleTestCase):

    def test_quadratic_gauss_sum(self):
        self.assertAlmostEqual(weyl_sum(PhasePolynomial.parse("n^2/5"), [10]), math.sqrt(5) / 5, places=12)

    def test_matches_direct_sum(self):
        phase = PhasePolynomial.parse("sqrt2*n1*n2+n2^2/3", arity=2)
        direct = sum(cmath.exp(2j * math.pi * (math.sqrt(2) * a * b + b * b / 3))
                     for a in range(1, 8) for b in range(1, 6))
        self.assertAlmostEqual(weyl_sum(phase, [7, 5]), abs(direct) / 35, places=9)

    def test_constant_phase(self):
        self.assertAlmostEqual(weyl_sum(PhasePolynomial.parse("1/3"), [17]), 1.0, places=12)

    def test_best_denominator(self):
        certificate = best_denominator(PhasePolynomial.parse("n^2/5"), [10], 10)
        self.assertEqual(certificate.q, 5)
        self.assertEqual(certificate.worst, 0.0)
        ties = best_denominator(PhasePolynomial.parse("n/2"), [10], 8)
        self.assertEqual(ties.q, 2)

    def test_best_denominator_of_constant_phase(self):
        certificate = best_denominator(PhasePolynomial.parse("1/3"), [10], 5)
        self.assertEqual(certificate.q, 1)
        self.assertEqual(certificate.bounds, {'1': 0.0})
        self.assertEqual(certificate.worst, 0.0)
        shifted = best_denominator(PhasePolynomial.parse("n^2/5+1/3"), [10], 10)
        self.assertEqual(shifted.q, 5)
        self.assertEqual(shifted.bounds['1'], 0.0)
        self.assertIn('n1^2', shifted.bounds)

    def test_major_arc_detect(self):
        certificate = major_arc_detect(PhasePolynomial.parse("3*n^2/7"), [700], 0.1, 20)
        self.assertEqual(certificate.q, 7)
        self.assertAlmostEqual(certificate.weyl, math.sqrt(7) / 7, places=9)
        self.assertIsNone(major_arc_detect(PhasePolynomial.parse("n/2"), [1000], 0.1, 5))
        with self.assertRaises(DomainError):
            major_arc_detect(PhasePolynomial.parse("n/2"), [10], 0, 5)

    def test_cap(self):
        with self.assertRaises(ResourceLimitError):
            weyl_sum(PhasePolynomial.parse("n1*n2", arity=2), [1000, 1000], cap=10**4)


class GlobalSymmetryTests(SimpleTestCase):

    def test_random_polynomials(self):
        polys = random_polynomials(2, 1, 5, 4, np.random.default_rng(0))
        self.assertEqual(len(polys), 5)
        for poly in polys:
            self.assertEqual(poly.degree, 2)
            self.assertLessEqual(poly.max_abs_coefficient, 4)

    def test_constant_steps_match_multiset_distance(self):
        polys = [IntPolynomial.constant(1)]
        report = mung_tv_average(1, 1, 1, 1, 5, polys, 1, EstimatorConfig(mode='mc', samples=4))
        expected = tv_distance(interval(-5, 5), sumset(interval(-5, 5), interval(-5, 5)))
        self.assertAlmostEqual(report.value, expected, places=12)
        self.assertGreater(report.stderr, 0.0)
        self.assertLess(report.stderr, 1e-12)
        self.assertFalse(report.exact)
        self.assertEqual(report.diagnostics['q0_radius'], 5)
        self.assertEqual(len(report.trace), 4)

    def test_value_range_and_determinism(self):
        polys = random_polynomials(1, 1, 3, 6, np.random.default_rng(9))
        one = mung_tv_average(2, 1, 3, 6, 20, polys, 6, EstimatorConfig(mode='mc', samples=12, chunk_size=4, workers=1))
        many = mung_tv_average(2, 1, 3, 6, 20, polys, 6, EstimatorConfig(mode='mc', samples=12, chunk_size=4, workers=3))
        self.assertEqual(one.as_dict(), many.as_dict())
        self.assertTrue(0.0 <= one.value <= 2.0)
        self.assertTrue(one.diagnostics['q0_radius_clamped'])

    def test_validation(self):
        polys = [IntPolynomial.parse("m")]
        cfg = EstimatorConfig(mode='mc', samples=2)
        with self.assertRaises(DomainError):
            mung_tv_average(3, 1, 1, 4, 5, polys, 4, cfg)
        with self.assertRaises(DomainError):
            mung_tv_average(2, 1, 1, 4, 5, [IntPolynomial.parse("9*m")], 4, cfg)
        with self.assertRaises(DomainError):
            mung_tv_average(2, 1, 2, 4, 5, polys, 4, cfg)


class PolynomialFormsTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.ctx = WTrickContext(2, 400, 8)
        cls.table = build_factor_table(cls.ctx.sieve_limit + 2)

    def test_constant_majorants_give_one(self):
        system = list(zip([1, 1], parse_polynomials(["0", "m"])))
        ones = [CyclicFn.constant(400, 1.0)] * 2
        report = polyforms_check(system, self.ctx, self.table, 5, EXACT, majorants=ones)
        self.assertAlmostEqual(report.value, 1.0, places=12)

    def test_exact_and_sampled_agree(self):
        system = list(zip([1, 1], parse_polynomials(["0", "m"])))
        exact = polyforms_check(system, self.ctx, self.table, 10, EXACT)
        sampled = polyforms_check(system, self.ctx, self.table, 10, EstimatorConfig(mode='mc', samples=100_000))
        self.assertGreater(exact.value, 0.0)
        self.assertLessEqual(abs(sampled.value - exact.value), 6 * sampled.stderr + 1e-9)

    def test_constant_difference_rejected(self):
        system = list(zip([1, 1], parse_polynomials(["m", "m+1"])))
        with self.assertRaises(DomainError):
            polyforms_check(system, self.ctx, self.table, 5, EXACT)


class AveragedNormOfLambdaTests(SimpleTestCase):

    def test_override_with_constant_one(self):
        ctx = WTrickContext(2, 50, 4)
        table = build_factor_table(ctx.sieve_limit)
        report = avg_gowers_of_w_tricked(ctx, table, parse_polynomials(["m"]), 3, 1, EXACT,
                                         lambda_override=CyclicFn.constant(50, 1.0))
        self.assertEqual(report.value, 0.0)
        self.assertEqual(report.diagnostics['h_count'], 3)

    def test_w_tricked_lambda(self):
        ctx = WTrickContext(2, 101, 4)
        table = build_factor_table(ctx.sieve_limit)
        report = avg_gowers_of_w_tricked(ctx, table, parse_polynomials(["m", "2*m"]), 3, 2, EXACT)
        self.assertGreater(report.value, 0.0)
        self.assertEqual(report.config['D'], 2)

    def test_side_count_must_match(self):
        ctx = WTrickContext(2, 50, 4)
        table = build_factor_table(ctx.sieve_limit)
        with self.assertRaises(DomainError):
            avg_gowers_of_w_tricked(ctx, table, parse_polynomials(["m"]), 3, 2, EXACT)
