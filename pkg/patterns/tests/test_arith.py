import math

import numpy as np
from django.test import SimpleTestCase

from patterns.arith import (
    build_factor_table, count_primes, euler_phi, is_prime, iter_windows, mangoldt, mobius,
    primes_up_to, primorial, segmented_mangoldt_prime, sieve_window,
)
from patterns.exceptions import DomainError, PrimorialOverflowError


class FactorTableTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.table = build_factor_table(10_000)

    def test_primes_up_to(self):
        self.assertEqual(primes_up_to(30).tolist(), [2, 3, 5, 7, 11, 13, 17, 19, 23, 29])
        self.assertEqual(primes_up_to(1).size, 0)

    def test_table_primes_match_plain_sieve(self):
        self.assertTrue(np.array_equal(self.table.primes, primes_up_to(10_000)))
        self.assertEqual(self.table.prime_count, 1229)

    def test_factorize(self):
        self.assertEqual(self.table.factorize(84), [(2, 2), (3, 1), (7, 1)])
        self.assertEqual(self.table.factorize(9973), [(9973, 1)])
        self.assertEqual(self.table.factorize(1), [])

    def test_require_outside_range(self):
        with self.assertRaises(DomainError):
            self.table.factorize(10_001)
        with self.assertRaises(DomainError):
            build_factor_table(1)

    def test_mobius_array(self):
        self.assertEqual(self.table.mobius_array(10).tolist(), [0, 1, -1, -1, 0, -1, 1, -1, 0, 0, 1])
        values = self.table.mobius_array(500)
        for n in range(1, 501):
            self.assertEqual(values[n], mobius(n, self.table), n)

    def test_mangoldt_arrays(self):
        lam = self.table.mangoldt_array(100)
        lam_prime = self.table.mangoldt_prime_array(100)
        self.assertAlmostEqual(lam[8], math.log(2))
        self.assertEqual(lam[6], 0.0)
        self.assertEqual(lam_prime[8], 0.0)
        self.assertAlmostEqual(lam_prime[97], math.log(97))
        self.assertEqual(lam[1], 0.0)
        for n in range(1, 101):
            self.assertAlmostEqual(lam[n], mangoldt(n, self.table), msg=n)


class SegmentedSieveTests(SimpleTestCase):

    def test_count_primes(self):
        self.assertEqual(count_primes(10**5, size=1000), 9592)
        self.assertEqual(count_primes(10**5, size=7919, workers=3), 9592)
        self.assertEqual(count_primes(1), 0)
        self.assertEqual(count_primes(2), 1)

    def test_window_matches_table(self):
        table = build_factor_table(3000)
        window = sieve_window(1000, 2000)
        expected = table.mangoldt_prime_array(2000)[1000:]
        self.assertTrue(np.allclose(window.mangoldt_prime, expected))
        self.assertAlmostEqual(window.value(1009), math.log(1009))
        with self.assertRaises(DomainError):
            window.value(999)

    def test_windows_cover_range(self):
        bounds = list(iter_windows(2, 100, size=30))
        self.assertEqual(bounds, [(2, 31), (32, 61), (62, 91), (92, 100)])
        windows = segmented_mangoldt_prime(2, 100, size=30, workers=2)
        self.assertEqual(sum(w.prime_count for w in windows), 25)

    def test_invalid_window(self):
        with self.assertRaises(DomainError):
            sieve_window(10, 5)


class ScalarFunctionTests(SimpleTestCase):

    def test_is_prime(self):
        self.assertTrue(is_prime(2))
        self.assertTrue(is_prime(97))
        self.assertTrue(is_prime(1_000_003))
        self.assertFalse(is_prime(91))
        self.assertFalse(is_prime(1))
        self.assertFalse(is_prime(0))

    def test_euler_phi(self):
        self.assertEqual(euler_phi(1), 1)
        self.assertEqual(euler_phi(30), 8)
        self.assertEqual(euler_phi(30030), 5760)
        self.assertEqual(euler_phi(36, build_factor_table(100)), 12)
        with self.assertRaises(DomainError):
            euler_phi(0)

    def test_primorial(self):
        self.assertEqual(primorial(2), 2)
        self.assertEqual(primorial(4), 6)
        self.assertEqual(primorial(5), 30)
        self.assertEqual(primorial(13), 30030)
        self.assertEqual(primorial(47), 614889782588491410)
        with self.assertRaises(PrimorialOverflowError):
            primorial(53)
        with self.assertRaises(DomainError):
            primorial(1)


class ArithmeticIdentityTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.table = build_factor_table(10**5)

    def test_mobius_divisor_sums(self):
        limit = 10**4
        mu = self.table.mobius_array(limit).astype(np.int64)
        totals = np.zeros(limit + 1, dtype=np.int64)
        for d in range(1, limit + 1):
            if mu[d]:
                totals[d::d] += mu[d]
        self.assertEqual(totals[1], 1)
        self.assertFalse(np.any(totals[2:]))

    def test_full_mangoldt_dominates_prime_part(self):
        full = self.table.mangoldt_array()
        primes_only = self.table.mangoldt_prime_array()
        self.assertTrue(np.all(full >= primes_only))
        flags = self.table.is_prime
        self.assertTrue(np.array_equal(full[flags], primes_only[flags]))
        self.assertAlmostEqual(full[1024], math.log(2))
        self.assertEqual(primes_only[1024], 0.0)

    def test_chebyshev_theta(self):
        for limit in (10**5, 10**6):
            windows = segmented_mangoldt_prime(2, limit, 2**16, workers=2)
            theta = math.fsum(float(window.mangoldt_prime.sum()) for window in windows)
            self.assertLess(abs(theta / limit - 1), 0.02, limit)
