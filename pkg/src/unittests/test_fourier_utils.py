import sys; import os; sys.path.insert(1, os.path.join(os.getcwd(), "src"))


import math
import unittest

import numpy as np

from fp_core import PrimeField
from fourier_utils import (
    DIRECT_SUM_LIMIT, roots_of_unity, kahan_accumulate, char_sums_direct, fft_char_sums,
    log_abs, power_from_log, log_sum_exp, fsum_complex)
from distributions import from_weights, inverse_transform


class TestCharacterSums(unittest.TestCase):

    def test_roots_of_unity(self):
        roots = roots_of_unity(7)
        self.assertAlmostEqual(abs(roots[0] - 1.0), 0.0)
        np.testing.assert_allclose(roots ** 7, np.ones(7), atol=1e-12)

    def test_fft_matches_direct(self):
        rng = np.random.default_rng(0)
        for p in (2, 13, 101, 257):
            values = rng.random(p) + 1j * rng.random(p)
            support = np.arange(p, dtype=np.int64)
            direct = char_sums_direct(p, support, values)
            np.testing.assert_allclose(fft_char_sums(values, sign=1), direct, atol=1e-10)
            backward = char_sums_direct(p, support, values, (-support) % p)
            np.testing.assert_allclose(fft_char_sums(values, sign=-1), backward, atol=1e-10)

    def test_fft_sign(self):
        with self.assertRaises(ValueError):
            fft_char_sums(np.ones(5), sign=0)

    def test_direct_on_a_subset_of_frequencies(self):
        p = 31
        support = np.array([0, 3, 7])
        weights = np.array([0.5, 0.25, 0.25])
        freqs = np.array([0, 1, 30])
        out = char_sums_direct(p, support, weights, freqs)
        self.assertAlmostEqual(out[0], 1.0)
        expected = sum(w * np.exp(2j * np.pi * x / p) for x, w in zip(support, weights))
        self.assertAlmostEqual(abs(out[1] - expected), 0.0, places=12)
        self.assertAlmostEqual(abs(out[2] - np.conj(expected)), 0.0, places=12)


class TestLargePrime(unittest.TestCase):
    """p^2 above the direct-sum limit, so the transforms go through the FFT."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.p = 10007
        weights = np.random.default_rng(1).random(cls.p)
        cls.X = from_weights(PrimeField(cls.p), weights)

    def test_above_direct_limit(self):
        self.assertGreater(self.p * self.p, DIRECT_SUM_LIMIT)

    def test_char_fn_matches_direct(self):
        freqs = np.array([0, 1, 2, 5003, self.p - 1])
        direct = char_sums_direct(self.p, np.arange(self.p), self.X.density, freqs)
        np.testing.assert_allclose(self.X.char_fn.values[freqs], direct, atol=1e-12)

    def test_inverse_transform_recovers_density(self):
        np.testing.assert_allclose(inverse_transform(self.X.char_fn.values),
                                   self.X.density, atol=1e-12)


class TestSummation(unittest.TestCase):

    def test_kahan(self):
        total = kahan_accumulate([np.array([0.1, 1.0])] * 10)
        self.assertAlmostEqual(total[0].real, 1.0, places=15)
        self.assertEqual(total[1].real, 10.0)

    def test_fsum_complex(self):
        z = fsum_complex(np.array([1e16 + 1j, 1.0 + 1e16j, -1e16 - 1e16j]))
        self.assertEqual(z, complex(1.0, 1.0))


class TestLogDomain(unittest.TestCase):

    def test_log_abs(self):
        out = log_abs(np.array([0.0, 1.0, -math.e]))
        self.assertEqual(out[0], -math.inf)
        self.assertAlmostEqual(out[1], 0.0)
        self.assertAlmostEqual(out[2], 1.0)

    def test_power_from_log_underflows_to_zero(self):
        out = power_from_log(np.array([math.log(0.5), -math.inf, -1.0]), 1100)
        self.assertEqual(out[0], 0.0)
        self.assertEqual(out[1], 0.0)
        self.assertEqual(out[2], 0.0)
        self.assertAlmostEqual(power_from_log(np.array([math.log(0.5)]), 3)[0], 0.125)

    def test_log_sum_exp(self):
        self.assertAlmostEqual(log_sum_exp(np.array([0.0, 0.0, -math.inf])), math.log(2))
        self.assertEqual(log_sum_exp(np.array([-math.inf])), -math.inf)


if __name__ == '__main__':
    unittest.main()
