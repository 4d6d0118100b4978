import sys; import os; sys.path.insert(1, os.path.join(os.getcwd(), "src"))


import math
import unittest

import numpy as np

from fp_core import PrimeField, additive, multiplicative, subgroup_of_order
from distributions import (
    DistFp, CharFn, uniform_on, dirac, from_weights, inverse_transform,
    density_at, stepping, convolve, peaking, verify_fourier_duality,
    check_tail_bound, check_tail_bound_alpha, complex_expectation)


class TestDensities(unittest.TestCase):

    def setUp(self) -> None:
        self.F = PrimeField(13)

    def test_rejects_bad_densities(self):
        with self.assertRaises(ValueError):
            DistFp(self.F, np.full(13, 0.5))
        with self.assertRaises(ValueError):
            DistFp(self.F, np.ones(12) / 12)
        bad = np.zeros(13)
        bad[0], bad[1] = 1.5, -0.5
        with self.assertRaises(ValueError):
            DistFp(self.F, bad)
        with self.assertRaises(ValueError):
            uniform_on(self.F, [])

    def test_density_is_read_only(self):
        X = uniform_on(self.F, [1, 2])
        with self.assertRaises(ValueError):
            X.density[0] = 1.0

    def test_from_weights(self):
        X = from_weights(self.F, np.arange(13, dtype=float))
        self.assertAlmostEqual(X[12], 12 / 78)
        with self.assertRaises(ValueError):
            from_weights(self.F, np.zeros(13))
        noisy = np.ones(13)
        noisy[3] = -1e-12
        self.assertEqual(from_weights(self.F, noisy)[3], 0.0)

    def test_collision_probability(self):
        X = uniform_on(self.F, [0, 5, 7, 9])
        self.assertAlmostEqual(X.collision_probability(), 0.25)


class TestCharFn(unittest.TestCase):

    def test_squares_mod_13(self):
        F = PrimeField(13)
        X = uniform_on(F, subgroup_of_order(F, 6).elements)
        self.assertAlmostEqual(X.char_fn[1].real, (math.sqrt(13) - 1) / 12, places=12)
        self.assertAlmostEqual(X.char_fn[1].imag, 0.0, places=12)
        self.assertAlmostEqual(X.char_fn[0].real, 1.0, places=12)

    def test_dirac(self):
        F = PrimeField(101)
        phi = dirac(F, 3).char_fn
        self.assertTrue(np.allclose(np.abs(phi.values), 1.0))
        self.assertAlmostEqual(phi[1], complex(math.cos(6 * math.pi / 101), math.sin(6 * math.pi / 101)))

    def test_full_uniform_vanishes(self):
        F = PrimeField(101)
        phi = uniform_on(F, range(101)).char_fn.values
        self.assertTrue(np.allclose(phi[1:], 0.0, atol=1e-12))

    def test_inverse_transform(self):
        F = PrimeField(157)
        X = from_weights(F, np.sin(np.arange(157)) ** 2)
        self.assertTrue(np.allclose(inverse_transform(X.char_fn.values), X.density, atol=1e-12))
        self.assertAlmostEqual(density_at(X.char_fn, 17), X[17], places=12)

    def test_explicit_values(self):
        F = PrimeField(7)
        with self.assertRaises(ValueError):
            CharFn(F)
        with self.assertRaises(ValueError):
            CharFn(F, values=np.ones(6))
        self.assertEqual(len(CharFn(F, values=np.ones(7))), 7)

    def test_complex_expectation(self):
        F = PrimeField(13)
        X = uniform_on(F, [1, 2])
        self.assertAlmostEqual(complex_expectation(X, np.arange(13) * 1j), 1.5j)


class TestStepping(unittest.TestCase):

    def test_additive_stepping_law(self):
        F = PrimeField(13)
        X = uniform_on(F, [0, 1])
        Y = stepping(X, additive(F))
        self.assertAlmostEqual(Y[0], 0.5)
        self.assertAlmostEqual(Y[1], 0.25)
        self.assertAlmostEqual(Y[12], 0.25)

    def test_multiplicative_stepping_of_subgroup(self):
        F = PrimeField(13)
        H = subgroup_of_order(F, 4)
        Y = stepping(uniform_on(F, H.elements), multiplicative(F))
        for h in H.elements:
            self.assertAlmostEqual(Y[h], 0.25)
        self.assertAlmostEqual(math.fsum(Y.density[list(H.elements)]), 1.0)

    def test_multiplicative_needs_zero_free(self):
        F = PrimeField(13)
        with self.assertRaises(ValueError):
            stepping(uniform_on(F, [0, 1]), multiplicative(F))

    def test_results_are_renormalized(self):
        # Inputs whose sum is off by 9e-13 are valid densities; squaring
        # the weights must not push the result past the density check.
        for p, support in ((101, range(1, 11)), (2003, range(1, 2003))):
            F = PrimeField(p)
            density = np.array(uniform_on(F, support).density)
            density[1] += 9e-13
            X = DistFp(F, density)
            for Y in (stepping(X, additive(F)), stepping(X, multiplicative(F)), convolve(X, X)):
                self.assertLessEqual(abs(math.fsum(Y.density) - 1.0), 1e-12)
            self.assertAlmostEqual(stepping(X, additive(F))[0], X.collision_probability(), places=12)

    def test_stepping_char_fn_is_abs_squared(self):
        F = PrimeField(101)
        X = from_weights(F, np.cos(np.arange(101)) ** 2)
        Y = stepping(X, additive(F))
        self.assertTrue(np.allclose(Y.char_fn.values, X.char_fn.abs_squared(), atol=1e-12))

    def test_convolution_matches_direct_sum(self):
        F = PrimeField(31)
        X = from_weights(F, np.arange(31) % 4 + 1.0)
        Z = from_weights(F, np.arange(31) % 3 + 0.5)
        direct = np.zeros(31)
        for x in range(31):
            for z in range(31):
                direct[(x + z) % 31] += X[x] * Z[z]
        np.testing.assert_allclose(convolve(X, Z).density, direct, atol=1e-15)

    def test_convolution(self):
        F = PrimeField(7)
        Z = convolve(dirac(F, 3), uniform_on(F, [5, 6]))
        self.assertAlmostEqual(Z[1], 0.5)
        self.assertAlmostEqual(Z[2], 0.5)
        with self.assertRaises(ValueError):
            convolve(dirac(F, 1), dirac(PrimeField(11), 1))


class TestPeakingAndDuality(unittest.TestCase):

    def test_peaking_mass(self):
        F = PrimeField(101)
        X = uniform_on(F, range(10))
        peak = peaking(X)
        self.assertAlmostEqual(peak.mass, 101 * X.collision_probability())
        self.assertAlmostEqual(math.fsum(peak.density), 1.0)

    def test_duality_holds_on_varied_densities(self):
        F = PrimeField(157)
        densities = [
            dirac(F, 5),
            uniform_on(F, range(157)),
            uniform_on(F, subgroup_of_order(F, 12).elements),
            from_weights(F, np.arange(157) % 7 + 0.5),
        ]
        for X in densities:
            report = verify_fourier_duality(X)
            self.assertTrue(report.passed, [a.name for a in report.failed_assertions()])


class TestTailBounds(unittest.TestCase):

    def setUp(self) -> None:
        self.F = PrimeField(13)
        self.X = uniform_on(self.F, range(13))

    def test_tail_bound(self):
        values = np.ones(13)
        values[0] = 0.0
        report = check_tail_bound(values, self.X, 0.1, 0.5)
        self.assertTrue(report.passed)
        self.assertTrue(report.assertion('tail-bound').passed)

    def test_tail_bound_on_skewed_density(self):
        weights = np.zeros(13)
        weights[:3] = [5.0, 3.0, 2.0]
        X = from_weights(self.F, weights)
        values = np.zeros(13)
        values[:3] = [1.0, 0.9, 0.2]
        # E(Z) = 0.81 >= (1 - 0.2) M with M = 1; P(Z >= 0.5) = 0.8 >= 1 - 0.2/0.5.
        report = check_tail_bound(values, X, 0.2, 0.5, M=1.0)
        self.assertAlmostEqual(report.quantities['mean'], 0.81)
        self.assertAlmostEqual(report.quantities['tail'], 0.8)
        self.assertAlmostEqual(report.assertion('tail-bound').rhs, 0.6)
        self.assertTrue(report.passed)
        # gamma = 0.9 lowers the threshold to 0.1, so all the mass counts.
        self.assertAlmostEqual(check_tail_bound(values, X, 0.2, 0.9).quantities['tail'], 1.0)
        self.assertTrue(check_tail_bound(values, X, 0.1, 0.5).quantities['tail-bound.skipped'])
        with self.assertRaises(ValueError):
            check_tail_bound(values, X, 0.2, 0.5, M=0.5)
        with self.assertRaises(ValueError):
            check_tail_bound(values, X, 0.0, 0.5)

    def test_tail_bound_skips_when_mean_is_small(self):
        values = np.zeros(13)
        values[0] = 1.0
        report = check_tail_bound(values, self.X, 0.1, 0.5)
        self.assertTrue(report.quantities['tail-bound.skipped'])
        self.assertEqual(report.assertions, [])

    def test_tail_bound_alpha(self):
        values = np.arange(13, dtype=float)
        report = check_tail_bound_alpha(values, self.X, 3.0)
        self.assertTrue(report.passed)
        with self.assertRaises(ValueError):
            check_tail_bound_alpha(values, self.X, 0.5)

    def test_negative_values_rejected(self):
        with self.assertRaises(ValueError):
            check_tail_bound(-np.ones(13), self.X, 0.1, 0.5)


if __name__ == '__main__':
    unittest.main()
