import sys; import os; sys.path.insert(1, os.path.join(os.getcwd(), "src"))


import unittest

import numpy as np

from fp_core import PrimeField, multiplicative, subgroup_of_order
from distributions import uniform_on, dirac, from_weights
from setstats import make_set
from structured_extract import (
    pow2, twisted_fourth_moment, untwisted_fourth_moment, verify_link2,
    check_lemma_energy, check_lemma_stepping, extract_structured, alt1_report)
from budgets import BudgetExceededError, ConditionsFailError


class TestMoments(unittest.TestCase):

    def test_uniform_moments(self):
        X = uniform_on(PrimeField(101), range(101))
        self.assertAlmostEqual(twisted_fourth_moment(X), 1.0, places=9)
        self.assertAlmostEqual(untwisted_fourth_moment(X), 1.0, places=9)

    def test_dirac_moments(self):
        X = dirac(PrimeField(101), 7)
        self.assertAlmostEqual(twisted_fourth_moment(X), 1.0, places=9)
        self.assertAlmostEqual(untwisted_fourth_moment(X), 1.0, places=9)

    def test_explicit_phi_matches(self):
        F = PrimeField(157)
        X = uniform_on(F, subgroup_of_order(F, 12).elements)
        self.assertAlmostEqual(twisted_fourth_moment(X, phi=X.char_fn.values),
                               twisted_fourth_moment(X), places=12)

    def test_budget(self):
        X = uniform_on(PrimeField(101), range(50))
        with self.assertRaises(BudgetExceededError):
            twisted_fourth_moment(X, budget=100)

    def test_link2(self):
        F = PrimeField(157)
        for X in (dirac(F, 3),
                  uniform_on(F, range(20)),
                  uniform_on(F, subgroup_of_order(F, 6).elements),
                  from_weights(F, np.arange(157) % 5 + 1.0)):
            self.assertTrue(verify_link2(X).passed)


class TestEnergyLemmas(unittest.TestCase):

    def setUp(self) -> None:
        self.F = PrimeField(157)
        self.ctx = multiplicative(self.F)
        self.H = make_set(self.ctx, subgroup_of_order(self.F, 12).elements)
        self.X = uniform_on(self.F, self.H.elements)

    def test_energy_lemma_on_subgroup(self):
        report = check_lemma_energy(self.X, self.H, self.ctx)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.quantities['beta'], 1.0)
        self.assertAlmostEqual(report.quantities['rho_Y_id'], 1 / 12)
        self.assertEqual(report.quantities['L_size'], 12)

    def test_energy_lemma_vacuous(self):
        X = dirac(self.F, 2)
        report = check_lemma_energy(X, make_set(self.ctx, [3]), self.ctx)
        self.assertTrue(report.quantities['energy-lemma.skipped'])
        with self.assertRaises(ValueError):
            check_lemma_energy(X, make_set(self.ctx, []), self.ctx)

    def test_stepping_lemma_on_subgroup(self):
        report = check_lemma_stepping(self.X, self.H, 2.0, 1.0, self.ctx)
        self.assertTrue(report.quantities['B_in_level_set'])
        self.assertTrue(report.passed)
        self.assertIn('e_B', report.quantities)

    def test_stepping_lemma_outside_level_set(self):
        report = check_lemma_stepping(self.X, make_set(self.ctx, [2]), 2.0, 1.0, self.ctx)
        self.assertFalse(report.quantities['B_in_level_set'])
        self.assertTrue(report.quantities['stepping-lemma.skipped'])


class TestExtraction(unittest.TestCase):

    def test_pow2(self):
        self.assertEqual(pow2(3), 8.0)
        self.assertEqual(pow2(2000), float('inf'))

    def test_dirac_fails_conditions(self):
        with self.assertRaises(ConditionsFailError):
            extract_structured(dirac(PrimeField(101), 0))

    def test_uniform_pipeline(self):
        F = PrimeField(101)
        cert = extract_structured(uniform_on(F, range(101)))
        self.assertTrue(cert.passed, [a.name for a in cert.report.failed_assertions()])
        self.assertEqual(len(cert.A1), 101)
        self.assertEqual(len(cert.A2), 100)
        self.assertTrue(cert.A4.element_set <= cert.A3.element_set)

    def test_alt1_dirac_is_case_zero(self):
        report = alt1_report(dirac(PrimeField(101), 5), 0.1)
        self.assertEqual(report.quantities['case'], 0)
        self.assertTrue(report.passed)

    def test_alt1_uniform_is_case_two(self):
        report = alt1_report(uniform_on(PrimeField(101), range(101)), 0.1)
        self.assertEqual(report.quantities['case'], 2)
        self.assertTrue(report.passed)

    def test_alt1_eta_range(self):
        with self.assertRaises(ValueError):
            alt1_report(dirac(PrimeField(13), 1), 1.0)


if __name__ == '__main__':
    unittest.main()
