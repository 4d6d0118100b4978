import sys; import os; sys.path.insert(1, os.path.join(os.getcwd(), "src"))


import math
import unittest

from fp_core import PrimeField
from instance_corpus import set_corpus, density_corpus, SET_KINDS, DENSITY_KINDS, DENSITY_PRIMES


class TestSetCorpus(unittest.TestCase):

    @classmethod
    def setUpClass(cls) -> None:
        cls.corpus = set_corpus(seed=0)

    def test_size_and_kinds(self):
        self.assertEqual(len(self.corpus), 240)
        self.assertEqual({item.kind for item in self.corpus}, set(SET_KINDS))
        self.assertEqual(len({item.label for item in self.corpus}), 240)

    def test_sets_are_valid(self):
        for item in self.corpus:
            self.assertGreaterEqual(len(item.A), 1, item.label)
            self.assertLessEqual(len(item.A), 128, item.label)
            if not item.A.ctx.is_additive:
                self.assertNotIn(0, item.A, item.label)

    def test_deterministic(self):
        again = set_corpus(seed=0)
        self.assertEqual([c.A.elements for c in again], [c.A.elements for c in self.corpus])
        other = set_corpus(seed=1)
        self.assertNotEqual([c.A.elements for c in other], [c.A.elements for c in self.corpus])

    def test_max_size_range(self):
        with self.assertRaises(ValueError):
            set_corpus(max_size=1)
        with self.assertRaises(ValueError):
            set_corpus(max_size=10**4)


class TestDensityCorpus(unittest.TestCase):

    def test_densities(self):
        corpus = density_corpus(seed=0)
        random_part = [item for item in corpus if item.kind != 'subgroup']
        self.assertEqual(len(random_part), 120)
        self.assertEqual({item.kind for item in corpus}, set(DENSITY_KINDS))
        for item in corpus:
            self.assertAlmostEqual(math.fsum(item.X.density), 1.0, places=12)

    def test_every_subgroup_is_covered(self):
        corpus = density_corpus(seed=0, count=0)
        # Divisor counts of p - 1 for p = 13, 101, 157, 257, 1009, 2003.
        self.assertEqual(len(corpus), 6 + 9 + 12 + 9 + 30 + 16)
        for p in DENSITY_PRIMES:
            orders = sorted(len(item.X.support) for item in corpus if item.X.p == p)
            self.assertEqual(orders, PrimeField(p).subgroup_orders())

    def test_deterministic(self):
        a = density_corpus(seed=4, count=12)
        b = density_corpus(seed=4, count=12)
        for x, y in zip(a, b):
            self.assertEqual(x.label, y.label)
            self.assertEqual(list(x.X.density), list(y.X.density))


if __name__ == '__main__':
    unittest.main()
