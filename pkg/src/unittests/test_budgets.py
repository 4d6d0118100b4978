import sys; import os; sys.path.insert(1, os.path.join(os.getcwd(), "src"))


import unittest

from budgets import (
    TERMS, PAIRS, SEARCH_K, BUDGET_ENV_VARS, DEFAULT_BUDGETS, QUADRATIC_P_CAP,
    BudgetExceededError, env_budget, resolve_budget, check_budget, check_quadratic_p)


class TestBudgetKinds(unittest.TestCase):

    def tearDown(self) -> None:
        for var in BUDGET_ENV_VARS.values():
            os.environ.pop(var, None)

    def test_defaults(self):
        for kind in (TERMS, PAIRS, SEARCH_K):
            self.assertEqual(resolve_budget(None, kind), DEFAULT_BUDGETS[kind])
        self.assertEqual(resolve_budget(None, TERMS, default=7), 7)

    def test_environment_is_read_per_kind(self):
        os.environ[BUDGET_ENV_VARS[TERMS]] = "5"
        self.assertEqual(resolve_budget(None, TERMS), 5)
        self.assertEqual(resolve_budget(None, PAIRS), DEFAULT_BUDGETS[PAIRS])
        self.assertEqual(resolve_budget(None, SEARCH_K), DEFAULT_BUDGETS[SEARCH_K])
        os.environ[BUDGET_ENV_VARS[SEARCH_K]] = "9"
        self.assertEqual(env_budget(SEARCH_K), 9)
        self.assertEqual(resolve_budget(3, SEARCH_K), 3)

    def test_bad_values(self):
        with self.assertRaises(ValueError):
            resolve_budget(0, TERMS)
        with self.assertRaises(ValueError):
            resolve_budget(None, 'nonsense')
        os.environ[BUDGET_ENV_VARS[PAIRS]] = "many"
        with self.assertRaises(ValueError):
            env_budget(PAIRS)
        os.environ[BUDGET_ENV_VARS[PAIRS]] = "-1"
        with self.assertRaises(ValueError):
            env_budget(PAIRS)

    def test_check_budget(self):
        check_budget('sum', 10, budget=10)
        with self.assertRaises(BudgetExceededError) as ctx:
            check_budget('sum', 11, budget=10)
        self.assertEqual((ctx.exception.what, ctx.exception.cost, ctx.exception.budget), ('sum', 11, 10))
        os.environ[BUDGET_ENV_VARS[PAIRS]] = "1"
        check_budget('sum', 11)

    def test_quadratic_cap(self):
        check_quadratic_p('moment', 101)
        with self.assertRaises(BudgetExceededError):
            check_quadratic_p('moment', QUADRATIC_P_CAP + 1)
        os.environ[BUDGET_ENV_VARS[TERMS]] = "100"
        with self.assertRaises(BudgetExceededError):
            check_quadratic_p('moment', 11)
        os.environ[BUDGET_ENV_VARS[SEARCH_K]] = "1"
        check_quadratic_p('moment', 7)


if __name__ == '__main__':
    unittest.main()
