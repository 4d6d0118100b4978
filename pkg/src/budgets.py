"""
Operation budgets and the typed errors shared by all modules.

A budget is a number of elementary steps an operation is allowed to
spend. Every quadratic-cost operation projects its cost before doing
the work and raises `BudgetExceededError` instead of running for hours.

Budgets come in named kinds that never cap each other:

* `terms`: summands of double sums and other term counts
* `pairs`: pair evaluations of the BSG pivot search
* `search-k`: the largest walk length the (k, nu) search may reach

Resolution order for a budget: explicit argument > the kind's
environment variable > the operation's default.
"""

from typing import Optional
import os
import logging


logger = logging.getLogger(__name__)


TERMS = 'terms'
PAIRS = 'pairs'
SEARCH_K = 'search-k'

BUDGET_ENV_VARS = {
    TERMS: "BGKLAB_BUDGET",
    PAIRS: "BGKLAB_PAIR_BUDGET",
    SEARCH_K: "BGKLAB_SEARCH_K_BUDGET",
}
BUDGET_ENV_VAR = BUDGET_ENV_VARS[TERMS]

PIVOT_PAIRS_BUDGET = 10**9
TERMS_BUDGET = 10**8
QUADRATIC_P_CAP = 20_000
MAX_SEARCH_K = 10**7

DEFAULT_BUDGETS = {
    TERMS: TERMS_BUDGET,
    PAIRS: PIVOT_PAIRS_BUDGET,
    SEARCH_K: MAX_SEARCH_K,
}


class BudgetExceededError(RuntimeError):
    def __init__(self, what: str, cost: int, budget: int) -> None:
        super().__init__(
            f"{what}: projected cost {cost} exceeds budget {budget}")
        self.what = what
        self.cost = cost
        self.budget = budget


class ConditionsFailError(Exception):
    """
    The instance does not satisfy P(X=0) <= 1/(4 alpha) and
    P(Y=0) <= 1/(4 alpha). This is an expected branch of the case
    analysis, not a bug.
    """
    def __init__(self, rho_x0: float, rho_y0: float, alpha: float) -> None:
        super().__init__(
            f"conditions-fail: rho_X(0)={rho_x0:.6g}, rho_Y(0)={rho_y0:.6g}, "
            f"1/(4 alpha)={1 / (4 * alpha):.6g}")
        self.rho_x0 = rho_x0
        self.rho_y0 = rho_y0
        self.alpha = alpha


class ConsistencyError(RuntimeError):
    """An identity that holds by construction failed. Always a bug."""


def _kind_env_var(kind: str) -> str:
    if kind not in BUDGET_ENV_VARS:
        raise ValueError(f"unknown budget kind {kind!r}, expected one of {sorted(BUDGET_ENV_VARS)}")
    return BUDGET_ENV_VARS[kind]


def env_budget(kind: str = TERMS) -> Optional[int]:
    var = _kind_env_var(kind)
    raw = os.environ.get(var)
    if raw is None or raw.strip() == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{var} must be an integer, got {raw!r}")
    if value <= 0:
        raise ValueError(f"{var} must be positive, got {value}")
    return value


def resolve_budget(budget: Optional[int], kind: str = TERMS,
                   default: Optional[int] = None) -> int:
    """
    `default` replaces the kind's default for operations with a
    tighter or looser natural cap.
    """
    if budget is not None:
        if budget <= 0:
            raise ValueError(f"budget must be positive, got {budget}")
        return budget
    from_env = env_budget(kind)
    if from_env is not None:
        return from_env
    return default if default is not None else DEFAULT_BUDGETS[kind]


def check_budget(what: str, cost: int,
                 budget: Optional[int] = None,
                 kind: str = TERMS,
                 default: Optional[int] = None) -> None:
    limit = resolve_budget(budget, kind, default)
    if cost > limit:
        logger.warning(f"{what}: cost {cost} over {kind} budget {limit}")
        raise BudgetExceededError(what, cost, limit)


def check_quadratic_p(what: str, p: int,
                      budget: Optional[int] = None) -> None:
    """
    Quadratic expectations over F_p x F_p are capped at p <= 20000.
    A terms budget set below p^2 also stops them.
    """
    if p > QUADRATIC_P_CAP:
        raise BudgetExceededError(what, p * p, QUADRATIC_P_CAP ** 2)
    check_budget(what, p * p, budget, TERMS, default=QUADRATIC_P_CAP ** 2)
