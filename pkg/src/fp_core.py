"""
Prime-field arithmetic, multiplicative subgroups, cosets and the two
group views of F_p (additive on all residues, multiplicative on the
nonzero ones).

Residues are plain python ints in [0, p-1]. Nothing in this module uses
floating point.
"""

from typing import List, Tuple, Iterable
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
import logging

import numpy as np
from sympy import divisors, primefactors


logger = logging.getLogger(__name__)


MAX_PRIME = 2**31 - 1

# Deterministic for every n < 3.3 * 10^24, so in particular below 2^64.
MILLER_RABIN_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

# Tables indexed by residue (discrete logs, powers of g) are only built
# up to this size.
MAX_TABLE_P = 10**7


def is_prime(n: int) -> bool:
    """
    Deterministic Miller-Rabin with a fixed witness set.
    """
    if n < 2:
        return False
    for q in MILLER_RABIN_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MILLER_RABIN_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)):
            raise ValueError(f"p must be an integer, got {type(self.p)}")
        if self.p > MAX_PRIME:
            raise ValueError(f"p = {self.p} exceeds the cap 2^31 - 1")
        if not is_prime(int(self.p)):
            raise ValueError(f"p = {self.p} is not prime")
        object.__setattr__(self, 'p', int(self.p))

    @cached_property
    def g(self) -> int:
        return _smallest_primitive_root(self.p)

    @cached_property
    def group_order_factors(self) -> Tuple[int, ...]:
        return tuple(primefactors(self.p - 1)) if self.p > 2 else ()

    def subgroup_orders(self) -> List[int]:
        return [int(n) for n in divisors(self.p - 1)]

    def reduce(self, a: int) -> int:
        return int(a) % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ValueError("0 has no multiplicative inverse")
        return pow(int(a), -1, self.p)

    def power(self, a: int, e: int) -> int:
        return pow(int(a), int(e), self.p)

    def multiplicative_order(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ValueError("0 has no multiplicative order")
        order = self.p - 1
        for q in self.group_order_factors:
            while order % q == 0 and pow(a, order // q, self.p) == 1:
                order //= q
        return order


def _smallest_primitive_root(p: int) -> int:
    if p == 2:
        return 1
    factors = primefactors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise AssertionError(f"no primitive root found for prime {p}")


def primitive_root(field: PrimeField) -> int:
    """
    Smallest g in [2, p-1] of multiplicative order p-1 (1 for p = 2).
    """
    return field.g


@lru_cache(maxsize=16)
def _power_and_log_tables(p: int) -> Tuple[np.ndarray, np.ndarray]:
    if p > MAX_TABLE_P:
        raise ValueError(f"refusing to build residue tables for p = {p} > {MAX_TABLE_P}")
    g = _smallest_primitive_root(p)
    powers = np.empty(p - 1, dtype=np.int64)
    logs = np.full(p, -1, dtype=np.int64)
    x = 1
    for i in range(p - 1):
        powers[i] = x
        logs[x] = i
        x = (x * g) % p
    powers.setflags(write=False)
    logs.setflags(write=False)
    return powers, logs


def power_table(field: PrimeField) -> np.ndarray:
    """powers[i] = g^i for i in [0, p-2]."""
    return _power_and_log_tables(field.p)[0]


def discrete_log_table(field: PrimeField) -> np.ndarray:
    """logs[x] = i with g^i = x for x != 0; logs[0] = -1."""
    return _power_and_log_tables(field.p)[1]


class GroupMode(Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


@dataclass(frozen=True)
class GroupCtx:
    """
    F_p seen as the group (F_p, +) or (F_p^x, *).
    """
    field: PrimeField
    mode: GroupMode

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def is_additive(self) -> bool:
        return self.mode is GroupMode.ADDITIVE

    @property
    def identity(self) -> int:
        return 0 if self.is_additive else 1

    @property
    def order(self) -> int:
        return self.p if self.is_additive else self.p - 1

    def carrier(self) -> range:
        return range(self.p) if self.is_additive else range(1, self.p)

    def contains(self, a: int) -> bool:
        return 0 <= a < self.p and (self.is_additive or a != 0)

    def check(self, a: int) -> int:
        if not self.contains(a):
            raise ValueError(
                f"residue {a} is not in the {self.mode.value} carrier mod {self.p}")
        return int(a)

    def op(self, a: int, b: int) -> int:
        self.check(a)
        self.check(b)
        return self.field.add(a, b) if self.is_additive else self.field.mul(a, b)

    def inv(self, a: int) -> int:
        self.check(a)
        return self.field.neg(a) if self.is_additive else self.field.inv(a)

    def op_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise (broadcasting) group operation on int64 arrays."""
        if self.is_additive:
            return (a + b) % self.p
        return (a * b) % self.p

    def inv_array(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.is_additive:
            return (-a) % self.p
        if np.any(a == 0):
            raise ValueError("0 is not in the multiplicative carrier")
        return np.array([pow(int(x), -1, self.p) for x in a], dtype=np.int64)


def additive(field: PrimeField) -> GroupCtx:
    return GroupCtx(field, GroupMode.ADDITIVE)


def multiplicative(field: PrimeField) -> GroupCtx:
    return GroupCtx(field, GroupMode.MULTIPLICATIVE)


def group_op(ctx: GroupCtx, a: int, b: int) -> int:
    return ctx.op(a, b)


def group_inv(ctx: GroupCtx, a: int) -> int:
    return ctx.inv(a)


@dataclass(frozen=True)
class Subgroup:
    field: PrimeField
    elements: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.elements)
        if n == 0 or (self.field.p - 1) % n != 0:
            raise ValueError(
                f"a subgroup of F_{self.field.p}^x must have order dividing "
                f"{self.field.p - 1}, got {n} elements")
        if list(self.elements) != sorted(set(self.elements)):
            raise ValueError("subgroup elements must be sorted and distinct")

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def index(self) -> int:
        return (self.field.p - 1) // self.order

    @cached_property
    def element_set(self) -> frozenset:
        return frozenset(self.elements)

    def as_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64)

    def __contains__(self, x: int) -> bool:
        return x in self.element_set

    def __len__(self) -> int:
        return self.order


@lru_cache(maxsize=256)
def subgroup_of_order(field: PrimeField, n: int) -> Subgroup:
    """
    The unique subgroup of F_p^x of order n, i.e. {g^(k(p-1)/n)}, which
    is also the set of d-th powers for d = (p-1)/n.
    """
    p = field.p
    if n <= 0 or (p - 1) % n != 0:
        raise ValueError(f"n = {n} does not divide p - 1 = {p - 1}")
    h = pow(field.g, (p - 1) // n, p)
    elements = []
    x = 1
    for _ in range(n):
        elements.append(x)
        x = (x * h) % p
    return Subgroup(field, tuple(sorted(elements)))


def all_subgroups(field: PrimeField) -> List[Subgroup]:
    return [subgroup_of_order(field, n) for n in field.subgroup_orders()]


def coset_index(sub: Subgroup) -> np.ndarray:
    """
    idx[x] = j such that x lies in the coset g^j H, j in [0, index-1];
    idx[0] = -1.
    """
    logs = discrete_log_table(sub.field)
    idx = np.where(logs >= 0, logs % sub.index, -1)
    return idx


def cosets(sub: Subgroup) -> List[int]:
    """
    One representative per multiplicative H-coset of F_p^x: the smallest
    residue of each coset, in ascending order.
    """
    if sub.index == 1:
        return [1]
    idx = coset_index(sub)
    seen = set()
    reps = []
    for x in range(1, sub.p):
        j = int(idx[x])
        if j not in seen:
            seen.add(j)
            reps.append(x)
            if len(reps) == sub.index:
                break
    return reps


def parse_residues(field: PrimeField, values: Iterable[int]) -> List[int]:
    return sorted({field.reduce(v) for v in values})
