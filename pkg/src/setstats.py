"""
Exact counting for finite sets in a group context: representation
functions, energies, product sets (sumsets in the additive context) and
sum-product expansion measurements.
"""

from typing import Dict, Iterable, Iterator, Optional, Tuple
from dataclasses import dataclass
from functools import cached_property
import math
import logging

import numpy as np

from fp_core import GroupCtx, additive, multiplicative


logger = logging.getLogger(__name__)


# Pairs materialized at once when counting representations.
REP_CHUNK_PAIRS = 2**22


@dataclass(frozen=True)
class FpSet:
    ctx: GroupCtx
    elements: Tuple[int, ...]

    def __post_init__(self):
        if list(self.elements) != sorted(set(self.elements)):
            raise ValueError("set elements must be sorted and distinct")
        for x in self.elements:
            self.ctx.check(x)

    @property
    def p(self) -> int:
        return self.ctx.p

    @cached_property
    def element_set(self) -> frozenset:
        return frozenset(self.elements)

    def as_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64)

    def indicator(self) -> np.ndarray:
        ind = np.zeros(self.p, dtype=bool)
        ind[list(self.elements)] = True
        return ind

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.element_set

    def issubset(self, other: 'FpSet') -> bool:
        return self.element_set <= other.element_set

    def with_ctx(self, ctx: GroupCtx) -> 'FpSet':
        """The same residues viewed in another group context."""
        return FpSet(ctx, self.elements)


def make_set(ctx: GroupCtx, values: Iterable[int]) -> FpSet:
    """Canonical FpSet from arbitrary integers (reduced mod p)."""
    return FpSet(ctx, tuple(sorted({int(v) % ctx.p for v in values})))


def _from_array(ctx: GroupCtx, values: np.ndarray) -> FpSet:
    return FpSet(ctx, tuple(int(v) for v in np.unique(values)))


@dataclass(frozen=True, eq=False)
class RepFn:
    """
    r_{A.B}: residues with at least one representation and their counts,
    residues ascending.
    """
    values: np.ndarray
    counts: np.ndarray

    def __getitem__(self, x: int) -> int:
        i = np.searchsorted(self.values, x)
        if i < len(self.values) and self.values[i] == x:
            return int(self.counts[i])
        return 0

    def total(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> Dict[int, int]:
        return {int(x): int(c) for x, c in zip(self.values, self.counts)}

    def dense(self, p: int) -> np.ndarray:
        out = np.zeros(p, dtype=np.int64)
        out[self.values] = self.counts
        return out

    def order_by_count(self) -> np.ndarray:
        """Residues by descending count, ties by ascending residue."""
        order = np.lexsort((self.values, -self.counts))
        return self.values[order]


def _check_same_ctx(A: FpSet, B: FpSet) -> None:
    if A.ctx != B.ctx:
        raise ValueError(
            f"sets live in different contexts: {A.ctx.mode.value} mod {A.p} "
            f"vs {B.ctx.mode.value} mod {B.p}")


def rep_counts(A: FpSet, B: FpSet) -> np.ndarray:
    """Dense r_{A.B} as an int64 array of length p."""
    _check_same_ctx(A, B)
    p = A.p
    a = A.as_array()
    b = B.as_array()
    counts = np.zeros(p, dtype=np.int64)
    rows = max(1, REP_CHUNK_PAIRS // max(1, len(b)))
    for start in range(0, len(a), rows):
        prods = A.ctx.op_arrays(a[start:start + rows, None], b[None, :])
        counts += np.bincount(prods.ravel(), minlength=p)
    return counts


def rep_fn(A: FpSet, B: FpSet) -> RepFn:
    counts = rep_counts(A, B)
    values = np.flatnonzero(counts).astype(np.int64)
    return RepFn(values, counts[values])


def energy(A: FpSet, B: FpSet) -> int:
    """E(A, B) = sum_x r_{A.B}(x)^2, exact."""
    counts = rep_counts(A, B)
    return int(np.dot(counts, counts))


def normalized_energy(A: FpSet, B: Optional[FpSet] = None) -> float:
    """
    e(A, B) = E(A, B) / (|A||B|)^{3/2}; e(A) = e(A, A) = E(A, A) / |A|^3.
    """
    if B is None:
        B = A
    if len(A) == 0 or len(B) == 0:
        raise ValueError("normalized energy of an empty set")
    if B is A:
        # Exact integer ratio, so e(A) <= 1 holds in floating point too.
        return energy(A, A) / len(A) ** 3
    return energy(A, B) / (len(A) * len(B)) ** 1.5


def op_set(A: FpSet, B: FpSet) -> FpSet:
    """A.B, or A + B in the additive context."""
    _check_same_ctx(A, B)
    return FpSet(A.ctx, tuple(int(x) for x in np.flatnonzero(rep_counts(A, B))))


def inv_set(A: FpSet) -> FpSet:
    return _from_array(A.ctx, A.ctx.inv_array(A.as_array()))


def ratio_set(A: FpSet, B: FpSet) -> FpSet:
    """A.B^-1, or A - B in the additive context."""
    return op_set(A, inv_set(B))


def translate(A: FpSet, x: int) -> FpSet:
    """A.x, or A + x."""
    A.ctx.check(x)
    return _from_array(A.ctx, A.ctx.op_arrays(A.as_array(), np.int64(x)))


def intersect(A: FpSet, B: FpSet) -> FpSet:
    _check_same_ctx(A, B)
    return FpSet(A.ctx, tuple(sorted(A.element_set & B.element_set)))


@dataclass
class ExpansionStats:
    size: int
    sum_size: int
    prod_size: int
    exponent: float


def expansion_stats(A: FpSet) -> ExpansionStats:
    """
    |A + A|, |A.A| and log(max(|A + A|, |A.A|)) / log|A| for A in F_p^x.
    """
    if len(A) < 2:
        raise ValueError(f"expansion needs |A| >= 2, got {len(A)}")
    if 0 in A:
        raise ValueError("expansion_stats needs A inside F_p^x")
    field = A.ctx.field
    A_add = A.with_ctx(additive(field))
    A_mul = A.with_ctx(multiplicative(field))
    sum_size = len(op_set(A_add, A_add))
    prod_size = len(op_set(A_mul, A_mul))
    exponent = math.log(max(sum_size, prod_size)) / math.log(len(A))
    return ExpansionStats(len(A), sum_size, prod_size, exponent)
