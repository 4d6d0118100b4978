"""
Deterministic Balog-Szemeredi-Gowers extraction in Schoen's form.

Given A with e(A) >= 1/alpha, `find_pivot` picks x with

    |A n A.x|^2 - |{(a, b) in (A n A.x)^2 : r(ab^-1) < gamma |A|}| / delta
        >= |A|^2 / (2 alpha^2),    gamma = delta / (2 alpha^2),

scanning candidates by descending r(x) instead of drawing x at random,
and `bsg` turns the pivot into B with |B| >= |A|/(4 alpha) and
|B.B^-1| <= 2^14 alpha^6 |B|.

r is always the representation function of A.A^-1, so r(x) = |A n A.x|.
"""

from typing import List, Optional
from dataclasses import dataclass, field
import math
import logging

import numpy as np

from setstats import FpSet, rep_counts, inv_set, normalized_energy, ratio_set
from budgets import (
    PAIRS, TERMS, BudgetExceededError, ConsistencyError, resolve_budget)
from reports import Report


logger = logging.getLogger(__name__)


BSG_DELTA = 0.1
HYPOTHESIS_REL_TOL = 1e-12


@dataclass
class PivotResult:
    x: int
    C: FpSet
    f_value: float
    target: float
    good_pairs: int
    gamma_threshold: float
    candidates_tried: int
    pairs_evaluated: int


@dataclass
class BsgCertificate:
    A: FpSet
    alpha: float
    delta: float
    pivot: int
    C: FpSet
    y_threshold: float
    Y_size: int
    B: FpSet
    BB_size: int
    ratio: float
    f_value: float
    good_pairs: int
    n_sizes_min: int
    schoen5_min: Optional[int] = None
    warnings: List[str] = field(default_factory=list)

    def report(self, prefix: str = "") -> Report:
        """
        Certificate bounds and proof diagnostics as assertion rows.
        """
        a, b, c = len(self.A), len(self.B), len(self.C)
        log2_alpha = math.log2(self.alpha)
        report = Report('bsg', inputs={
            'p': self.A.p, 'ctx': self.A.ctx.mode.value, 'A_size': a,
            'alpha': self.alpha, 'delta': self.delta})
        report.quantities.update({
            'pivot': self.pivot,
            'C_size': c,
            'Y_size': self.Y_size,
            'y_threshold': self.y_threshold,
            'B_size': b,
            'BB_size': self.BB_size,
            'ratio': self.ratio,
            'f_value': self.f_value,
            'N_min': self.n_sizes_min,
            'B': list(self.B.elements),
        })
        report.check_true('bsg.B-subset-C', self.B.issubset(self.C))
        report.check_true('bsg.C-subset-A', self.C.issubset(self.A))
        report.check_ge('eq-bgs-1.size', b, a / (4 * self.alpha))
        report.check_le_pow2('eq-bgs-1.doubling', self.BB_size,
                             14 + 6 * log2_alpha + math.log2(b))
        report.check_ge('eq-schoen-1', c, a / (2 * self.alpha))
        report.check_ge('eq-schoen-2', self.good_pairs, (1 - self.delta) * c * c)
        report.check_le_pow2('eq-schoen-4', self.Y_size,
                             math.log2(20) + 2 * log2_alpha + math.log2(a))
        if self.schoen5_min is not None:
            report.quantities['schoen5_min'] = self.schoen5_min
            report.check_ge('eq-schoen-5', self.schoen5_min, c / 3)
        for w in self.warnings:
            report.warn(w)
        if prefix:
            prefixed = Report(report.command, inputs=report.inputs)
            prefixed.merge(report, prefix)
            return prefixed
        return report


def _ratio_matrix(C: FpSet) -> np.ndarray:
    """M[i, j] = c_i c_j^-1 (c_i - c_j additively)."""
    c = C.as_array()
    return C.ctx.op_arrays(c[:, None], C.ctx.inv_array(c)[None, :])


def _check_hypothesis(A: FpSet, alpha: float) -> float:
    e = normalized_energy(A)
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if e * alpha < 1 - HYPOTHESIS_REL_TOL:
        raise ValueError(f"e(A) = {e!r} < 1/alpha = {1 / alpha!r}")
    return e


def find_pivot(A: FpSet, alpha: float, delta: float,
               pair_budget: Optional[int] = None) -> PivotResult:
    """
    First x in descending-r order (ties by ascending residue) with
    f(x) >= |A|^2 / (2 alpha^2).

    Arguments:
    ----------
    A: FpSet
        Nonempty set with e(A) >= 1/alpha.
    alpha: float
        Energy parameter, >= 1.
    delta: float
        In (0, 1).
    pair_budget: Optional[int]
        Cap on the total number of pairs examined over all candidates
        (the `pairs` budget kind).

    Returns:
    --------
    PivotResult with C = A n A.x.
    """
    if len(A) == 0:
        raise ValueError("find_pivot needs a nonempty set")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    _check_hypothesis(A, alpha)
    limit = resolve_budget(pair_budget, PAIRS)

    ctx = A.ctx
    n = len(A)
    r = rep_counts(A, inv_set(A))
    gamma_threshold = delta * n / (2 * (alpha * alpha))
    target = n * n / (2 * (alpha * alpha))
    a_arr = A.as_array()
    in_A = A.indicator()

    support = np.flatnonzero(r)
    order = support[np.lexsort((support, -r[support]))]
    spent = 0
    for tried, x in enumerate(order, start=1):
        x = int(x)
        c_size = int(r[x])
        if c_size * c_size < target:
            # f(x) <= r(x)^2 and r only decreases from here on.
            raise ConsistencyError(
                f"find_pivot: no admissible pivot; r(x)^2 = {c_size ** 2} "
                f"already below {target!r} after {tried - 1} candidates")
        spent += c_size * c_size
        if spent > limit:
            logger.warning(f"pivot search stopped after {tried - 1} candidates")
            raise BudgetExceededError('find_pivot', spent, limit)

        shifted = ctx.op_arrays(a_arr, np.int64(ctx.inv(x)))
        C = FpSet(ctx, tuple(int(v) for v in a_arr[in_A[shifted]]))
        if len(C) != c_size:
            raise ConsistencyError(f"|A n A.{x}| = {len(C)} but r({x}) = {c_size}")

        bad = int(np.count_nonzero(r[_ratio_matrix(C)] < gamma_threshold))
        f_value = c_size * c_size - bad / delta
        logger.debug(f"candidate x={x}: |C|={c_size}, bad pairs={bad}, f={f_value:.6g}")
        if f_value >= target:
            logger.info(f"pivot x={x} after {tried} candidates, |C|={c_size}")
            return PivotResult(x, C, f_value, target, c_size * c_size - bad,
                               gamma_threshold, tried, spent)

    raise ConsistencyError(f"find_pivot exhausted all {len(order)} candidates")


def bsg(A: FpSet, alpha: Optional[float] = None,
        budget: Optional[int] = None,
        pair_budget: Optional[int] = None) -> BsgCertificate:
    """
    Theorem-style extraction with delta = 1/10: C from the pivot,
    Y = {y : r(y) >= delta |A| / (2 alpha^2)}, N(c) = {b in C : cb^-1 in Y}
    and B = {c in C : |N(c)| >= (1 - sqrt(delta)) |C|}.

    alpha defaults to 1/e(A). `budget` caps the |Y|^2 terms of the
    ratio-set check, `pair_budget` the pivot search.
    """
    if len(A) == 0:
        raise ValueError("bsg needs a nonempty set")
    if alpha is None:
        alpha = 1.0 / normalized_energy(A)
    delta = BSG_DELTA
    pivot = find_pivot(A, alpha, delta, pair_budget)

    ctx = A.ctx
    n = len(A)
    r = rep_counts(A, inv_set(A))
    y_threshold = delta * n / (2 * (alpha * alpha))
    in_Y = (r > 0) & (r >= y_threshold)
    Y_elements = np.flatnonzero(in_Y)

    C = pivot.C
    c_arr = C.as_array()
    n_sizes = np.count_nonzero(in_Y[_ratio_matrix(C)], axis=1)
    keep = n_sizes >= (1 - math.sqrt(delta)) * len(C)
    B = FpSet(ctx, tuple(int(v) for v in c_arr[keep]))
    if len(B) == 0:
        raise ConsistencyError("bsg produced an empty B")
    BB = ratio_set(B, B)

    warnings = []
    schoen5_min = None
    cost = len(Y_elements) ** 2
    limit = resolve_budget(budget, TERMS)
    if cost <= limit:
        Y_set = FpSet(ctx, tuple(int(v) for v in Y_elements))
        s = rep_counts(Y_set, inv_set(Y_set))
        schoen5_min = int(s[BB.as_array()].min())
    else:
        warnings.append(f"eq-schoen-5 skipped: |Y|^2 = {cost} over budget {limit}")
        logger.warning(warnings[-1])

    cert = BsgCertificate(
        A=A, alpha=alpha, delta=delta, pivot=pivot.x, C=C,
        y_threshold=y_threshold, Y_size=len(Y_elements), B=B, BB_size=len(BB),
        ratio=len(BB) / len(B), f_value=pivot.f_value, good_pairs=pivot.good_pairs,
        n_sizes_min=int(n_sizes.min()), schoen5_min=schoen5_min, warnings=warnings)
    logger.info(f"bsg: |A|={n}, alpha={alpha:.6g}, |C|={len(C)}, |B|={len(B)}, "
                f"|BB^-1|/|B|={cert.ratio:.6g}")
    return cert
