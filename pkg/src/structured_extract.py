"""
Energy lemmas and the structured-set pipeline for a density X on F_p
with additive stepping Y = X1 - X2 and peaking Yhat.

    T = E(|phi_X(X Yhat)|^2),     E(rho_Y(XY)) = rho_Y(0) T,

and with alpha = rho_Y(0) / E(rho_Y(XY)) the pipeline

    A1 = {y : rho_Y(y) >= rho_Y(0) / (8 alpha)},  A2 = A1 minus {0},
    A3 = BSG of A2 in (F_p^x, *),                 A4 = BSG of A3 in (F_p, +)

produces a set with small sum set and product set. `alt1_report` sorts
an instance into the three cases of the resulting upper bound for T.
"""

from typing import Optional
from dataclasses import dataclass
import math
import logging

import numpy as np

from fp_core import GroupCtx, additive, multiplicative
from distributions import DistFp, stepping, peaking, from_weights, IDENTITY_TOL
from setstats import (
    FpSet, rep_counts, inv_set, normalized_energy, op_set, expansion_stats)
from bsg_extract import bsg, BsgCertificate
from budgets import ConditionsFailError, check_budget, check_quadratic_p
from reports import Report, safe_log2


logger = logging.getLogger(__name__)


# Entries of an (x, a) index matrix built at once in the double sums.
DOUBLE_SUM_CHUNK = 2**22


def _chunked_rows(xs: np.ndarray, width: int):
    rows = max(1, DOUBLE_SUM_CHUNK // max(1, width))
    for start in range(0, len(xs), rows):
        yield xs[start:start + rows]


def _twisted_inner(X: DistFp, weights: np.ndarray, values: np.ndarray) -> np.ndarray:
    """inner[i] = sum_a weights[a] values[x_i a mod p] over x_i in supp(X)."""
    p = X.p
    a = np.arange(p, dtype=np.int64)
    parts = []
    for xs in _chunked_rows(X.support, p):
        idx = np.multiply.outer(xs, a) % p
        parts.append(values[idx] @ weights)
    return np.concatenate(parts) if parts else np.zeros(0)


def twisted_fourth_moment(X: DistFp, phi: Optional[np.ndarray] = None,
                          budget: Optional[int] = None) -> float:
    """
    E(|phi_X(X Yhat)|^2) = sum_x sum_a rho_X(x) q(a) |phi_X(xa)|^2 with
    q = |phi_X|^2 / M_X the peaking density.

    Arguments:
    ----------
    X: DistFp
    phi: Optional[np.ndarray]
        Known characteristic function of X (e.g. the closed form of a
        walk); taken from X when None.
    budget: Optional[int]
        Term budget; p is capped at 20000 regardless.
    """
    check_quadratic_p('twisted_fourth_moment', X.p, budget)
    check_budget('twisted_fourth_moment', len(X.support) * X.p, budget)
    if phi is None:
        w = X.char_fn.abs_squared()
    else:
        w = np.abs(np.asarray(phi)) ** 2
    mass = math.fsum(w)
    q = w / mass
    inner = _twisted_inner(X, q, w)
    return math.fsum(X.density[X.support] * inner)


def untwisted_fourth_moment(X: DistFp) -> float:
    """E(|phi_X(Yhat)|^2) = sum_a |phi_X(a)|^4 / M_X."""
    w = X.char_fn.abs_squared()
    return math.fsum(w * w) / math.fsum(w)


def expected_rho_y_xy(X: DistFp, Y: DistFp, budget: Optional[int] = None) -> float:
    """E(rho_Y(XY)) = sum_x sum_y rho_X(x) rho_Y(y) rho_Y(xy)."""
    check_quadratic_p('expected_rho_y_xy', X.p, budget)
    check_budget('expected_rho_y_xy', len(X.support) * X.p, budget)
    inner = _twisted_inner(X, Y.density, Y.density)
    return math.fsum(X.density[X.support] * inner)


def verify_link2(X: DistFp, budget: Optional[int] = None) -> Report:
    """E(rho_Y(XY)) = rho_Y(0) E(|phi_X(X Yhat)|^2), both sides by direct sums."""
    report = Report('verify_link2', inputs={'p': X.p, 'support_size': len(X.support)})
    Y = stepping(X, additive(X.field))
    lhs = expected_rho_y_xy(X, Y, budget)
    T = twisted_fourth_moment(X, budget=budget)
    report.quantities.update({'E_rhoY_XY': lhs, 'rho_Y0': Y[0], 'twisted_moment': T})
    report.check_close('link-identity', lhs, Y[0] * T, IDENTITY_TOL)
    return report


def check_lemma_energy(X: DistFp, A: FpSet, ctx: GroupCtx) -> Report:
    """
    E(r_{A.A^-1}(X)) >= |A| / beta implies e(A) >= 1 / (4 beta^4 rho_Y(e) |A|),
    with beta taken from the hypothesis with equality, Y the ctx-stepping
    of X and e the identity of ctx (so rho_Y(e) = sum_x rho_X(x)^2).
    """
    if len(A) == 0:
        raise ValueError("check_lemma_energy needs a nonempty set")
    A = A.with_ctx(ctx)
    report = Report('lemma_energy', inputs={
        'p': X.p, 'ctx': ctx.mode.value, 'A_size': len(A)})
    r = rep_counts(A, inv_set(A))
    mean_r = X.expectation(r.astype(np.float64))
    report.quantities['E_r_X'] = mean_r
    if mean_r <= 0:
        report.skip('energy-lemma', "E(r(X)) = 0, hypothesis vacuous")
        return report
    n = len(A)
    beta = n / mean_r
    rho_y_id = stepping(X, ctx)[ctx.identity]
    e_A = normalized_energy(A)
    L_size = int(np.count_nonzero(r >= n / (2 * beta)))
    report.quantities.update({'beta': beta, 'rho_Y_id': rho_y_id, 'e_A': e_A, 'L_size': L_size})
    beta2 = beta * beta
    report.check_ge('energy-lemma.L', L_size, 1 / (4 * beta2 * rho_y_id), IDENTITY_TOL)
    report.check_ge('energy-lemma', e_A, 1 / (4 * beta2 * beta2 * rho_y_id * n), IDENTITY_TOL)
    return report


def check_lemma_stepping(X: DistFp, B: FpSet, alpha: float, beta: float,
                         ctx: GroupCtx) -> Report:
    """
    For B inside {x : P(Y = x) >= rho_Y(e) / alpha} with |B| >= 1/(beta rho_Y(e)):
    e(B) >= 1 / (4 alpha^9 beta^4).
    """
    B = B.with_ctx(ctx)
    report = Report('lemma_stepping', inputs={
        'p': X.p, 'ctx': ctx.mode.value, 'B_size': len(B), 'alpha': alpha, 'beta': beta})
    if len(B) == 0:
        report.skip('stepping-lemma', "B is empty")
        return report
    Y = stepping(X, ctx)
    rho_y_id = Y[ctx.identity]
    level = Y.density >= rho_y_id / alpha
    inside = bool(np.all(level[B.as_array()]))
    report.quantities['B_in_level_set'] = inside
    report.quantities['level_set_size'] = int(np.count_nonzero(level))
    if not inside:
        report.skip('stepping-lemma', "B is not inside the alpha-level set of rho_Y")
        return report
    if len(B) * rho_y_id * beta < 1 - 1e-12:
        report.skip('stepping-lemma', f"|B| rho_Y(id) beta = {len(B) * rho_y_id * beta:.6g} < 1")
        return report
    e_B = normalized_energy(B)
    report.quantities['e_B'] = e_B
    report.check_ge_pow2('stepping-lemma', e_B,
                         -(2 + 9 * math.log2(alpha) + 4 * math.log2(beta)))
    return report


@dataclass
class ExtractCertificate:
    X: DistFp
    Y: DistFp
    alpha: float
    rho_x0: float
    rho_y0: float
    E_rhoY_XY: float
    A1: FpSet
    A2: FpSet
    A3: FpSet
    A4: FpSet
    e_A2: float
    e_A3: float
    A4_sum_size: int
    A4_prod_size: int
    A3_prod_size: int
    bsg_mult: BsgCertificate
    bsg_add: BsgCertificate
    report: Report

    @property
    def passed(self) -> bool:
        return self.report.passed

    @property
    def doubling(self) -> float:
        return max(self.A4_sum_size, self.A4_prod_size) / len(self.A4)


def pow2(t: float) -> float:
    """2^t, inf when it does not fit in a double."""
    return math.inf if t >= 1024 else 2.0 ** t


def _restrict_to_units(X: DistFp) -> DistFp:
    weights = np.array(X.density, copy=True)
    weights[0] = 0.0
    return from_weights(X.field, weights)


def extract_structured(X: DistFp, budget: Optional[int] = None) -> ExtractCertificate:
    """
    Runs the A1 -> A2 -> A3 -> A4 pipeline and records every intermediate
    bound as an assertion row.

    Raises ConditionsFailError when P(X = 0) > 1/(4 alpha) or
    P(Y = 0) > 1/(4 alpha).
    """
    field = X.field
    p = field.p
    add_ctx = additive(field)
    mul_ctx = multiplicative(field)
    Y = stepping(X, add_ctx)
    rho_x0, rho_y0 = X[0], Y[0]
    E = expected_rho_y_xy(X, Y, budget)
    alpha = max(1.0, rho_y0 / E)
    log2_alpha = math.log2(alpha)
    logger.info(f"p={p}: rho_X(0)={rho_x0:.6g}, rho_Y(0)={rho_y0:.6g}, alpha={alpha:.6g}")

    if rho_x0 > 1 / (4 * alpha) or rho_y0 > 1 / (4 * alpha):
        raise ConditionsFailError(rho_x0, rho_y0, alpha)

    report = Report('extract', inputs={'p': p, 'support_size': len(X.support)})
    report.quantities.update({
        'alpha': alpha, 'rho_X0': rho_x0, 'rho_Y0': rho_y0, 'E_rhoY_XY': E})
    report.check_ge('eq-bgk-cond2', E, rho_y0 / alpha, 1e-12)
    report.check_le('eq-bgk-cond1.X', rho_x0, 1 / (4 * alpha))
    report.check_le('eq-bgk-cond1.Y', rho_y0, 1 / (4 * alpha))

    in_A1 = Y.density >= rho_y0 / (8 * alpha)
    A1 = FpSet(add_ctx, tuple(int(v) for v in np.flatnonzero(in_A1)))
    A2 = FpSet(mul_ctx, tuple(v for v in A1.elements if v != 0))
    report.quantities.update({'A1_size': len(A1), 'A2_size': len(A2)})
    report.check_ge('eq-bgk-lb1.lower', len(A1), 1 / (2 * alpha * rho_y0))
    report.check_le('eq-bgk-lb1.upper', len(A1), 8 * alpha / rho_y0)
    report.check_ge('eq-bgk-lb2.lower', len(A2), 1 / (4 * alpha * rho_y0))
    report.check_le('eq-bgk-lb2.upper', len(A2), 8 * alpha / rho_y0)

    # E(rho_Y(XY) 1{X != 0, Y in A1, XY in A1})
    supp = X.support[X.support != 0]
    y_in = np.flatnonzero(in_A1)
    restricted = np.where(in_A1, Y.density, 0.0)
    cond3_terms = [
        X.density[x] * math.fsum(Y.density[y_in] * restricted[(x * y_in) % p])
        for x in supp]
    cond3 = math.fsum(cond3_terms)
    report.quantities['cond3'] = cond3
    report.check_ge('eq-bgk-cond3', cond3, rho_y0 / (2 * alpha), 1e-12)

    r2 = rep_counts(A2, inv_set(A2))
    E_r2 = X.expectation(r2.astype(np.float64))
    report.quantities['E_r2_X'] = E_r2
    report.check_ge('eq-r2-lb', E_r2, len(A2) / (32 * alpha * alpha))

    X_units = _restrict_to_units(X)
    report.quantities['units_renormalization'] = 1.0 / (1.0 - rho_x0)
    if rho_x0 > 0:
        report.warn(f"X restricted to F_p^x for the energy lemma, "
                    f"renormalized by {1.0 / (1.0 - rho_x0):.6g}")
    report.merge(check_lemma_energy(X_units, A2, mul_ctx), 'A2.')

    e_A2 = normalized_energy(A2)
    report.quantities['e_A2'] = e_A2
    report.check_ge_pow2('e-A2', e_A2, -(25 + 9 * log2_alpha))

    alpha2 = max(pow2(25 + 9 * log2_alpha), 1.0 / e_A2)
    cert_mult = bsg(A2, alpha2, budget)
    report.merge(cert_mult.report(), 'bsg-mult.')
    A3 = cert_mult.B
    A3_prod = op_set(A3, A3)
    report.quantities.update({'A3_size': len(A3), 'A3_prod_size': len(A3_prod)})
    report.check_ge_pow2('A3.size', len(A3), safe_log2(len(A2)) - 27 - 9 * log2_alpha)
    report.check_le_pow2('A3.product-set', len(A3_prod),
                         164 + 54 * log2_alpha + math.log2(len(A3)))
    report.check_le_pow2('A3.ratio-set', cert_mult.BB_size,
                         164 + 54 * log2_alpha + math.log2(len(A3)))

    A3_add = A3.with_ctx(add_ctx)
    report.merge(check_lemma_stepping(
        X, A3_add, 8 * alpha, pow2(29 + 10 * log2_alpha), add_ctx), 'A3.')
    e_A3 = normalized_energy(A3_add)
    report.quantities['e_A3'] = e_A3
    report.check_ge_pow2('e-A3', e_A3, -(144 + 49 * log2_alpha))

    alpha3 = max(pow2(144 + 49 * log2_alpha), 1.0 / e_A3)
    cert_add = bsg(A3_add, alpha3, budget)
    report.merge(cert_add.report(), 'bsg-add.')
    A4 = cert_add.B
    A4_mul = A4.with_ctx(mul_ctx)
    A4_sum = len(op_set(A4, A4))
    A4_prod = len(op_set(A4_mul, A4_mul))
    report.quantities.update({
        'A4_size': len(A4), 'A4_sum_size': A4_sum, 'A4_prod_size': A4_prod,
        'A4': list(A4.elements)})

    report.check_true('chain.A2-subset-A1', A2.element_set <= A1.element_set and 0 not in A2)
    report.check_true('chain.A3-subset-A2', A3.issubset(A2))
    report.check_true('chain.A4-subset-A3', A4.element_set <= A3.element_set)
    report.check_ge_pow2('extract.A4-size.lower', len(A4),
                         -(31 + 10 * log2_alpha) - math.log2(rho_y0))
    report.check_le('extract.A4-size.upper', len(A4), 8 * alpha / rho_y0)
    report.check_le_pow2('extract.A4-doubling', max(A4_sum, A4_prod),
                         878 + 294 * log2_alpha + math.log2(len(A4)))
    report.check_le('A4.product-vs-A3', A4_prod, len(A3_prod))
    report.check_le('A3.size-vs-A4', len(A3), 4 * alpha3 * len(A4))

    logger.info(f"extract: |A1|={len(A1)}, |A2|={len(A2)}, |A3|={len(A3)}, |A4|={len(A4)}")
    return ExtractCertificate(
        X=X, Y=Y, alpha=alpha, rho_x0=rho_x0, rho_y0=rho_y0, E_rhoY_XY=E,
        A1=A1, A2=A2, A3=A3, A4=A4, e_A2=e_A2, e_A3=e_A3,
        A4_sum_size=A4_sum, A4_prod_size=A4_prod, A3_prod_size=len(A3_prod),
        bsg_mult=cert_mult, bsg_add=cert_add, report=report)


def alt1_report(X: DistFp, eta: float, budget: Optional[int] = None) -> Report:
    """
    Case analysis for T = E(|phi_X(X Yhat)|^2) with alpha = 1/T:

    0. conditions fail: T <= 4 (rho_X(0) + rho_Y(0));
    1. |A4| <= p^(1 - eta): the measured expansion of A4 is recorded;
    2. |A4| > p^(1 - eta): 1 / (|A4| rho_Y(0)) is recorded.
    """
    if not 0 < eta < 1:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    p = X.p
    report = Report('alt1', inputs={'p': p, 'eta': eta, 'support_size': len(X.support)})
    Y = stepping(X, additive(X.field))
    peak = peaking(X)
    T = twisted_fourth_moment(X, budget=budget)
    rho_x0, rho_y0 = X[0], Y[0]
    report.quantities.update({
        'twisted_moment': T,
        'untwisted_moment': untwisted_fourth_moment(X),
        'alpha': 1.0 / T if T > 0 else math.inf,
        'rho_X0': rho_x0,
        'rho_Y0': rho_y0,
        'M_X': peak.mass,
        'p_pow_eta_term': p ** (-1 + eta) / rho_y0,
    })
    report.check_ge('twisted-moment.lower-bound', T, max(rho_x0, 1.0 / peak.mass), IDENTITY_TOL)

    try:
        cert = extract_structured(X, budget)
    except ConditionsFailError as e:
        logger.info(f"alt1: case 0 ({e})")
        report.quantities['case'] = 0
        report.quantities['alpha_conditions'] = e.alpha
        report.check_le('case-0.bound', T, 4 * (rho_x0 + rho_y0), IDENTITY_TOL)
        return report

    report.merge(cert.report, 'extract.')
    size = len(cert.A4)
    if size <= p ** (1 - eta):
        report.quantities['case'] = 1
        report.quantities['A4_doubling'] = cert.doubling
        if size >= 2:
            stats = expansion_stats(cert.A4.with_ctx(multiplicative(X.field)))
            report.quantities.update({
                'A4_sum_size': stats.sum_size,
                'A4_prod_size': stats.prod_size,
                'A4_expansion_exponent': stats.exponent,
            })
        else:
            report.warn("|A4| < 2, no expansion exponent")
    else:
        report.quantities['case'] = 2
        report.quantities['inverse_A4_rho_Y0'] = 1.0 / (size * rho_y0)
    logger.info(f"alt1: case {report.quantities['case']}, |A4|={size}")
    return report
