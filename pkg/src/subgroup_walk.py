"""
Exponential sums over a multiplicative subgroup H of F_p^x and the
alternating walk built from them.

    phi_S(a) = (1/|H|) sum_{x in H} e(ax/p)
    X_k = S_1 - S_2 + ... + S_{2k-1} - S_{2k},  S_i uniform on H
    phi_{X_k}(a) = |phi_S(a)|^{2k},  M_k = sum_a |phi_S(a)|^{4k}
    Lambda_nu = {a : |phi_S(a)| > p^-nu}

phi_S is constant on multiplicative H-cosets, so everything here is
evaluated on one representative per coset (g^j, j < index) and
broadcast through the coset index table.
"""

from typing import Any, Dict, List, Optional, Tuple
from dataclasses import dataclass, field
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from functools import lru_cache
import math
import logging

import numpy as np
from sympy import primerange
from tqdm import tqdm

from fp_core import (
    PrimeField, Subgroup, subgroup_of_order, power_table, discrete_log_table,
    coset_index, cosets, additive)
from fourier_utils import (
    roots_of_unity, char_sums_direct, fsum_complex, log_abs, power_from_log, log_sum_exp)
from distributions import (
    DistFp, CharFn, IDENTITY_TOL, uniform_on, stepping, convolve, peaking,
    density_at, complex_expectation)
from structured_extract import DOUBLE_SUM_CHUNK, twisted_fourth_moment
from budgets import (
    SEARCH_K, BudgetExceededError, ConsistencyError, QUADRATIC_P_CAP,
    check_budget, check_quadratic_p, resolve_budget)
from reports import Report


logger = logging.getLogger(__name__)


# Walk powers above this go through log|phi_S|.
LOG_DOMAIN_K = 30
SPECTRUM_TIE_TOL = 1e-9
SQRT_P_TOL = 1e-6
SEARCH_START_K = 4
SCAN_COLUMNS = ['p', 'subgroup_order', 'max_abs_sum', 'normalized', 'sqrt_p_ok']


@dataclass(frozen=True)
class WalkSpec:
    sub: Subgroup
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"walk length k must be a positive integer, got {self.k}")

    @property
    def p(self) -> int:
        return self.sub.p


def subgroup_char_sum(sub: Subgroup, a: int) -> complex:
    """phi_S(a) by direct summation over H."""
    p = sub.p
    weights = np.full(sub.order, 1.0 / sub.order)
    return complex(char_sums_direct(
        p, sub.as_array(), weights, np.array([a % p], dtype=np.int64))[0])


def _coset_values(sub: Subgroup) -> np.ndarray:
    """phi_S(g^j) for j in [0, index - 1]."""
    reps = power_table(sub.field)[:sub.index]
    weights = np.full(sub.order, 1.0 / sub.order)
    return char_sums_direct(sub.p, sub.as_array(), weights, reps)


@lru_cache(maxsize=32)
def _char_table(sub: Subgroup) -> np.ndarray:
    table = _coset_values(sub)[np.maximum(coset_index(sub), 0)]
    table[0] = 1.0
    table.setflags(write=False)
    return table


def subgroup_char_table(sub: Subgroup) -> np.ndarray:
    """
    phi_S(a) for every a in F_p, computed on coset representatives and
    broadcast. O(p) summands in total.
    """
    return _char_table(sub)


def gauss_sum(field: PrimeField, d: int, a: int) -> complex:
    """
    G_d(a; p) = sum_{x in F_p} e(a x^d / p), checked against
    1 + d sum_{y in H_d} e(ay/p) with H_d the d-th powers.

    Arguments:
    ----------
    field: PrimeField
    d: int
        Divisor of p - 1.
    a: int
        Nonzero residue.

    Returns:
    --------
    The directly summed value.
    """
    p = field.p
    if d <= 0 or (p - 1) % d != 0:
        raise ValueError(f"d = {d} does not divide p - 1 = {p - 1}")
    a %= p
    if a == 0:
        raise ValueError("gauss_sum needs a nonzero a")
    roots = roots_of_unity(p)
    logs = discrete_log_table(field)
    powers = power_table(field)

    x = np.arange(1, p, dtype=np.int64)
    x_d = powers[(logs[x] * d) % (p - 1)]
    direct = 1.0 + fsum_complex(roots[(a * x_d) % p])

    H_d = subgroup_of_order(field, (p - 1) // d)
    via_subgroup = 1.0 + d * fsum_complex(roots[(a * H_d.as_array()) % p])
    if abs(direct - via_subgroup) > IDENTITY_TOL:
        raise ConsistencyError(
            f"G_{d}({a}; {p}): direct {direct!r} vs subgroup form {via_subgroup!r}")
    return direct


def walk_char_fn(spec: WalkSpec) -> CharFn:
    """phi_{X_k} = |phi_S|^{2k} as an explicit CharFn (real, in [0, 1])."""
    mags = np.abs(subgroup_char_table(spec.sub))
    if spec.k <= LOG_DOMAIN_K:
        values = mags ** (2 * spec.k)
    else:
        values = power_from_log(log_abs(mags), 2 * spec.k)
    return CharFn(spec.sub.field, values=values)


def walk_distribution(spec: WalkSpec) -> DistFp:
    """
    Density of X_k: X_1 = S_1 - S_2 is the additive stepping of the
    uniform density on H, and X_k is the k-fold convolution of X_1,
    built by repeated squaring.
    """
    field = spec.sub.field
    step = stepping(uniform_on(field, spec.sub.elements), additive(field))
    result = None
    k = spec.k
    while k:
        if k & 1:
            result = step if result is None else convolve(result, step)
        k >>= 1
        if k:
            step = convolve(step, step)
    return result


def walk_density_at(spec: WalkSpec, y: int) -> float:
    """P(X_k = y) by inverting phi_{X_k} at one point."""
    return density_at(walk_char_fn(spec), y)


@dataclass
class Spectrum:
    sub: Subgroup
    nu: float
    members: Tuple[int, ...]
    coset_reps: List[int]
    threshold: float
    ties: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def is_trivial(self) -> bool:
        return self.members == (0,)


def spectrum(sub: Subgroup, nu: float) -> Spectrum:
    """
    Lambda_nu by strict comparison of |phi_S| with p^-nu. Coset
    representatives within 1e-9 of the threshold are listed in `ties`.
    """
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    p = sub.p
    threshold = float(p) ** (-nu)
    mags = np.abs(subgroup_char_table(sub))
    members = tuple(int(a) for a in np.flatnonzero(mags > threshold))
    member_set = set(members)
    reps = cosets(sub)
    coset_reps = [a for a in reps if a in member_set]
    ties = [a for a in reps if abs(mags[a] - threshold) <= SPECTRUM_TIE_TOL]
    if ties:
        logger.warning(f"spectrum p={p}, |H|={sub.order}, nu={nu:.6g}: "
                       f"{len(ties)} coset values within {SPECTRUM_TIE_TOL} of p^-nu")
    return Spectrum(sub, nu, members, coset_reps, threshold, ties)


def check_spectrum(spec: Spectrum) -> Report:
    """Structural facts about Lambda_nu as assertion rows."""
    sub = spec.sub
    p, n = sub.p, sub.order
    report = Report('spectrum', inputs={'p': p, 'subgroup_order': n, 'nu': spec.nu})
    size = len(spec)
    report.quantities.update({
        'lambda_size': size, 'threshold': spec.threshold, 'coset_reps': spec.coset_reps})
    for a in spec.ties:
        report.warn(f"|phi_S({a})| within {SPECTRUM_TIE_TOL} of p^-nu")
    report.check_true('lambda.contains-zero', 0 in spec.members)

    nonzero = np.array([a for a in spec.members if a != 0], dtype=np.int64)
    if len(nonzero) and sub.index > 1:
        per_coset = np.bincount(coset_index(sub)[nonzero], minlength=sub.index)
        union = bool(np.all((per_coset == 0) | (per_coset == n)))
    else:
        union = len(nonzero) in (0, n)
    report.check_true('spectrum.union-of-cosets', union)
    report.check_le('lambda.size-upper', size, float(p) ** (1 + 2 * spec.nu) / n + 1)
    if not spec.is_trivial:
        report.check_ge('spectrum.size-lower', size, n)
    return report


def log_mass(sub: Subgroup, k: int) -> float:
    """log M_{X_k} = log sum_a |phi_S(a)|^{4k}."""
    logs = log_abs(subgroup_char_table(sub))
    return log_sum_exp(4 * k * logs)


@dataclass
class SearchResult:
    theta: float
    k: int
    k_plus: int
    nu: float
    M_k: float
    lambda_size: int
    iterations: List[Dict[str, Any]]
    spectrum: Spectrum
    report: Report


def search_k_nu(sub: Subgroup, theta: float,
                max_k: Optional[int] = None) -> SearchResult:
    """
    Starting from k = 4, tests M_{X_k} <= p^theta |Lambda_nu| with
    nu = 1/k+, k+ = ceil(k^2 / theta), and moves to k = k+ on failure.

    Arguments:
    ----------
    sub: Subgroup
    theta: float
        In (0, 1).
    max_k: Optional[int]
        Cap on k, the `search-k` budget kind (10^7 by default).

    Returns:
    --------
    SearchResult with the full iteration trace and a report holding the
    checks of the returned pair.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    limit = resolve_budget(max_k, SEARCH_K)
    p = sub.p
    log_p = math.log(p)
    report = Report('walk', inputs={'p': p, 'subgroup_order': sub.order, 'theta': theta})
    report.warn("k+ is taken as ceil(k^2 / theta)")

    k = SEARCH_START_K
    while True:
        if k > limit:
            raise BudgetExceededError('search_k_nu', k, limit)
        k_plus = math.ceil(k * k / theta)
        nu = 1.0 / k_plus
        log_M = log_mass(sub, k)
        M = math.exp(log_M)
        lam = spectrum(sub, nu)
        lam_1k = spectrum(sub, 1.0 / k)
        crude_ok = M <= len(lam_1k) + float(p) ** -3 + IDENTITY_TOL * M
        success = log_M <= theta * log_p + math.log(len(lam)) + 1e-12
        entry = {
            'k': k, 'k_plus': k_plus, 'nu': nu, 'M_k': M,
            'lambda_size': len(lam), 'lambda_1k_size': len(lam_1k),
            'crude_bound_ok': crude_ok, 'success': success,
        }
        report.add_trace(entry)
        logger.info(f"search p={p}, |H|={sub.order}: k={k}, nu={nu:.3g}, "
                    f"M_k={M:.6g}, |Lambda|={len(lam)}, success={success}")
        report.check_le(f"crude-bound.k{k}", M, len(lam_1k) + float(p) ** -3, IDENTITY_TOL * M)
        if success:
            break
        k = k_plus

    report.quantities.update({
        'k': k, 'k_plus': k_plus, 'nu': nu, 'M_k': M, 'lambda_size': len(lam),
        'iterations': len(report.trace)})
    report.check_le('search.4k-nu', 4 * k * nu, theta, 1e-12)
    lower = len(lam) * float(p) ** (-1 - theta)
    upper = len(lam) * float(p) ** (-1 + theta)
    report.check_ge('eq-m-bound.lower', M / p, lower, IDENTITY_TOL * lower)
    report.check_le('eq-m-bound.upper', M / p, upper, IDENTITY_TOL * upper)
    rho_2k0 = walk_density_at(WalkSpec(sub, 2 * k), 0)
    report.quantities['rho_X2k0'] = rho_2k0
    report.check_close('eq-rho1.walk', rho_2k0, M / p, IDENTITY_TOL)
    report.merge(check_spectrum(lam), 'spectrum.')
    return SearchResult(theta, k, k_plus, nu, M, len(lam), report.trace, lam, report)


def _expansion_terms(phi_k: np.ndarray, table: np.ndarray, k: int,
                     X_k: DistFp, X_2k: DistFp, a: int) -> Dict[str, Any]:
    scaled = (a * np.arange(len(phi_k), dtype=np.int64)) % len(phi_k)
    phi_a = float(phi_k[a])
    return {
        'lhs': X_k.expectation(phi_k[scaled] ** 2),
        'middle': X_2k.expectation(phi_k[scaled]),
        'fubini': complex_expectation(X_2k, table[scaled]),
        'phi_Xk_a': phi_a,
        'rhs': phi_a ** (4 * k),
        'literal_rhs': abs(table[a]) ** (4 * k),
    }


def _walk_pair(spec: WalkSpec, budget: Optional[int]) -> Tuple[DistFp, DistFp]:
    check_quadratic_p('eq-expansion', spec.p, budget)
    X_k = walk_distribution(spec)
    # X_k is symmetric, so X_k - X_k' has the law of X_k + X_k' = X_{2k}.
    return X_k, convolve(X_k, X_k)


def verify_expansion_inequality(spec: WalkSpec, a: int,
                                budget: Optional[int] = None) -> Report:
    """
    E(phi_{X_k}(a X_k)^2) >= phi_{X_k}(a)^{4k}, with the intermediate
    identity E(phi_{X_k}(a X_k)^2) = E(phi_{X_k}(a X_{2k})) and
    E(phi_S(a X_{2k})) = phi_{X_k}(a)^2.
    """
    p = spec.p
    a %= p
    report = Report('expansion', inputs={
        'p': p, 'subgroup_order': spec.sub.order, 'k': spec.k, 'a': a})
    X_k, X_2k = _walk_pair(spec, budget)
    terms = _expansion_terms(walk_char_fn(spec).values.real,
                             subgroup_char_table(spec.sub), spec.k, X_k, X_2k, a)
    report.quantities.update(terms)
    phi_a = terms['phi_Xk_a']
    report.check_close('eq-expansion.identity', terms['lhs'], terms['middle'], IDENTITY_TOL)
    report.check_close('eq-expansion.fubini',
                       abs(terms['fubini'] - phi_a * phi_a), 0.0, IDENTITY_TOL)
    report.check_ge('eq-expansion', terms['lhs'], terms['rhs'], IDENTITY_TOL)
    return report


def expansion_report(spec: WalkSpec, budget: Optional[int] = None) -> Report:
    """
    The expansion inequality at a = 0 and at every coset representative,
    reduced to the worst case of each check. Both sides are constant on
    H-cosets.
    """
    p = spec.p
    report = Report('expansion', inputs={'p': p, 'subgroup_order': spec.sub.order, 'k': spec.k})
    X_k, X_2k = _walk_pair(spec, budget)
    phi_k = walk_char_fn(spec).values.real
    table = subgroup_char_table(spec.sub)
    identity_gap, fubini_gap, slack = 0.0, 0.0, math.inf
    for a in [0] + cosets(spec.sub):
        terms = _expansion_terms(phi_k, table, spec.k, X_k, X_2k, a)
        phi_a = terms['phi_Xk_a']
        identity_gap = max(identity_gap, abs(terms['lhs'] - terms['middle']))
        fubini_gap = max(fubini_gap, abs(terms['fubini'] - phi_a * phi_a))
        slack = min(slack, terms['lhs'] - terms['rhs'])
    report.quantities['residues_checked'] = 1 + spec.sub.index
    report.check_close('eq-expansion.identity.max-gap', identity_gap, 0.0, IDENTITY_TOL)
    report.check_close('eq-expansion.fubini.max-gap', fubini_gap, 0.0, IDENTITY_TOL)
    report.check_ge('eq-expansion.min-slack', slack, 0.0, IDENTITY_TOL)
    return report


def scan_row(prime_field: PrimeField, n: int) -> Dict[str, Any]:
    """Largest |sum_{x in H} e(ax/p)| over a != 0 for the subgroup of order n."""
    p = prime_field.p
    sub = subgroup_of_order(prime_field, n)
    max_abs = float(np.max(np.abs(_coset_values(sub)))) * n
    return {
        'p': p,
        'subgroup_order': n,
        'max_abs_sum': max_abs,
        'normalized': max_abs / n,
        'sqrt_p_ok': max_abs <= math.sqrt(p) + SQRT_P_TOL,
    }


def scan_prime(p: int, gamma: float) -> List[Dict[str, Any]]:
    field = PrimeField(int(p))
    orders = [n for n in field.subgroup_orders() if n >= float(p) ** gamma]
    return [scan_row(field, n) for n in orders]


def theorem_scan(p_lo: int, p_hi: int, gamma: float, jobs: int = 1,
                 budget: Optional[int] = None) -> List[Dict[str, Any]]:
    """
    One row per prime p in [p_lo, p_hi] and subgroup order n >= p^gamma,
    ordered by p and then n. Rows are independent; with jobs > 1 primes
    are spread over a process pool and collected in order.
    """
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    if p_lo > p_hi:
        raise ValueError(f"empty prime range [{p_lo}, {p_hi}]")
    primes = [int(q) for q in primerange(max(2, p_lo), p_hi + 1)]
    cost = sum(q * len(PrimeField(q).subgroup_orders()) for q in primes)
    check_budget('theorem_scan', cost, budget)

    per_prime = []
    if jobs <= 1:
        for rows in tqdm(map(scan_prime, primes, repeat(gamma)), total=len(primes)):
            per_prime.append(rows)
    else:
        with ProcessPoolExecutor(jobs) as executor:
            for rows in tqdm(executor.map(scan_prime, primes, repeat(gamma)),
                             total=len(primes)):
                per_prime.append(rows)
    rows = [row for rows in per_prime for row in rows]
    bad = [row for row in rows if not row['sqrt_p_ok']]
    if bad:
        logger.warning(f"theorem_scan: {len(bad)} rows exceed sqrt(p)")
    return rows


def scan_report(rows: List[Dict[str, Any]], p_lo: int, p_hi: int, gamma: float) -> Report:
    report = Report('scan', inputs={'p_lo': p_lo, 'p_hi': p_hi, 'gamma': gamma})
    report.quantities['rows'] = len(rows)
    for row in rows:
        report.check_le(f"sqrt-p.p{row['p']}.n{row['subgroup_order']}",
                        row['max_abs_sum'], math.sqrt(row['p']), SQRT_P_TOL)
    return report


def final_chain_report(sub: Subgroup, gamma: float, theta: float, eta: float,
                       budget: Optional[int] = None) -> Report:
    """
    The chain for X = X_k, Y = X_{2k} at the (k, nu) found by the search:

        P(Yhat in Lambda_nu) >= p^-2theta,
        E(phi_X(Yhat)^{4k}) >= p^{-8k^2 nu} P(Yhat in Lambda_nu),
        E(|phi_X(X Yhat)|^2) >= E(phi_X(Yhat)^{4k}) >= p^-10theta,

    next to the terms of the upper bound rho_X(0) + rho_Y(0)^beta +
    p^(-1+eta)/rho_Y(0), which are only recorded.
    """
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    if not 0 < eta < 1:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if not 0 < theta or not 10 * theta < gamma:
        raise ValueError(f"need 0 < 10 theta < gamma, got theta={theta}, gamma={gamma}")
    p, n = sub.p, sub.order
    report = Report('chain', inputs={
        'p': p, 'subgroup_order': n, 'gamma': gamma, 'theta': theta, 'eta': eta})
    if n < float(p) ** gamma:
        report.warn(f"|H| = {n} < p^gamma = {float(p) ** gamma:.6g}")

    search = search_k_nu(sub, theta)
    report.merge(search.report, 'search.')
    k, nu, M = search.k, search.nu, search.M_k
    lam = search.spectrum

    # Yhat has density |phi_S|^{4k} / M_k.
    log_phi_S = log_abs(subgroup_char_table(sub))
    q = power_from_log(log_phi_S, 4 * k) / M
    members = np.array(lam.members, dtype=np.int64)
    P_lambda = math.fsum(q[members])
    moment = math.fsum(q * power_from_log(log_phi_S, 8 * k * k))
    log_p = math.log(p)

    rho_x0 = walk_density_at(WalkSpec(sub, k), 0)
    rho_y0 = walk_density_at(WalkSpec(sub, 2 * k), 0)
    report.quantities.update({
        'k': k, 'nu': nu, 'M_k': M,
        'lambda_size': len(lam), 'lambda_trivial': lam.is_trivial,
        'P_Yhat_in_lambda': P_lambda,
        'E_phi_pow_4k': moment,
        'rho_X0': rho_x0,
        'rho_Y0': rho_y0,
        'p_pow_eta_term': math.exp((-1 + eta) * log_p) / rho_y0,
        'p_pow_minus_gamma': math.exp(-gamma * log_p),
        'lambda_over_p_pow_1_minus_theta': len(lam) / math.exp((1 - theta) * log_p),
        'p_pow_eta_theta_over_lambda': math.exp((eta + theta) * log_p) / len(lam),
        'E_phi_pow_4k_alt_bound': math.exp(-4 * k * k * nu * log_p) * P_lambda,
    })

    report.check_ge('chain.P-lambda', P_lambda, math.exp(-2 * theta * log_p), IDENTITY_TOL)
    report.check_ge('chain.moment', moment,
                    math.exp(-8 * k * k * nu * log_p) * P_lambda, IDENTITY_TOL)
    report.check_le('chain.rho-X0', rho_x0, 1.0 / n, IDENTITY_TOL)
    report.check_close('chain.rho-Y0', rho_y0, M / p, IDENTITY_TOL)
    report.check_le('chain.lambda-upper', len(lam),
                    math.exp((1 + 2 * nu) * log_p) / n, 1e-9 * len(lam))
    if not lam.is_trivial:
        report.check_ge('chain.lambda-lower', len(lam), n)

    if p <= QUADRATIC_P_CAP:
        spec = WalkSpec(sub, k)
        X = walk_distribution(spec)
        T = twisted_fourth_moment(X, phi=walk_char_fn(spec).values, budget=budget)
        report.quantities['twisted_moment'] = T
        report.check_ge('chain.twisted-vs-moment', T, moment, IDENTITY_TOL)
        report.check_ge('eq-last-bound', T, math.exp(-10 * theta * log_p), IDENTITY_TOL)
    else:
        report.skip('eq-last-bound', f"p = {p} above {QUADRATIC_P_CAP}")
    return report


def amplification_report(sub: Subgroup, budget: Optional[int] = None) -> Report:
    """
    X uniform on H. Records, over coset representatives a != 0,

        E(|phi_X(X Yhat)|^2) >= |phi_S(a)|^4 |H|^2 / p,   |phi_S(a)|^4 <= p / |H|^2,

    together with rho_Y(0) = 1/|H|, M_X = p/|H| and the fact that X Yhat
    has the law of Yhat.
    """
    p, n = sub.p, sub.order
    check_quadratic_p('amplification_report', p, budget)
    field_ = sub.field
    report = Report('amplification', inputs={'p': p, 'subgroup_order': n})
    X = uniform_on(field_, sub.elements)
    Y = stepping(X, additive(field_))
    peak = peaking(X)
    T = twisted_fourth_moment(X, budget=budget)

    reps = cosets(sub)
    fourth = np.array([abs(subgroup_char_table(sub)[a]) ** 4 for a in reps])
    top = float(fourth.max()) if len(fourth) else 0.0
    report.quantities.update({
        'twisted_moment': T, 'M_X': peak.mass, 'rho_Y0': Y[0],
        'max_phi_S_fourth': top})
    report.check_ge('amplification.lower-bound', T, top * n * n / p, IDENTITY_TOL)
    report.check_le('amplification.sum-bound', top, p / (n * n), IDENTITY_TOL)
    report.check_close('amplification.rho-Y0', Y[0], 1.0 / n, IDENTITY_TOL)
    report.check_close('amplification.mass', peak.mass, p / n, IDENTITY_TOL * p)

    # P(X Yhat = z) = sum_{x, a : xa = z} rho_X(x) q(a)
    h = sub.as_array()
    residues = np.arange(p, dtype=np.int64)
    law = np.zeros(p)
    rows = max(1, DOUBLE_SUM_CHUNK // p)
    for start in range(0, n, rows):
        xs = h[start:start + rows]
        law += np.bincount((np.multiply.outer(xs, residues) % p).ravel(),
                           weights=np.multiply.outer(X.density[xs], peak.density).ravel(),
                           minlength=p)
    report.check_close('amplification.XYhat-law',
                       float(np.max(np.abs(law - peak.density))), 0.0, IDENTITY_TOL)
    return report
