"""
The verification suite behind `harness_cli verify`.

The suite is a list of independent tasks (one density, one set, one
subgroup, one prime). Each task returns a Report; reports are merged in
task order under `<section>.<label>.`, so the merged report does not
depend on how many processes ran the tasks.
"""

from typing import Any, Callable, Dict, List, Optional, Tuple
from dataclasses import dataclass
from concurrent.futures import ProcessPoolExecutor
import math
import logging

import numpy as np
from sympy import primerange
from tqdm import tqdm

from fp_core import PrimeField, Subgroup, all_subgroups
from fourier_utils import char_sums_direct
from distributions import (
    DistFp, IDENTITY_TOL, uniform_on, stepping, verify_fourier_duality,
    check_tail_bound, check_tail_bound_alpha)
from setstats import FpSet
from bsg_extract import bsg
from structured_extract import verify_link2, check_lemma_energy, check_lemma_stepping, alt1_report
from subgroup_walk import (
    WalkSpec, subgroup_char_table, walk_char_fn, walk_distribution, spectrum,
    check_spectrum, expansion_report, gauss_sum, scan_prime, search_k_nu,
    final_chain_report, amplification_report, SQRT_P_TOL)
from instance_corpus import set_corpus, density_corpus
from budgets import BudgetExceededError, ConsistencyError
from reports import Report


logger = logging.getLogger(__name__)


WALK_PRIMES = (13, 101, 157, 257, 1009, 2003)
WALK_CHAR_KS = (1, 2, 5)
EXPANSION_KS = (1, 2, 3)
SPECTRUM_NUS = (0.05, 0.1, 0.3, 0.5, 1.0)
GAUSS_MAX_P = 509
SCAN_MAX_P = 1009
EXTRACT_PRIMES = (157, 1009, 2003)
EXTRACT_KS = (1, 2)
EXTRACT_ETA = 0.1
SEARCH_PRIMES = (157, 1009)
SEARCH_THETAS = (0.3, 0.5)
CHAIN_GAMMA = 0.5
CHAIN_THETA = 0.045
CHAIN_ETA = 0.1
# Level parameter for the stepping lemma on corpus sets.
LEVEL_ALPHA = 2.0
TAIL_DELTAS = (0.05, 0.1, 0.25, 0.5)
TAIL_GAMMAS = (0.1, 0.3, 0.5, 0.9)


@dataclass
class Task:
    section: str
    label: str
    fn: Callable[..., Report]
    args: Tuple[Any, ...]


def run_task(task: Task) -> Report:
    return task.fn(*task.args)


def density_task(X: DistFp) -> Report:
    report = Report('density', inputs={'p': X.p, 'support_size': len(X.support)})
    report.merge(verify_fourier_duality(X))
    report.merge(verify_link2(X))
    Z = X.char_fn.abs_squared()
    mean = X.expectation(Z)
    if mean > 0:
        top = float(Z[X.support].max())
        report.merge(check_tail_bound_alpha(Z, X, max(1.0, top / mean)))
    else:
        report.skip('tail-bound.alpha', "E(|phi_X(X)|^2) = 0")

    # Grid points whose hypothesis E(Z) >= (1 - delta) M fails are counted, not merged.
    checked, vacuous = 0, 0
    for name, values in (('phi2', Z), ('rho', X.density)):
        for delta in TAIL_DELTAS:
            for gamma in TAIL_GAMMAS:
                tail = check_tail_bound(values, X, delta, gamma)
                if tail.assertions:
                    report.merge(tail, f"tail.{name}.d{delta}.g{gamma}.")
                    checked += 1
                else:
                    vacuous += 1
    report.quantities['tail.checked'] = checked
    report.quantities['tail.vacuous'] = vacuous
    return report


def walk_task(sub: Subgroup) -> Report:
    p, n = sub.p, sub.order
    report = Report('walk_facts', inputs={'p': p, 'subgroup_order': n})
    table = subgroup_char_table(sub)

    direct = char_sums_direct(p, sub.as_array(), np.full(n, 1.0 / n))
    report.check_close('phi-S.table-vs-direct',
                       float(np.max(np.abs(direct - table))), 0.0, IDENTITY_TOL)
    shift_gap = 0.0
    for h in sub.elements:
        shifted = direct[(np.arange(p) * h) % p]
        shift_gap = max(shift_gap, float(np.max(np.abs(shifted - direct))))
    report.check_close('phi-S.coset-invariance', shift_gap, 0.0, IDENTITY_TOL)
    parseval = math.fsum(np.abs(direct) ** 2)
    report.check_close('walk.parseval', parseval, p / n, IDENTITY_TOL * p)

    for k in WALK_CHAR_KS:
        spec = WalkSpec(sub, k)
        gap = np.max(np.abs(walk_distribution(spec).char_fn.values - walk_char_fn(spec).values))
        report.check_close(f"walk-char-fn.k{k}", float(gap), 0.0, IDENTITY_TOL)
    for k in EXPANSION_KS:
        report.merge(expansion_report(WalkSpec(sub, k)), f"k{k}.")

    previous = None
    for nu in SPECTRUM_NUS:
        lam = spectrum(sub, nu)
        report.merge(check_spectrum(lam), f"nu{nu}.")
        if previous is not None:
            report.check_true(f"lambda.monotone.nu{nu}",
                              set(previous.members) <= set(lam.members))
        previous = lam
    report.merge(amplification_report(sub), 'amplification.')
    return report


def gauss_task(p: int) -> Report:
    field = PrimeField(p)
    report = Report('gauss', inputs={'p': p})
    identity_ok = True
    modulus_gap = 0.0
    for d in field.subgroup_orders():
        for a in range(1, p):
            try:
                G = gauss_sum(field, d, a)
            except ConsistencyError as e:
                logger.warning(str(e))
                identity_ok = False
                continue
            if d == 2:
                modulus_gap = max(modulus_gap, abs(abs(G) - math.sqrt(p)))
    report.check_true('gauss.subgroup-form', identity_ok)
    if p > 2:
        report.check_close('gauss.quadratic-modulus', modulus_gap, 0.0, SQRT_P_TOL)
    return report


def scan_task(p: int) -> Report:
    report = Report('scan', inputs={'p': p})
    for row in scan_prime(p, 0.0):
        report.check_le(f"sqrt-p.n{row['subgroup_order']}",
                        row['max_abs_sum'], math.sqrt(p), SQRT_P_TOL)
    return report


def bsg_task(A: FpSet) -> Report:
    report = Report('bsg', inputs={'p': A.p, 'ctx': A.ctx.mode.value, 'A_size': len(A)})
    report.merge(bsg(A).report())

    X = uniform_on(A.ctx.field, A.elements)
    report.merge(check_lemma_energy(X, A, A.ctx), 'lemma-energy.')
    Y = stepping(X, A.ctx)
    rho_y_id = Y[A.ctx.identity]
    level = np.flatnonzero(Y.density >= rho_y_id / LEVEL_ALPHA)
    B = FpSet(A.ctx, tuple(int(v) for v in level))
    if len(B):
        beta = 1.0 / (len(B) * rho_y_id)
        report.merge(check_lemma_stepping(X, B, LEVEL_ALPHA, max(beta, 1.0), A.ctx),
                     'lemma-stepping.')
    return report


def extract_task(sub: Subgroup, k: int) -> Report:
    return alt1_report(walk_distribution(WalkSpec(sub, k)), EXTRACT_ETA)


def search_task(sub: Subgroup) -> Report:
    report = Report('search', inputs={'p': sub.p, 'subgroup_order': sub.order})
    for theta in SEARCH_THETAS:
        report.merge(search_k_nu(sub, theta).report, f"theta{theta}.")
    report.merge(final_chain_report(sub, CHAIN_GAMMA, CHAIN_THETA, CHAIN_ETA), 'chain.')
    return report


def build_tasks(seed: int = 0) -> List[Task]:
    tasks = []
    for item in density_corpus(seed):
        tasks.append(Task('density', item.label, density_task, (item.X,)))
    for p in WALK_PRIMES:
        for sub in all_subgroups(PrimeField(p)):
            tasks.append(Task('walk', f"p{p}-n{sub.order}", walk_task, (sub,)))
    for p in primerange(3, GAUSS_MAX_P + 1):
        tasks.append(Task('gauss', f"p{p}", gauss_task, (int(p),)))
    for p in primerange(2, SCAN_MAX_P + 1):
        tasks.append(Task('scan', f"p{p}", scan_task, (int(p),)))
    for item in set_corpus(seed):
        tasks.append(Task('bsg', item.label, bsg_task, (item.A,)))
    for p in EXTRACT_PRIMES:
        for sub in all_subgroups(PrimeField(p)):
            for k in EXTRACT_KS:
                tasks.append(Task('extract', f"p{p}-n{sub.order}-k{k}",
                                  extract_task, (sub, k)))
    for p in SEARCH_PRIMES:
        for sub in all_subgroups(PrimeField(p)):
            if sub.order >= math.sqrt(p):
                tasks.append(Task('search', f"p{p}-n{sub.order}", search_task, (sub,)))
    return tasks


def run_suite(seed: int = 0, jobs: int = 1,
              sections: Optional[List[str]] = None) -> Tuple[Report, Optional[BudgetExceededError]]:
    """
    Runs the suite and merges the task reports in order.

    Arguments:
    ----------
    seed: int
        Seed of the instance corpora.
    jobs: int
        Number of worker processes; 1 runs in the calling process.
    sections: Optional[List[str]]
        Restricts the run to these sections.

    Returns:
    --------
    (report, error): error is the BudgetExceededError that stopped the
    run, in which case the report holds every task finished before it.
    """
    tasks = build_tasks(seed)
    if sections is not None:
        unknown = set(sections) - {t.section for t in tasks}
        if unknown:
            raise ValueError(f"unknown verify sections: {sorted(unknown)}")
        tasks = [t for t in tasks if t.section in sections]
    report = Report('verify', inputs={'seed': seed, 'sections': sections or 'all'})
    counts: Dict[str, int] = {}
    logger.info(f"verify: {len(tasks)} tasks, seed {seed}, {jobs} job(s)")

    def collect(results):
        for task, task_report in zip(tasks, results):
            report.merge(task_report, f"{task.section}.{task.label}.")
            counts[task.section] = counts.get(task.section, 0) + 1

    error = None
    try:
        if jobs <= 1:
            collect(tqdm(map(run_task, tasks), total=len(tasks)))
        else:
            executor = ProcessPoolExecutor(jobs)
            try:
                collect(tqdm(executor.map(run_task, tasks), total=len(tasks)))
            finally:
                executor.shutdown(wait=True, cancel_futures=True)
    except BudgetExceededError as e:
        logger.warning(f"verify stopped: {e}")
        report.warn(f"stopped by budget: {e}")
        error = e
    for section, n in sorted(counts.items()):
        report.quantities[f"tasks.{section}"] = n
    report.quantities['tasks.total'] = sum(counts.values())
    return report, error
