"""
Command-line front end.

    python src/harness_cli.py scan --p-lo 2 --p-hi 101 --gamma 0.5 --out scan.csv
    python src/harness_cli.py verify --seed 0 --jobs 8 --out verify.json
    python src/harness_cli.py bsg --p 101 --interval 1..10
    python src/harness_cli.py extract --p 13 --dirac 0
    python src/harness_cli.py walk --p 157 --subgroup-order 156 --theta 0.5
    python src/harness_cli.py chain --p 1009 --subgroup-order 1008 --gamma 0.9 --theta 0.05 --eta 0.1
    python src/harness_cli.py sumprod --p 101 --random 20 --seed 3

Every subcommand also takes --config (a JSON object or `key = value`
lines; flags win over the file), --out, --log-file and one flag per
budget kind: --budget (terms), --pair-budget and --search-k-budget.

Exit codes: 0 success, 1 failed assertion, 2 usage or config error,
3 budget exceeded.
"""

from typing import Any, Dict, List, Optional
import argparse
import json
import os
import sys
import logging

import jsonschema

from fp_core import PrimeField, GroupCtx, additive, multiplicative, subgroup_of_order, parse_residues
from setstats import FpSet, make_set, energy, normalized_energy, expansion_stats
from distributions import DistFp, uniform_on, dirac
from bsg_extract import bsg
from structured_extract import alt1_report
from subgroup_walk import (
    WalkSpec, SCAN_COLUMNS, walk_distribution, search_k_nu, expansion_report,
    final_chain_report, amplification_report, theorem_scan, scan_report)
from verify_suite import run_suite
from budgets import (
    PAIRS, SEARCH_K, TERMS, BUDGET_ENV_VARS, BudgetExceededError, ConsistencyError)
from reports import Report, write_json, table_to_csv, validate_report
from rng import SplitMix64


logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3

# Each flag sets its own budget kind.
BUDGET_FLAGS = {'budget': TERMS, 'pair-budget': PAIRS, 'search-k-budget': SEARCH_K}

MAX_BSG_SET = 512


class ConfigError(ValueError):
    pass


def setup_logging(log_file: Optional[str] = None, verbose: bool = False) -> None:
    if log_file is not None:
        if os.path.dirname(log_file):
            os.makedirs(os.path.dirname(log_file), exist_ok=True)
        handlers = [logging.StreamHandler(), logging.FileHandler(log_file, mode='w')]
    else:
        handlers = None
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format='%(funcName)-20s   : %(message)s', handlers=handlers)


def load_config(config_path: str) -> Dict[str, Any]:
    """
    A JSON object for *.json files, otherwise `key = value` lines with
    `#` comments. Keys may use `-` or `_`.
    """
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {config_path}: {e}")

    if config_path.endswith('.json'):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{config_path} is not valid JSON: {e}")
        if not isinstance(raw, dict):
            raise ConfigError(f"{config_path} must hold a JSON object")
    else:
        raw = {}
        for n, line in enumerate(text.splitlines(), start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(f"{config_path}:{n}: expected `key = value`, got {line!r}")
            key, value = (s.strip() for s in line.split('=', 1))
            if value.lower() in ('true', 'false'):
                value = value.lower() == 'true'
            raw[key] = value
    return {key.replace('-', '_'): value for key, value in raw.items()}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument('--config', type=str, help="JSON or `key = value` config file")
    p.add_argument('--budget', type=int, help=f"term budget, exported as {BUDGET_ENV_VARS[TERMS]}")
    p.add_argument('--pair-budget', type=int,
                   help=f"BSG pivot pair budget, exported as {BUDGET_ENV_VARS[PAIRS]}")
    p.add_argument('--search-k-budget', type=int,
                   help=f"largest k of the (k, nu) search, exported as {BUDGET_ENV_VARS[SEARCH_K]}")
    p.add_argument('--out', type=str, help="output file (stdout when omitted)")
    p.add_argument('--log-file', type=str)
    p.add_argument('--verbose', action='store_true')


def _add_set_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument('--p', type=int, required=False)
    p.add_argument('--ctx', type=str, choices=['additive', 'multiplicative'], default='additive')
    p.add_argument('--set', type=str, help="comma separated residues, e.g. 1,3,9")
    p.add_argument('--set-file', type=str, help="one residue per line")
    p.add_argument('--subgroup-order', type=int)
    p.add_argument('--interval', type=str, help="a..b, both ends included")
    p.add_argument('--random', type=int, help="size of a random set")
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--dirac', type=int, help="a single residue")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog='harness_cli')
    sub = p.add_subparsers(dest='command', required=True)

    scan = sub.add_parser('scan')
    scan.add_argument('--p-lo', type=int, default=2)
    scan.add_argument('--p-hi', type=int)
    scan.add_argument('--gamma', type=float, default=0.5)
    scan.add_argument('--jobs', type=int, default=1)

    verify = sub.add_parser('verify')
    verify.add_argument('--seed', type=int, default=0)
    verify.add_argument('--jobs', type=int, default=1)
    verify.add_argument('--sections', type=str, help="comma separated subset of the suite")
    verify.add_argument('--validate-schema', action='store_true')

    bsg_p = sub.add_parser('bsg')
    _add_set_inputs(bsg_p)
    bsg_p.add_argument('--alpha', type=float)

    extract = sub.add_parser('extract')
    _add_set_inputs(extract)
    extract.add_argument('--walk-k', type=int, help="use the walk X_k on the subgroup instead of its uniform density")
    extract.add_argument('--eta', type=float, default=0.1)

    walk = sub.add_parser('walk')
    _add_set_inputs(walk)
    walk.add_argument('--theta', type=float, default=0.5)
    walk.add_argument('--k', type=int, help="also check the expansion inequality for X_k")

    chain = sub.add_parser('chain')
    _add_set_inputs(chain)
    chain.add_argument('--gamma', type=float, default=0.9)
    chain.add_argument('--theta', type=float, default=0.05)
    chain.add_argument('--eta', type=float, default=0.1)
    chain.add_argument('--amplification', action='store_true')

    sumprod = sub.add_parser('sumprod')
    _add_set_inputs(sumprod)

    for sp in sub.choices.values():
        _add_common(sp)
    p.set_defaults(_commands=sub.choices)
    return p


def _dests(p: argparse.ArgumentParser) -> List[str]:
    return list(vars(p.parse_args([])))


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Flags over config file over defaults."""
    p = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config', type=str)
    known, _ = pre.parse_known_args(argv)
    config = load_config(known.config) if known.config else {}

    subparsers = p.get_default('_commands')
    for sp in subparsers.values():
        dests = _dests(sp)
        sp.set_defaults(**{k: v for k, v in config.items() if k in dests})
    args = p.parse_args(argv)
    unknown = sorted(set(config) - set(_dests(subparsers[args.command])))
    if unknown:
        raise ConfigError(f"config keys not used by `{args.command}`: {unknown}")
    return args


def _field(args: argparse.Namespace) -> PrimeField:
    if args.p is None:
        raise ConfigError("--p is required")
    return PrimeField(args.p)


def _ctx(args: argparse.Namespace, field: PrimeField) -> GroupCtx:
    return additive(field) if args.ctx == 'additive' else multiplicative(field)


def parse_interval(text: str) -> List[int]:
    parts = text.split('..')
    if len(parts) != 2:
        raise ConfigError(f"interval must look like a..b, got {text!r}")
    lo, hi = int(parts[0]), int(parts[1])
    if lo > hi:
        raise ConfigError(f"empty interval {text!r}")
    return list(range(lo, hi + 1))


def read_set_file(path: str) -> List[int]:
    values = []
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            line = line.split('#', 1)[0].strip()
            if line:
                values.append(int(line))
    return values


def residues_from_args(args: argparse.Namespace, field: PrimeField,
                       ctx: GroupCtx) -> List[int]:
    """Residues of exactly one of the set sources."""
    sources = {
        'set': args.set, 'set_file': args.set_file, 'subgroup_order': args.subgroup_order,
        'interval': args.interval, 'random': args.random, 'dirac': args.dirac}
    given = [k for k, v in sources.items() if v is not None]
    if len(given) != 1:
        raise ConfigError(f"give exactly one set source, got {given or 'none'}")
    source = given[0]
    if source == 'set':
        return [int(v) for v in str(args.set).split(',') if v.strip()]
    if source == 'set_file':
        return read_set_file(args.set_file)
    if source == 'subgroup_order':
        return list(subgroup_of_order(field, args.subgroup_order).elements)
    if source == 'interval':
        return parse_interval(args.interval)
    if source == 'random':
        carrier = list(ctx.carrier())
        return SplitMix64(args.seed).sample(carrier, args.random)
    return [args.dirac]


def set_from_args(args: argparse.Namespace) -> FpSet:
    field = _field(args)
    ctx = _ctx(args, field)
    A = make_set(ctx, parse_residues(field, residues_from_args(args, field, ctx)))
    if len(A) == 0:
        raise ConfigError("the input set is empty")
    return A


def emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)


def run_scan(args: argparse.Namespace) -> int:
    if args.p_hi is None:
        raise ConfigError("--p-hi is required")
    rows = theorem_scan(args.p_lo, args.p_hi, args.gamma, jobs=args.jobs)
    emit(table_to_csv(rows, SCAN_COLUMNS, args.out), args.out)
    report = scan_report(rows, args.p_lo, args.p_hi, args.gamma)
    logger.info(f"scan: {len(rows)} rows, pass={report.passed}")
    return EXIT_OK if report.passed else EXIT_ASSERTION


def run_verify(args: argparse.Namespace) -> int:
    sections = args.sections.split(',') if args.sections else None
    report, error = run_suite(args.seed, args.jobs, sections)
    report_dict = report.to_dict()
    emit(write_json(report, args.out), args.out)
    if args.validate_schema:
        validate_report(report_dict)
    if error is not None:
        return EXIT_BUDGET
    failed = report.failed_assertions()
    logger.info(f"verify: {len(report.assertions)} assertions, {len(failed)} failed")
    return EXIT_OK if not failed else EXIT_ASSERTION


def run_bsg(args: argparse.Namespace) -> Report:
    A = set_from_args(args)
    if len(A) > MAX_BSG_SET:
        raise ConfigError(f"bsg takes |A| <= {MAX_BSG_SET}, got {len(A)}")
    return bsg(A, args.alpha).report()


def density_from_args(args: argparse.Namespace) -> DistFp:
    field = _field(args)
    if args.walk_k is not None:
        if args.subgroup_order is None:
            raise ConfigError("--walk-k needs --subgroup-order")
        return walk_distribution(WalkSpec(subgroup_of_order(field, args.subgroup_order), args.walk_k))
    if args.dirac is not None:
        return dirac(field, args.dirac)
    return uniform_on(field, residues_from_args(args, field, additive(field)))


def run_extract(args: argparse.Namespace) -> Report:
    return alt1_report(density_from_args(args), args.eta)


def _subgroup(args: argparse.Namespace):
    field = _field(args)
    if args.subgroup_order is None:
        raise ConfigError("--subgroup-order is required")
    return subgroup_of_order(field, args.subgroup_order)


def run_walk(args: argparse.Namespace) -> Report:
    sub = _subgroup(args)
    report = search_k_nu(sub, args.theta).report
    if args.k is not None:
        report.merge(expansion_report(WalkSpec(sub, args.k)), f"expansion.k{args.k}.")
    return report


def run_chain(args: argparse.Namespace) -> Report:
    sub = _subgroup(args)
    report = final_chain_report(sub, args.gamma, args.theta, args.eta)
    if args.amplification:
        report.merge(amplification_report(sub), 'amplification.')
    return report


def run_sumprod(args: argparse.Namespace) -> Report:
    A = set_from_args(args)
    field = A.ctx.field
    report = Report('sumprod', inputs={'p': field.p, 'A_size': len(A)})
    report.quantities['A'] = list(A.elements)
    for ctx in (additive(field), multiplicative(field)):
        if not all(ctx.contains(x) for x in A):
            report.warn(f"A is not inside the {ctx.mode.value} carrier")
            continue
        B = A.with_ctx(ctx)
        name = ctx.mode.value
        e = normalized_energy(B)
        report.quantities[f"{name}.energy"] = energy(B, B)
        report.quantities[f"{name}.normalized_energy"] = e
        report.check_le(f"{name}.normalized-energy.upper", e, 1.0, 1e-12)
        report.check_ge(f"{name}.normalized-energy.lower", e, 1.0 / len(B), 1e-12)
    if len(A) >= 2 and 0 not in A:
        stats = expansion_stats(A)
        report.quantities.update({
            'sum_size': stats.sum_size, 'prod_size': stats.prod_size,
            'expansion_exponent': stats.exponent})
    else:
        report.warn("expansion needs |A| >= 2 and 0 not in A")
    return report


REPORT_COMMANDS = {
    'bsg': run_bsg,
    'extract': run_extract,
    'walk': run_walk,
    'chain': run_chain,
    'sumprod': run_sumprod,
}


def run(args: argparse.Namespace) -> int:
    if args.command == 'scan':
        return run_scan(args)
    if args.command == 'verify':
        return run_verify(args)
    report = REPORT_COMMANDS[args.command](args)
    report.inputs.setdefault('command_args', {
        k: v for k, v in sorted(vars(args).items())
        if k not in ('config', 'out', 'log_file', 'verbose', 'command', '_commands') and v is not None})
    emit(write_json(report, args.out), args.out)
    return EXIT_OK if report.passed else EXIT_ASSERTION


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except ConfigError as e:
        logging.getLogger(__name__).error(str(e))
        return EXIT_CONFIG
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK

    setup_logging(args.log_file, args.verbose)
    for flag, kind in BUDGET_FLAGS.items():
        value = getattr(args, flag.replace('-', '_'))
        if value is None:
            continue
        if value <= 0:
            logger.error(f"--{flag} must be positive, got {value}")
            return EXIT_CONFIG
        os.environ[BUDGET_ENV_VARS[kind]] = str(value)

    try:
        return run(args)
    except BudgetExceededError as e:
        logger.error(str(e))
        return EXIT_BUDGET
    except (ValueError, OSError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except (ConsistencyError, jsonschema.ValidationError) as e:
        logger.error(str(e))
        return EXIT_ASSERTION


if __name__ == '__main__':
    sys.exit(main())
