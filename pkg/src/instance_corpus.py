"""
Seeded instance generation for the verification suite: finite sets in
both group contexts and random densities on F_p. Everything is drawn
from `rng.SplitMix64`, so a seed fixes the corpus.
"""

from typing import List, Sequence
from dataclasses import dataclass
import logging

import numpy as np

from fp_core import PrimeField, GroupCtx, additive, multiplicative, subgroup_of_order, all_subgroups
from setstats import FpSet, make_set
from distributions import DistFp, uniform_on, from_weights
from rng import SplitMix64


logger = logging.getLogger(__name__)


SET_PRIMES = (101, 257, 1009)
DENSITY_PRIMES = (13, 101, 157, 257, 1009, 2003)
SET_KINDS = ('subgroup', 'interval', 'geometric', 'random', 'union')
RANDOM_DENSITY_KINDS = ('weights', 'uniform-set', 'full-weights')
DENSITY_KINDS = RANDOM_DENSITY_KINDS + ('subgroup',)
MAX_SET_SIZE = 512


@dataclass
class CorpusSet:
    label: str
    kind: str
    A: FpSet


@dataclass
class CorpusDensity:
    label: str
    kind: str
    X: DistFp


def _subgroup_set(rng: SplitMix64, ctx: GroupCtx, max_size: int) -> List[int]:
    orders = [n for n in ctx.field.subgroup_orders() if 2 <= n <= max_size]
    n = orders[rng.randrange(len(orders))]
    return list(subgroup_of_order(ctx.field, n).elements)


def _interval(rng: SplitMix64, ctx: GroupCtx, max_size: int) -> List[int]:
    p = ctx.p
    m = 2 + rng.randrange(min(max_size, p - 1) - 1)
    if ctx.is_additive:
        start = rng.randrange(p)
        return [(start + i) % p for i in range(m)]
    start = 1 + rng.randrange(p - m)
    return list(range(start, start + m))


def _geometric(rng: SplitMix64, ctx: GroupCtx, max_size: int) -> List[int]:
    field = ctx.field
    p = field.p
    base = 1 + rng.randrange(p - 1)
    ratio = 2 + rng.randrange(p - 2)
    top = min(max_size, field.multiplicative_order(ratio))
    m = 2 + rng.randrange(top - 1) if top > 2 else top
    return [(base * pow(ratio, i, p)) % p for i in range(m)]


def _random_set(rng: SplitMix64, ctx: GroupCtx, max_size: int) -> List[int]:
    carrier = list(ctx.carrier())
    m = 2 + rng.randrange(min(max_size, len(carrier)) - 1)
    return rng.sample(carrier, m)


def _union(rng: SplitMix64, ctx: GroupCtx, max_size: int) -> List[int]:
    """H1 union c.H2 for two subgroups of order at most max_size / 2."""
    p = ctx.p
    first = _subgroup_set(rng, ctx, max(2, max_size // 2))
    second = _subgroup_set(rng, ctx, max(2, max_size // 2))
    c = 1 + rng.randrange(p - 1)
    return first + [(c * x) % p for x in second]


_SET_MAKERS = {
    'subgroup': _subgroup_set,
    'interval': _interval,
    'geometric': _geometric,
    'random': _random_set,
    'union': _union,
}


def set_corpus(seed: int = 0,
               primes: Sequence[int] = SET_PRIMES,
               per_kind: int = 8,
               max_size: int = 128) -> List[CorpusSet]:
    """
    per_kind sets of every kind, for every prime and both group contexts:
    3 primes x 2 contexts x 5 kinds x 8 = 240 sets by default.
    """
    if not 2 <= max_size <= MAX_SET_SIZE:
        raise ValueError(f"max_size must lie in [2, {MAX_SET_SIZE}], got {max_size}")
    rng = SplitMix64(seed)
    corpus = []
    for p in primes:
        field = PrimeField(p)
        for ctx in (additive(field), multiplicative(field)):
            for kind in SET_KINDS:
                for i in range(per_kind):
                    values = _SET_MAKERS[kind](rng, ctx, max_size)
                    A = make_set(ctx, values)
                    label = f"p{p}-{ctx.mode.value}-{kind}-{i}"
                    corpus.append(CorpusSet(label, kind, A))
    logger.info(f"set corpus: {len(corpus)} sets, seed {seed}")
    return corpus


def _random_density(rng: SplitMix64, field: PrimeField, kind: str) -> DistFp:
    p = field.p
    if kind == 'weights':
        m = 1 + rng.randrange(min(p, 64))
        support = rng.sample(range(p), m)
        weights = np.zeros(p)
        weights[support] = [0.05 + rng.random() for _ in support]
        return from_weights(field, weights)
    if kind == 'uniform-set':
        m = 1 + rng.randrange(min(p, 64))
        return uniform_on(field, rng.sample(range(p), m))
    if kind == 'full-weights':
        return from_weights(field, np.array([rng.random() for _ in range(p)]))
    raise ValueError(f"unknown density kind {kind!r}")


def density_corpus(seed: int = 0,
                   primes: Sequence[int] = DENSITY_PRIMES,
                   count: int = 120) -> List[CorpusDensity]:
    """
    count random densities, cycling through the primes and the random
    kinds, followed by the uniform density on every subgroup of F_p^x
    for each prime.
    """
    rng = SplitMix64(seed ^ 0x5EED)
    fields = [PrimeField(p) for p in primes]
    corpus = []
    for i in range(count):
        field = fields[i % len(fields)]
        kind = RANDOM_DENSITY_KINDS[(i // len(fields)) % len(RANDOM_DENSITY_KINDS)]
        X = _random_density(rng, field, kind)
        corpus.append(CorpusDensity(f"p{field.p}-{kind}-{i}", kind, X))
    for field in fields:
        for sub in all_subgroups(field):
            X = uniform_on(field, sub.elements)
            corpus.append(CorpusDensity(f"p{field.p}-subgroup-n{sub.order}", 'subgroup', X))
    logger.info(f"density corpus: {len(corpus)} densities, seed {seed}")
    return corpus
