"""
SplitMix64: a 64-bit counter-based generator with a fixed published
algorithm, so generated instances are the same on every platform and in
every language that implements it.

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)            (all mod 2^64)
"""

from typing import List, Sequence, TypeVar


MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar('T')


class SplitMix64:
    def __init__(self, seed: int = 0) -> None:
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = seed

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection so there is no modulo bias."""
        if n <= 0:
            raise ValueError(f"randrange needs n > 0, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def sample(self, population: Sequence[T], m: int) -> List[T]:
        """m distinct items, by a partial Fisher-Yates shuffle of a copy."""
        items = list(population)
        if not 0 <= m <= len(items):
            raise ValueError(f"cannot sample {m} items from {len(items)}")
        for i in range(m):
            j = i + self.randrange(len(items) - i)
            items[i], items[j] = items[j], items[i]
        return items[:m]
