"""
Numerical kernels for additive characters of F_p.

Direct sums read e(ax/p) from a table of the p-th roots of unity, with the
argument a*x reduced mod p in exact integer arithmetic first, so angles
never grow with a*x.

Two ways of evaluating phi(a) = sum_x w(x) e(ax/p) for all a:
* `char_sums_direct`: O(|supp| * p), chunked, compensated across chunks;
* `fft_char_sums`: O(p log p) through numpy's FFT.
"""

from typing import Optional
from functools import lru_cache
import math

import numpy as np


DIRECT_SUM_LIMIT = 10**8
# Entries of a chunk matrix (a-values x support) built at once.
CHUNK_ENTRIES = 2**22
# exp(-700) is the smallest magnitude kept in log-domain powers.
LOG_UNDERFLOW = -700.0


@lru_cache(maxsize=8)
def roots_of_unity(p: int) -> np.ndarray:
    """table[k] = exp(2 pi i k / p)."""
    k = np.arange(p, dtype=np.float64)
    table = np.exp(2j * np.pi * k / p)
    table.setflags(write=False)
    return table


def kahan_accumulate(chunks) -> np.ndarray:
    """
    Compensated elementwise sum of an iterable of equally shaped arrays.
    """
    total = None
    comp = None
    for chunk in chunks:
        if total is None:
            total = np.array(chunk, dtype=np.complex128, copy=True)
            comp = np.zeros_like(total)
            continue
        y = chunk - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def char_sums_direct(p: int,
                     support: np.ndarray,
                     weights: np.ndarray,
                     freqs: Optional[np.ndarray] = None) -> np.ndarray:
    """
    phi(a) = sum_{x in support} weights[x] * e(a x / p) for a in freqs
    (all of F_p when freqs is None).
    """
    roots = roots_of_unity(p)
    support = np.asarray(support, dtype=np.int64)
    weights = np.asarray(weights)
    if freqs is None:
        freqs = np.arange(p, dtype=np.int64)
    freqs = np.asarray(freqs, dtype=np.int64)
    if len(support) == 0:
        return np.zeros(len(freqs), dtype=np.complex128)

    # Chunk over the support so each partial sum is a full-length vector
    # and the chunks are combined with compensation.
    cols = max(1, CHUNK_ENTRIES // max(1, len(freqs)))

    def partial_sums():
        for start in range(0, len(support), cols):
            xs = support[start:start + cols]
            ws = weights[start:start + cols]
            idx = np.multiply.outer(freqs, xs) % p
            yield roots[idx] @ ws

    return kahan_accumulate(partial_sums())


def fft_char_sums(values: np.ndarray, sign: int = 1) -> np.ndarray:
    """
    out[a] = sum_x values[x] * exp(sign * 2 pi i a x / p), p = len(values),
    through numpy's FFT (prime lengths are handled by its chirp-z path).
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be 1 or -1, got {sign}")
    values = np.asarray(values, dtype=np.complex128)
    if sign == 1:
        return np.fft.ifft(values, norm='forward')
    return np.fft.fft(values)


def log_abs(values: np.ndarray) -> np.ndarray:
    """log|v| with exact zeros mapped to -inf and no warnings."""
    mags = np.abs(values)
    out = np.full(mags.shape, -np.inf)
    nz = mags > 0
    out[nz] = np.log(mags[nz])
    return out


def power_from_log(log_values: np.ndarray, exponent: float) -> np.ndarray:
    """
    exp(exponent * log_values) with results below exp(-700) set to 0.
    """
    scaled = exponent * np.asarray(log_values, dtype=np.float64)
    out = np.zeros(scaled.shape)
    keep = scaled > LOG_UNDERFLOW
    out[keep] = np.exp(scaled[keep])
    return out


def log_sum_exp(log_terms: np.ndarray) -> float:
    """log(sum exp(log_terms)), dropping -inf terms."""
    log_terms = np.asarray(log_terms, dtype=np.float64)
    finite = log_terms[np.isfinite(log_terms)]
    if len(finite) == 0:
        return -math.inf
    return float(np.logaddexp.reduce(finite))


def fsum_complex(values: np.ndarray) -> complex:
    values = np.asarray(values)
    return complex(math.fsum(values.real), math.fsum(values.imag))
