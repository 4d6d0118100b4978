"""
Probability densities on F_p, their characteristic functions
phi(a) = sum_x rho(x) e(ax/p), and the two constructions built on them:

* stepping: Y = X1 - X2 (or X1 * X2^-1) for independent copies of X;
* peaking: the density on frequencies proportional to |phi_X|^2.

All expectations are exact finite sums over the density.
"""

from typing import Iterable, Optional
from dataclasses import dataclass
from functools import cached_property
import math
import logging

import numpy as np

from fp_core import PrimeField, GroupCtx, power_table, discrete_log_table, additive
from fourier_utils import (
    DIRECT_SUM_LIMIT, char_sums_direct, fft_char_sums, fsum_complex)
from reports import Report


logger = logging.getLogger(__name__)


DENSITY_SUM_TOL = 1e-12
IDENTITY_TOL = 1e-9
# Characteristic functions are tabulated at construction up to this p.
EAGER_CHAR_FN_P = 10**5
# Stepping by explicit pair enumeration while |supp|^2 stays below this.
PAIR_DIRECT_LIMIT = 4_000_000
# Negative entries this small are rounding noise from transforms.
NEGATIVE_NOISE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DistFp:
    field: PrimeField
    density: np.ndarray

    def __post_init__(self):
        density = np.array(self.density, dtype=np.float64, copy=True)
        p = self.field.p
        if density.shape != (p,):
            raise ValueError(f"density must have shape ({p},), got {density.shape}")
        if not np.all(np.isfinite(density)):
            raise ValueError("density has non-finite entries")
        if np.any(density < 0):
            raise ValueError(f"density has negative entries (min {density.min()!r})")
        total = math.fsum(density)
        if abs(total - 1.0) > DENSITY_SUM_TOL:
            raise ValueError(f"density sums to {total!r}, not 1")
        density.setflags(write=False)
        object.__setattr__(self, 'density', density)

    @property
    def p(self) -> int:
        return self.field.p

    def __getitem__(self, x: int) -> float:
        return float(self.density[x % self.p])

    @cached_property
    def support(self) -> np.ndarray:
        supp = np.flatnonzero(self.density > 0).astype(np.int64)
        supp.setflags(write=False)
        return supp

    @cached_property
    def char_fn(self) -> 'CharFn':
        return CharFn(self.field, dist=self)

    def expectation(self, values: np.ndarray) -> float:
        """E(f(X)) for f given as an array indexed by residue."""
        values = np.asarray(values, dtype=np.float64)
        supp = self.support
        return math.fsum(self.density[supp] * values[supp])

    def collision_probability(self) -> float:
        """sum_x P(X = x)^2."""
        return math.fsum(self.density[self.support] ** 2)


def _char_transform(dist: DistFp) -> np.ndarray:
    p = dist.p
    supp = dist.support
    if len(supp) * p <= DIRECT_SUM_LIMIT:
        values = char_sums_direct(p, supp, dist.density[supp])
    else:
        logger.debug(f"FFT transform for p = {p}, |supp| = {len(supp)}")
        values = fft_char_sums(dist.density, sign=1)
    values.setflags(write=False)
    return values


class CharFn:
    """
    phi(a) for a in F_p. Either given explicitly or derived from a
    density; derived tables are built at construction when p <= 10^5 and
    on first use of `values` otherwise.
    """

    def __init__(self, field: PrimeField,
                 values: Optional[np.ndarray] = None,
                 dist: Optional[DistFp] = None) -> None:
        if values is None and dist is None:
            raise ValueError("CharFn needs either values or a source density")
        self.field = field
        self._dist = dist
        self._values = None
        if values is not None:
            values = np.array(values, dtype=np.complex128, copy=True)
            if values.shape != (field.p,):
                raise ValueError(f"values must have shape ({field.p},), got {values.shape}")
            values.setflags(write=False)
            self._values = values
        elif field.p <= EAGER_CHAR_FN_P:
            self._values = _char_transform(dist)

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def values(self) -> np.ndarray:
        # Recomputing gives the same array, so a race here is harmless.
        if self._values is None:
            self._values = _char_transform(self._dist)
        return self._values

    def at(self, a: int) -> complex:
        a %= self.p
        if self._values is not None:
            return complex(self._values[a])
        supp = self._dist.support
        return complex(char_sums_direct(
            self.p, supp, self._dist.density[supp], np.array([a]))[0])

    def __getitem__(self, a: int) -> complex:
        return self.at(a)

    def __len__(self) -> int:
        return self.p

    def abs_squared(self) -> np.ndarray:
        v = self.values
        return v.real ** 2 + v.imag ** 2


@dataclass(frozen=True, eq=False)
class PeakDist:
    base: CharFn
    density: np.ndarray
    mass: float

    @property
    def p(self) -> int:
        return self.base.p

    def as_dist(self) -> DistFp:
        """The peaking density as a density on F_p (frequencies a <-> residues)."""
        return DistFp(self.base.field, self.density)


def uniform_on(field: PrimeField, support: Iterable[int]) -> DistFp:
    elements = sorted({int(x) % field.p for x in support})
    if not elements:
        raise ValueError("uniform_on needs a nonempty support")
    density = np.zeros(field.p)
    density[elements] = 1.0 / len(elements)
    return DistFp(field, density)


def dirac(field: PrimeField, x: int) -> DistFp:
    return uniform_on(field, [x])


def from_weights(field: PrimeField, weights: np.ndarray) -> DistFp:
    """
    Normalizes nonnegative weights to a density. Negative entries above
    -1e-9 are treated as rounding noise and set to 0.
    """
    weights = np.array(weights, dtype=np.float64, copy=True)
    if np.any(weights < -NEGATIVE_NOISE_TOL):
        raise ValueError(f"weights have negative entries (min {weights.min()!r})")
    weights[weights < 0] = 0.0
    total = math.fsum(weights)
    if total <= 0:
        raise ValueError("weights sum to zero")
    return DistFp(field, weights / total)


def char_fn(X: DistFp) -> CharFn:
    return X.char_fn


def inverse_transform(values: np.ndarray) -> np.ndarray:
    """
    rho(y) = (1/p) sum_a values[a] e(-ay/p) for all y, real part.
    """
    values = np.asarray(values, dtype=np.complex128)
    p = len(values)
    if p * p <= DIRECT_SUM_LIMIT:
        freqs = (-np.arange(p, dtype=np.int64)) % p
        out = char_sums_direct(p, np.arange(p, dtype=np.int64), values, freqs)
    else:
        out = fft_char_sums(values, sign=-1)
    return out.real / p


def density_at(phi: CharFn, y: int) -> float:
    """
    Inverse transform of phi at a single residue y.
    """
    p = phi.p
    total = char_sums_direct(p, np.arange(p, dtype=np.int64), phi.values,
                             np.array([(-y) % p], dtype=np.int64))[0]
    return float(total.real / p)


def stepping(X: DistFp, ctx: GroupCtx) -> DistFp:
    """
    Density of Y = X1 X2^-1 (multiplicative) or X1 - X2 (additive) for
    independent copies X1, X2 of X.
    """
    field = X.field
    p = field.p
    supp = X.support
    w = X.density[supp]
    if ctx.is_additive:
        if len(supp) ** 2 <= PAIR_DIRECT_LIMIT:
            diffs = np.subtract.outer(supp, supp) % p
            out = np.zeros(p)
            np.add.at(out, diffs.ravel(), np.multiply.outer(w, w).ravel())
            return from_weights(field, out)
        return from_weights(field, inverse_transform(X.char_fn.abs_squared()))

    if X.density[0] > 0:
        raise ValueError(
            f"multiplicative stepping needs rho_X(0) = 0, got {X.density[0]!r}")
    logs = discrete_log_table(field)
    powers = power_table(field)
    n = p - 1
    if len(supp) ** 2 <= PAIR_DIRECT_LIMIT:
        quot = np.subtract.outer(logs[supp], logs[supp]) % n
        out = np.zeros(p)
        np.add.at(out, powers[quot.ravel()], np.multiply.outer(w, w).ravel())
        return from_weights(field, out)
    # Correlation on Z/(p-1) through the discrete log.
    f = np.zeros(n)
    f[logs[supp]] = w
    spec = np.fft.fft(f)
    corr = np.fft.ifft(spec * np.conj(spec)).real
    out = np.zeros(p)
    out[powers] = corr
    return from_weights(field, out)


def convolve(X: DistFp, Z: DistFp) -> DistFp:
    """Density of X + Z for independent X and Z."""
    if X.field != Z.field:
        raise ValueError(f"cannot convolve densities mod {X.p} and mod {Z.p}")
    p = X.p
    sx, sz = X.support, Z.support
    if len(sx) * len(sz) <= PAIR_DIRECT_LIMIT:
        sums = np.add.outer(sx, sz) % p
        out = np.zeros(p)
        np.add.at(out, sums.ravel(),
                  np.multiply.outer(X.density[sx], Z.density[sz]).ravel())
        return from_weights(X.field, out)
    out = np.fft.ifft(np.fft.fft(X.density) * np.fft.fft(Z.density)).real
    return from_weights(X.field, out)


def peaking(X: DistFp) -> PeakDist:
    phi = X.char_fn
    weights = phi.abs_squared()
    mass = math.fsum(weights)
    q = weights / mass
    q.setflags(write=False)
    return PeakDist(phi, q, mass)


def verify_fourier_duality(X: DistFp) -> Report:
    """
    rho_Y(y) = (M_X/p) phi_Yhat(y) for every y, rho_Y(0) = M_X/p and
    rho_Y(0) = sum_x rho_X(x)^2, where Y is the additive stepping of X.
    """
    p = X.p
    report = Report('verify_fourier_duality', inputs={'p': p, 'support_size': len(X.support)})
    Y = stepping(X, additive(X.field))
    peak = peaking(X)
    phi_peak = peak.as_dist().char_fn.values
    rhs = peak.mass / p * phi_peak.real

    report.quantities['M_X'] = peak.mass
    report.quantities['rho_Y0'] = Y[0]
    report.quantities['max_imag_phi_peak'] = float(np.max(np.abs(phi_peak.imag)))

    report.check_close('fourier-duality.max-discrepancy',
                       float(np.max(np.abs(Y.density - rhs))), 0.0, IDENTITY_TOL)
    report.check_close('eq-rho1', Y[0], peak.mass / p, IDENTITY_TOL)
    report.check_close('eq-rho0', Y[0], X.collision_probability(), IDENTITY_TOL)
    report.check_le('stepping.max_at_zero', float(Y.density.max()), Y[0], IDENTITY_TOL)
    product_gap = np.max(np.abs(Y.char_fn.values - X.char_fn.abs_squared()))
    report.check_close('char-fn.product-rule', float(product_gap), 0.0, IDENTITY_TOL)
    report.check_close('char-fn.at-zero', abs(X.char_fn.at(0) - 1.0), 0.0, IDENTITY_TOL)
    report.check_le('char-fn.modulus',
                    float(np.max(np.abs(X.char_fn.values))), 1.0, IDENTITY_TOL)
    return report


def _tail_inputs(values: np.ndarray, X: DistFp, M: Optional[float]):
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (X.p,):
        raise ValueError(f"values must have shape ({X.p},), got {values.shape}")
    if np.any(values[X.support] < 0):
        raise ValueError("the random variable must be nonnegative on the support")
    if M is None:
        M = float(values[X.support].max())
    elif np.any(values[X.support] > M):
        raise ValueError(f"values exceed the stated bound M = {M}")
    return values, X.expectation(values), M


def check_tail_bound(values: np.ndarray, X: DistFp,
                     delta: float, gamma: float,
                     M: Optional[float] = None) -> Report:
    """
    Bounded nonnegative variable Z = values[X] with Z <= M:
    E(Z) >= (1 - delta) M implies P(Z >= (1 - gamma) M) >= 1 - delta/gamma.

    Arguments:
    ----------
    values: np.ndarray
        Z as an array indexed by residue.
    X: DistFp
        Law of the residue.
    delta, gamma: float
        Both in (0, 1).
    M: Optional[float]
        Upper bound for Z; the maximum over the support when None.
    """
    if not (0 < delta < 1 and 0 < gamma < 1):
        raise ValueError(f"delta and gamma must lie in (0, 1), got {delta}, {gamma}")
    values, mean, M = _tail_inputs(values, X, M)
    report = Report('tail_bound', inputs={'delta': delta, 'gamma': gamma, 'M': M})
    report.quantities['mean'] = mean
    if mean < (1 - delta) * M:
        report.skip('tail-bound', f"E(Z) = {mean:.6g} < (1 - delta) M")
        return report
    tail = X.expectation((values >= (1 - gamma) * M).astype(np.float64))
    report.quantities['tail'] = tail
    report.check_ge('tail-bound', tail, 1 - delta / gamma, 1e-12)
    return report


def check_tail_bound_alpha(values: np.ndarray, X: DistFp, alpha: float,
                           M: Optional[float] = None) -> Report:
    """
    E(Z) >= M/alpha implies P(Z >= M/(2 alpha)) >= 1/(2 alpha).
    """
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    values, mean, M = _tail_inputs(values, X, M)
    report = Report('tail_bound_alpha', inputs={'alpha': alpha, 'M': M})
    report.quantities['mean'] = mean
    if mean < M / alpha:
        report.skip('tail-bound.alpha', f"E(Z) = {mean:.6g} < M / alpha")
        return report
    tail = X.expectation((values >= M / (2 * alpha)).astype(np.float64))
    report.quantities['tail'] = tail
    report.check_ge('tail-bound.alpha', tail, 1 / (2 * alpha), 1e-12)
    return report


def complex_expectation(X: DistFp, values: np.ndarray) -> complex:
    supp = X.support
    return fsum_complex(X.density[supp] * np.asarray(values)[supp])
