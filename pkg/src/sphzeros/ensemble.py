"""Gaussian SU(2) random polynomials.

A degree-N sample is ``p(z) = sum_j c_j sqrt(C(N, j)) z**j`` with i.i.d.
standard complex Gaussian ``c_j`` (real and imaginary parts independent,
mean 0, variance 1/2).

Stream splitting
----------------
``RandomSeed(root_seed, stream_index)`` maps to
``numpy.random.Generator(PCG64(SeedSequence(root_seed, spawn_key=(stream_index,))))``.
This is exactly the stream ``SeedSequence(root_seed).spawn(...)`` hands to
its ``stream_index``-th child, so streams are independent in the
SeedSequence sense and never depend on how many streams were drawn before.
The ``N + 1`` complex draws are taken as one ``standard_normal((N + 1, 2))``
block: column 0 real parts, column 1 imaginary parts.
"""

from dataclasses import dataclass, field
import math

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import DomainError

__all__ = ["RandomSeed", "PolynomialSample", "log_binomial", "su2_log_weights",
           "generator_for", "sample_su2"]


@dataclass(frozen=True)
class RandomSeed:
    root_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.root_seed < 2**64:
            raise DomainError(f"root_seed must fit in 64 unsigned bits, got {self.root_seed}")
        if self.stream_index < 0:
            raise DomainError(f"stream_index must be non-negative, got {self.stream_index}")

    def describe(self):
        return f"{self.root_seed}:{self.stream_index}"


def generator_for(seed, *subkeys):
    """Return the documented PCG64 stream for ``seed``.

    Extra ``subkeys`` extend the spawn key (e.g. a restart number), giving
    further independent children of the same stream.
    """
    key = (int(seed.stream_index),) + tuple(int(k) for k in subkeys)
    ss = np.random.SeedSequence(int(seed.root_seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class PolynomialSample:
    """Coefficients in ascending powers, stored divided by ``exp(log_scale)``.

    The zero set is invariant under the global scaling, so downstream code
    never needs ``log_scale``; it is kept only to recover the raw values.
    """

    degree: int
    coefficients: np.ndarray = field(repr=False)
    seed: RandomSeed | None = None
    log_scale: float = 0.0

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.complex128)
        if coeffs.ndim != 1 or coeffs.size != self.degree + 1:
            raise DomainError(
                f"degree {self.degree} needs {self.degree + 1} coefficients, got {coeffs.size}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_coefficients(cls, coefficients, *, ascending=True):
        """Wrap an explicit coefficient list (highest power last if ``ascending``)."""
        coeffs = np.asarray(coefficients, dtype=np.complex128)
        if not ascending:
            coeffs = coeffs[::-1]
        if coeffs.size < 2:
            raise DomainError("a polynomial sample needs degree >= 1")
        return cls(degree=coeffs.size - 1, coefficients=coeffs.copy())

    @property
    def leading_is_zero(self):
        """Degree deflation marker: the top coefficient vanished exactly."""
        return self.coefficients[-1] == 0

    def raw_coefficients(self):
        return self.coefficients * math.exp(self.log_scale)


def log_binomial(n, k):
    """Natural log of the binomial coefficient C(n, k).

    Small ``min(k, n - k)`` uses the exact product; otherwise log-gamma is
    evaluated at 30 significant digits so the result is correctly rounded
    (double log-gamma differences lose ~1e-9 absolute at n = 10**6).
    """
    if n < 0 or k < 0:
        raise DomainError(f"log_binomial needs non-negative arguments, got ({n}, {k})")
    if k > n:
        raise DomainError(f"log_binomial needs k <= n, got k={k} > n={n}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if k <= 30:
        return math.fsum(math.log((n - i) / (i + 1)) for i in range(k))
    with mpmath.workdps(30):
        return float(mpmath.loggamma(n + 1) - mpmath.loggamma(k + 1) - mpmath.loggamma(n - k + 1))


def su2_log_weights(degree):
    """``0.5 * log C(N, j)`` for j = 0..N."""
    j = np.arange(degree + 1, dtype=np.float64)
    return 0.5 * (gammaln(degree + 1.0) - gammaln(j + 1.0) - gammaln(degree - j + 1.0))


def sample_su2(degree, seed):
    if degree < 1:
        raise DomainError(f"degree must be >= 1, got {degree}")
    rng = generator_for(seed)
    draws = rng.standard_normal((degree + 1, 2)) * math.sqrt(0.5)
    c = draws[:, 0] + 1j * draws[:, 1]
    # Work in log-magnitudes so C(N, N/2) never overflows.
    with np.errstate(divide="ignore"):
        log_mod = np.log(np.abs(c)) + su2_log_weights(degree)
    log_scale = float(np.max(log_mod))
    coeffs = c / np.abs(np.where(c == 0, 1.0, c)) * np.exp(log_mod - log_scale)
    coeffs[c == 0] = 0.0
    return PolynomialSample(degree=degree, coefficients=coeffs, seed=seed, log_scale=log_scale)
