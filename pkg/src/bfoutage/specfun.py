"""Scalar special functions and combinatorial kernels shared by the outage evaluators.

Everything here is a pure function of its arguments and safe to call from any
number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special as _sc

__all__ = [
    "CapabilityError",
    "ConvergenceError",
    "DEFAULT_TOLERANCE",
    "SeriesTolerance",
    "bessel_j0",
    "expansion_coeffs",
    "lemma1_identity",
    "noncentral_chi2_cdf",
    "regularized_lower_gamma",
]


class ConvergenceError(ArithmeticError):
    """A series hit its term budget before meeting its tolerance.

    The sum accumulated so far is kept on the exception so callers can decide
    whether it is still usable.
    """

    def __init__(self, message: str, partial_sum):
        super().__init__(message)
        self.partial_sum = partial_sum


class CapabilityError(ValueError):
    """The request is valid mathematics but outside the supported range."""


@dataclass(frozen=True)
class SeriesTolerance:
    """Truncation control for the Poisson-mixture series."""

    rel_tol: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_TOLERANCE = SeriesTolerance()


def bessel_j0(x: float) -> float:
    """J0(x), the zero-order Bessel function of the first kind."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"bessel_j0 needs a finite argument, got {x!r}")
    return float(_sc.j0(x))


def regularized_lower_gamma(k: int, x: float) -> float:
    """P(k, x) = (1/(k-1)!) * integral_0^x t^(k-1) e^(-t) dt for integer k >= 1.

    Equals the CDF of a chi-square with 2k degrees of freedom evaluated at 2x.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"shape must be a positive integer, got {k!r}")
    x = float(x)
    if not (math.isfinite(x) and x >= 0):
        raise ValueError(f"argument must be finite and >= 0, got {x!r}")
    return float(_sc.gammainc(int(k), x))


def noncentral_chi2_cdf(
    half_dof: int,
    half_noncentrality: float,
    half_argument: float,
    tol: SeriesTolerance = DEFAULT_TOLERANCE,
) -> float:
    """CDF of a noncentral chi-square with 2*half_dof degrees of freedom and
    noncentrality 2*half_noncentrality, evaluated at 2*half_argument.

    Computed as the Poisson mixture of central chi-square CDFs,

        sum_k pois(k; delta) * P(d + k, beta),

    expanded outward from the Poisson mode so the leading weight never
    underflows.  Truncation: stop once the unvisited Poisson mass (times the
    uniform bound 1 on the central CDF factors) drops below rel_tol times the
    partial sum.
    """
    d, delta, beta = half_dof, float(half_noncentrality), float(half_argument)
    if int(d) != d or d < 1:
        raise ValueError(f"half_dof must be a positive integer, got {half_dof!r}")
    if not (math.isfinite(delta) and delta >= 0):
        raise ValueError(f"half_noncentrality must be finite and >= 0, got {delta!r}")
    if not (math.isfinite(beta) and beta >= 0):
        raise ValueError(f"half_argument must be finite and >= 0, got {beta!r}")
    d = int(d)
    if beta == 0.0:
        return 0.0
    if delta == 0.0:
        return regularized_lower_gamma(d, beta)

    mode = int(delta)
    w0 = math.exp(mode * math.log(delta) - delta - math.lgamma(mode + 1))
    partial = w0 * float(_sc.gammainc(d + mode, beta))
    visited = w0
    lo = hi = mode
    w_lo = w_hi = w0

    def remaining_mass() -> float:
        # Unvisited Poisson mass, bounded two ways: the complement of the
        # visited mass (which saturates at float precision) and geometric
        # bounds on the two unexplored wings.
        next_hi = w_hi * delta / (hi + 1)
        hi_tail = next_hi / (1.0 - delta / (hi + 2)) if delta < hi + 2 else 1.0
        if lo == 0:
            lo_tail = 0.0
        else:
            next_lo = w_lo * lo / delta
            lo_tail = next_lo / (1.0 - (lo - 1) / delta)
        return min(max(1.0 - visited, 0.0), lo_tail + hi_tail)

    terms = 1
    while terms < tol.max_terms:
        remaining = remaining_mass()
        if remaining <= 0.0 or remaining < tol.rel_tol * partial:
            return min(max(partial, 0.0), 1.0)
        next_hi = w_hi * delta / (hi + 1)
        next_lo = w_lo * lo / delta if lo > 0 else 0.0
        if next_hi >= next_lo:
            hi += 1
            w_hi = next_hi
            partial += w_hi * float(_sc.gammainc(d + hi, beta))
            visited += w_hi
        else:
            lo -= 1
            w_lo = next_lo
            partial += w_lo * float(_sc.gammainc(d + lo, beta))
            visited += w_lo
        terms += 1
    remaining = remaining_mass()
    if remaining <= 0.0 or remaining < tol.rel_tol * partial:
        return min(max(partial, 0.0), 1.0)
    raise ConvergenceError(
        f"noncentral chi-square series did not converge within {tol.max_terms} terms "
        f"(d={d}, delta={delta:g}, beta={beta:g})",
        min(max(partial, 0.0), 1.0),
    )


def _noncentral_chi2_cdf_grid(
    half_dof: int,
    half_noncentralities: np.ndarray,
    half_argument: float,
    tol: SeriesTolerance = DEFAULT_TOLERANCE,
) -> np.ndarray:
    """Vectorized version of :func:`noncentral_chi2_cdf` over an array of
    noncentrality values at a shared argument.  Ascends from k = 0, which is
    safe while exp(-max delta) stays representable; otherwise falls back to
    the scalar mode-started evaluation per element.
    """
    deltas = np.asarray(half_noncentralities, dtype=float)
    beta = float(half_argument)
    if np.any(deltas < 0):
        raise ValueError("noncentrality values must be >= 0")
    if beta == 0.0:
        return np.zeros_like(deltas)
    if deltas.size and float(deltas.max()) > 700.0:
        flat = deltas.reshape(-1)
        out = np.array([noncentral_chi2_cdf(half_dof, dv, beta, tol) for dv in flat])
        return out.reshape(deltas.shape)

    d = int(half_dof)
    w = np.exp(-deltas)
    visited = w.copy()
    partial = w * float(_sc.gammainc(d, beta))

    def converged(k: int) -> np.ndarray:
        # Ascending from zero, the unexplored region is the upper tail only;
        # bound it both by 1 - visited and by a geometric wing bound.
        next_w = w * deltas / (k + 1)
        ratio = deltas / (k + 2)
        with np.errstate(divide="ignore"):
            wing = np.where(ratio < 1.0, next_w / (1.0 - ratio), 1.0)
        remaining = np.minimum(np.maximum(1.0 - visited, 0.0), wing)
        return (remaining <= 0.0) | (remaining < tol.rel_tol * partial)

    k = 0
    while k < tol.max_terms - 1:
        if np.all(converged(k)):
            return np.clip(partial, 0.0, 1.0)
        k += 1
        w = w * deltas / k
        visited += w
        partial += w * float(_sc.gammainc(d + k, beta))
    if np.all(converged(k)):
        return np.clip(partial, 0.0, 1.0)
    raise ConvergenceError(
        f"noncentral chi-square series did not converge within {tol.max_terms} terms "
        f"(d={d}, max delta={float(deltas.max()):g}, beta={beta:g})",
        np.clip(partial, 0.0, 1.0),
    )


#: Largest supported degree k*(n_r - 1) of the truncated-exponential power.
MAX_EXPANSION_DEGREE = 64


def expansion_coeffs(n_r: int, k: int) -> list[float]:
    """Coefficients a_0..a_{k(n_r-1)} of (sum_{l<n_r} x^l / l!)^k.

    Computed by iterated convolution over exact rationals, then rounded once
    to float.  a_0 = 1 for every valid input.
    """
    if int(n_r) != n_r or n_r < 1:
        raise ValueError(f"n_r must be a positive integer, got {n_r!r}")
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k!r}")
    n_r, k = int(n_r), int(k)
    degree = k * (n_r - 1)
    if degree > MAX_EXPANSION_DEGREE:
        raise CapabilityError(
            f"requested degree {degree} exceeds the supported maximum {MAX_EXPANSION_DEGREE}"
        )
    base = [Fraction(1, math.factorial(l)) for l in range(n_r)]
    coeffs = [Fraction(1)]
    for _ in range(k):
        product = [Fraction(0)] * (len(coeffs) + n_r - 1)
        for i, a in enumerate(coeffs):
            if a == 0:
                continue
            for j, b in enumerate(base):
                product[i + j] += a * b
        coeffs = product
    return [float(c) for c in coeffs]


def lemma1_identity(m: int, n: int, k: int) -> tuple[int, int]:
    """Both sides of the binomial convolution identity

        C(m+k, n+k) = sum_{i=0}^{min(k, m-n)} C(k, i) * C(m, i+n)

    returned as (lhs, rhs) so callers can assert equality.
    """
    for name, val in (("m", m), ("n", n), ("k", k)):
        if int(val) != val or val < 1:
            raise ValueError(f"{name} must be a positive integer, got {val!r}")
    if m < n:
        raise ValueError(f"identity requires m >= n, got m={m}, n={n}")
    lhs = math.comb(m + k, n + k)
    rhs = sum(math.comb(k, i) * math.comb(m, i + n) for i in range(min(k, m - n) + 1))
    return lhs, rhs
