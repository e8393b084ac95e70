"""Special functions on the complex plane used throughout the package.

The zeta and gamma implementations here are deliberately self-contained
(Euler-Maclaurin and Stirling with argument shifting) so that the rest of
the code does not silently inherit its correctness from a multiprecision
library.  mpmath appears only in the test suite, as an independent oracle.

Bessel J of large order is split into two regimes: the oscillatory range
(order <= 2x) goes to scipy, the evanescent range (order > 2x) uses an
authored power series carried as (mantissa, log_scale) so that values far
below the double-precision underflow threshold keep their relative size.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
import scipy.special as _sp

__all__ = [
    "EULER_GAMMA",
    "zeta_complex",
    "loggamma",
    "gamma_complex",
    "log_sin_pi",
    "bessel_j",
    "bessel_j_scaled",
]

EULER_GAMMA = 0.57721566490153286061

# B_2, B_4, ..., B_24 as exact fractions evaluated once.
_BERNOULLI_EVEN = [
    1 / 6,
    -1 / 30,
    1 / 42,
    -1 / 30,
    5 / 66,
    -691 / 2730,
    7 / 6,
    -3617 / 510,
    43867 / 798,
    -174611 / 330,
    854513 / 138,
    -236364091 / 2730,
]

_BESSEL_ORDER_LIMIT = 2000


def zeta_complex(s: complex) -> complex:
    """Riemann zeta, Euler-Maclaurin on the right and reflection on the left.

    Accurate to near machine precision for Re(s) >= -12 and |Im(s)| up to a
    few hundred, which covers every contour used in this package.  Left of
    Re(s) = -1/2 the summation loses digits, so the value is pulled back
    through chi(s) zeta(1-s).  The point s = 1 is a pole and raises
    ValueError.
    """
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise ValueError("zeta_complex requires a finite argument")
    if s == 1.0:
        raise ValueError("zeta has a pole at s = 1")
    if s.real < -12:
        raise ValueError("zeta: Re(s) < -12 not supported, use the functional equation")
    if s.real < -0.5:
        if s.imag == 0.0 and s.real == int(s.real) and int(s.real) % 2 == 0:
            return 0.0 + 0.0j  # trivial zero
        log_chi = (
            s * math.log(2.0)
            + (s - 1) * math.log(math.pi)
            + log_sin_pi(s / 2.0)
            + loggamma(1.0 - s)
        )
        return cmath.exp(log_chi) * _zeta_euler_maclaurin(1.0 - s)
    return _zeta_euler_maclaurin(s)


def _zeta_euler_maclaurin(s: complex) -> complex:
    n_cut = max(20, int(2 * abs(s.imag)) + 1)
    ns = np.arange(1, n_cut, dtype=float)
    powers = np.exp(-s * np.log(ns))
    head = complex(math.fsum(powers.real), math.fsum(powers.imag))
    logn = math.log(n_cut)
    tail = cmath.exp((1 - s) * logn) / (s - 1) + 0.5 * cmath.exp(-s * logn)
    # Euler-Maclaurin corrections: B_2j / (2j)! * (s)_{2j-1} * N^(1 - s - 2j)
    corr = 0.0 + 0.0j
    rising = s  # (s)_1
    fact = 1.0  # (2j)! running value, updated incrementally
    for j, b2j in enumerate(_BERNOULLI_EVEN, start=1):
        fact *= (2 * j) * (2 * j - 1)
        corr += (b2j / fact) * rising * cmath.exp((1 - s - 2 * j) * logn)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + tail + corr


def log_sin_pi(s: complex) -> complex:
    """A logarithm of sin(pi s), stable for large |Im s|.

    Splits off the dominant exponential so no intermediate overflows; the
    imaginary part is a particular branch, continuous on each horizontal
    half-plane, not the principal one.  Raises at integers.
    """
    s = complex(s)
    if s.imag < 0:
        return log_sin_pi(s.conjugate()).conjugate()
    w = cmath.exp(2j * math.pi * s)  # |w| <= 1 here
    one_minus = 1.0 - w
    if one_minus == 0:
        raise ValueError("sin(pi s) vanishes at integer s")
    return -1j * math.pi * s + cmath.log(one_minus) + (math.log(0.5) + 0.5j * math.pi)


def loggamma(s: complex) -> complex:
    """log Gamma(s), principal branch for Re(s) > 0.

    Stirling's series after shifting the argument into Re >= 20.  For
    Re(s) <= 0 the value comes from the reflection formula in log space;
    exp of the result is always Gamma(s), but the imaginary part is then
    only defined up to the branch the reflection happens to produce.
    """
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise ValueError("loggamma requires a finite argument")
    if s.real <= 0 and s.imag == 0 and s.real == int(s.real):
        raise ValueError("loggamma pole at nonpositive integer")
    if s.real < 0.5:
        # Gamma(s) Gamma(1-s) = pi / sin(pi s)
        return math.log(math.pi) - log_sin_pi(s) - loggamma(1.0 - s)
    shift = 0
    z = s
    while z.real < 20.0:
        shift += 1
        z = s + shift
    val = (z - 0.5) * cmath.log(z) - z + 0.5 * math.log(2 * math.pi)
    zpow = z
    z2 = z * z
    for j, b2j in enumerate(_BERNOULLI_EVEN, start=1):
        val += b2j / ((2 * j) * (2 * j - 1) * zpow)
        zpow *= z2
    for i in range(shift):
        val -= cmath.log(s + i)
    return val


def gamma_complex(s: complex) -> complex:
    """Gamma(s) in non-log form; raises OverflowError past the double range.

    Callers needing Gamma(k) for large k (it enters |a_f(1)|^2 only through a
    ratio) should stay in log space via loggamma instead.
    """
    lg = loggamma(s)
    if lg.real > 709.0:
        raise OverflowError(
            "gamma_complex: |Gamma(s)| exceeds the double range, use loggamma"
        )
    out = cmath.exp(lg)
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise ArithmeticError("gamma_complex produced a non-finite value")
    return out


def bessel_j_scaled(order: int, x: float) -> tuple[float, float]:
    """J_order(x) as (mantissa, log_scale) with value = mantissa * exp(log_scale).

    For order <= 2x the value is a plain scipy evaluation with log_scale 0.
    Beyond that the Bessel function decays super-exponentially and the
    ascending series converges in a handful of terms; it is summed with the
    overall factor (x/2)^order / order! held in log space.
    """
    if order < 0 or order != int(order):
        raise ValueError("order must be a nonnegative integer")
    if order > _BESSEL_ORDER_LIMIT:
        raise ValueError(f"order {order} exceeds supported limit {_BESSEL_ORDER_LIMIT}")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return (1.0, 0.0) if order == 0 else (0.0, 0.0)
    if order <= 2 * x:
        return float(_sp.jv(order, x)), 0.0
    # ascending series sum_j (-u)^j / (j! (order+1)_j), u = x^2/4
    u = 0.25 * x * x
    term = 1.0
    total = 1.0
    j = 1
    while True:
        term *= -u / (j * (order + j))
        total += term
        if abs(term) < 1e-19 * abs(total):
            break
        j += 1
        if j > 500:  # pragma: no cover - series always converges long before
            break
    log_front = order * math.log(0.5 * x) - math.lgamma(order + 1.0)
    return total, log_front


def bessel_j(order: int, x: float) -> float:
    """J_order(x) as a plain double; underflows to 0 when the order dwarfs x."""
    mant, log_scale = bessel_j_scaled(order, x)
    if log_scale == 0.0:
        return mant
    if log_scale < -745.0:
        return 0.0 if mant >= 0 else -0.0
    return mant * math.exp(log_scale)
