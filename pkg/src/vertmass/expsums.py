"""Kloosterman sums and the complete exponential-sum identity used as a gate.

Sums are evaluated by direct summation over units with cached inverse
tables, switching to twisted multiplicativity (CRT) for large composite
moduli.  Every sum is accumulated in complex arithmetic; the imaginary
part, which vanishes identically for Kloosterman sums, is asserted small
and discarded.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = [
    "arithmetic",
    "euler_phi",
    "factorize",
    "kloosterman",
    "weil_bound",
    "kloosterman_identity_lhs",
]

_DIRECT_LIMIT = 10_000
_IDENTITY_MODULUS_LIMIT = 24


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division; fine for the moduli used here."""
    if n <= 0:
        raise ValueError("need a positive integer")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorize(n).items():
        phi *= (p - 1) * p ** (e - 1)
    return phi


@lru_cache(maxsize=4096)
def _unit_tables(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (units, inverses) mod c for direct Kloosterman evaluation."""
    units = [x for x in range(1, c + 1) if math.gcd(x, c) == 1] if c > 1 else [0]
    if c == 1:
        return np.array([0]), np.array([0])
    inv = [pow(x, -1, c) for x in units]
    return np.array(units, dtype=np.int64), np.array(inv, dtype=np.int64)


def _kloosterman_direct(a: int, b: int, c: int) -> float:
    if c == 1:
        return 1.0
    units, inv = _unit_tables(c)
    phase = (2.0 * math.pi / c) * ((a % c) * units + (b % c) * inv)
    total = complex(np.sum(np.cos(phase)), np.sum(np.sin(phase)))
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"Kloosterman sum S({a},{b};{c}) came out non-real: {total}")
    return total.real


def kloosterman(a: int, b: int, c: int) -> float:
    """S(a, b; c) = sum over units x mod c of e((a x + b x^-1)/c).

    Real valued.  Direct summation up to modulus 10^4; beyond that the
    modulus is split into coprime pieces and the sums are composed by
    twisted multiplicativity, which keeps the unit loops short.
    """
    if c <= 0:
        raise ValueError("modulus must be positive")
    if c <= _DIRECT_LIMIT:
        return _kloosterman_direct(a, b, c)
    fac = factorize(c)
    if len(fac) == 1:
        # prime power too large for a table; direct loop without caching
        return _kloosterman_direct(a, b, c)
    p0, e0 = next(iter(fac.items()))
    c1 = p0**e0
    c2 = c // c1
    c1_bar = pow(c1, -1, c2)
    c2_bar = pow(c2, -1, c1)
    left = kloosterman(a * c2_bar * c2_bar, b, c1)
    right = kloosterman(a * c1_bar * c1_bar, b, c2)
    return left * right


def arithmetic(kind: str, n: int, m: int | None = None) -> int:
    """Small arithmetic functions by trial factorization: phi, divisor_count, gcd."""
    if n < 1:
        raise ValueError("need n >= 1")
    if kind == "phi":
        return euler_phi(n)
    if kind == "divisor_count":
        tau = 1
        for _, e in factorize(n).items():
            tau *= e + 1
        return tau
    if kind == "gcd":
        if m is None:
            raise ValueError("gcd needs a second argument")
        return math.gcd(n, m)
    raise ValueError(f"unknown arithmetic function {kind!r}")


def weil_bound(a: int, b: int, c: int) -> float:
    """tau(c) sqrt(gcd(a, b, c)) sqrt(c), an upper bound for |S(a,b;c)|."""
    tau = 1
    for _, e in factorize(c).items():
        tau *= e + 1
    g = math.gcd(math.gcd(abs(a), abs(b)), c) or c
    return tau * math.sqrt(g) * math.sqrt(c)


def _kloosterman_table(c: int) -> np.ndarray:
    """S(u, v; c) for all residues u, v as a dense c-by-c real matrix."""
    units, inv = _unit_tables(c)
    u_range = np.arange(c)
    ea = np.exp(2j * np.pi / c * np.outer(u_range, units))
    eb = np.exp(2j * np.pi / c * np.outer(u_range, inv))
    table = ea @ eb.T
    if np.max(np.abs(table.imag)) > 1e-8 * max(1.0, float(np.max(np.abs(table.real)))):
        raise ArithmeticError("Kloosterman table has a non-real entry")
    return table.real


def kloosterman_identity_lhs(c: int) -> float:
    """Complete four-variable Kloosterman average whose closed form is c^3 phi(c).

    Sums S(a1(a1+b1), a2(a2+b2); c) e((2 a1 a2 + a1 b2 + a2 b1)/c) over all
    four residues mod c.  Guarded to small moduli because the cost grows
    like c^4; callers compare the return value against c**3 * euler_phi(c).
    """
    if not 1 <= c <= _IDENTITY_MODULUS_LIMIT:
        raise ValueError(f"identity check supports 1 <= c <= {_IDENTITY_MODULUS_LIMIT}")
    table = _kloosterman_table(c)
    idx = np.arange(c)
    vmat = np.mod(np.outer(idx, np.ones(c, dtype=np.int64)) * (idx[:, None] + idx[None, :]), c)
    # vmat[a2, b2] = a2 (a2 + b2) mod c
    e_unit = np.exp(2j * np.pi / c * idx)
    total = 0.0 + 0.0j
    for a1 in range(c):
        for b1 in range(c):
            u = (a1 * (a1 + b1)) % c
            w = table[u][vmat]  # (a2, b2) matrix
            inner = w @ e_unit[(a1 * idx) % c]  # sum over b2
            total += inner @ e_unit[((2 * a1 + b1) * idx) % c]  # sum over a2
    if abs(total.imag) > 1e-6 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"identity sum for c={c} came out non-real: {total}")
    return total.real
