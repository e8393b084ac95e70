"""Exact integer q-expansions for level-one modular forms.

A series is a plain list of Python ints, index n holding the coefficient of
q^n.  Products are exact: the two factors are packed into huge integers
(Kronecker substitution) and multiplied with gmpy2, which is dramatically
faster than coefficient-by-coefficient convolution once the coefficients
reach hundreds of bits.  Sign handling splits each factor into positive and
negative parts so only nonnegative packings are ever multiplied.
"""

from __future__ import annotations

import math

import gmpy2

__all__ = [
    "series_mul",
    "series_pow",
    "sigma_sums",
    "eisenstein",
    "delta_qexp",
    "dim_modular_forms",
    "dim_cusp_forms",
    "victor_miller_basis",
]


def _pack(coeffs: list[int], slot: int) -> int:
    buf = bytearray(len(coeffs) * slot)
    for i, c in enumerate(coeffs):
        if c:
            nb = (c.bit_length() + 7) // 8
            buf[i * slot : i * slot + nb] = c.to_bytes(nb, "little")
    return int.from_bytes(buf, "little")


def _unpack(num: int, slot: int, count: int) -> list[int]:
    # the product can run to nearly twice count slots; size the buffer off the value
    nbytes = max((num.bit_length() + 7) // 8, count * slot)
    raw = num.to_bytes(nbytes, "little")
    return [int.from_bytes(raw[i * slot : (i + 1) * slot], "little") for i in range(count)]


def series_mul(a: list[int], b: list[int], n_trunc: int) -> list[int]:
    """Product of two integer series, truncated to degree n_trunc."""
    a = a[: n_trunc + 1]
    b = b[: n_trunc + 1]
    maxa = max((abs(c) for c in a), default=0)
    maxb = max((abs(c) for c in b), default=0)
    if maxa == 0 or maxb == 0:
        return [0] * (n_trunc + 1)
    bound = maxa * maxb * min(len(a), len(b))
    slot = (bound.bit_length() + 8) // 8 + 1
    ap = [c if c > 0 else 0 for c in a]
    an = [-c if c < 0 else 0 for c in a]
    bp = [c if c > 0 else 0 for c in b]
    bn = [-c if c < 0 else 0 for c in b]
    aabs = [abs(c) for c in a]
    babs = [abs(c) for c in b]
    pp = int(gmpy2.mpz(_pack(ap, slot)) * gmpy2.mpz(_pack(bp, slot)))
    nn = int(gmpy2.mpz(_pack(an, slot)) * gmpy2.mpz(_pack(bn, slot)))
    tot = int(gmpy2.mpz(_pack(aabs, slot)) * gmpy2.mpz(_pack(babs, slot)))
    cpp = _unpack(pp, slot, n_trunc + 1)
    cnn = _unpack(nn, slot, n_trunc + 1)
    ctot = _unpack(tot, slot, n_trunc + 1)
    return [2 * (p + q) - t for p, q, t in zip(cpp, cnn, ctot)]


def series_pow(a: list[int], e: int, n_trunc: int) -> list[int]:
    if e < 0:
        raise ValueError("negative powers not supported")
    result = [0] * (n_trunc + 1)
    result[0] = 1
    base = a[: n_trunc + 1]
    while e:
        if e & 1:
            result = series_mul(result, base, n_trunc)
        e >>= 1
        if e:
            base = series_mul(base, base, n_trunc)
    return result


def sigma_sums(power: int, n: int) -> list[int]:
    """sigma_power(m) for m = 0..n by a divisor sieve; index 0 is set to 0."""
    out = [0] * (n + 1)
    for d in range(1, n + 1):
        dp = d**power
        for m in range(d, n + 1, d):
            out[m] += dp
    return out


def eisenstein(weight: int, n_trunc: int) -> list[int]:
    """Normalized Eisenstein series E4 or E6 as an integer series."""
    if weight == 4:
        mult, power = 240, 3
    elif weight == 6:
        mult, power = -504, 5
    else:
        raise ValueError("only weights 4 and 6 are provided")
    sig = sigma_sums(power, n_trunc)
    out = [mult * s for s in sig]
    out[0] = 1
    return out


def delta_qexp(n_trunc: int) -> list[int]:
    """The discriminant form as (E4^3 - E6^2) / 1728, exactly."""
    e4 = eisenstein(4, n_trunc)
    e6 = eisenstein(6, n_trunc)
    e4c = series_pow(e4, 3, n_trunc)
    e6s = series_mul(e6, e6, n_trunc)
    out = []
    for x, y in zip(e4c, e6s):
        q, r = divmod(x - y, 1728)
        if r:
            raise ArithmeticError("E4^3 - E6^2 not divisible by 1728, series build is broken")
        out.append(q)
    return out


def dim_modular_forms(k: int) -> int:
    if k < 0 or k % 2 == 1:
        return 0
    if k % 12 == 2:
        return k // 12
    return k // 12 + 1


def dim_cusp_forms(k: int) -> int:
    return max(0, dim_modular_forms(k) - 1)


def victor_miller_basis(k: int, n_trunc: int) -> list[list[int]]:
    """Echelonized integer basis of the cusp forms of even weight k.

    Returns d = dim S_k series b_1..b_d with b_i(j) = [i == j] for
    1 <= j <= d.  Build: for each i the monomial Delta^i E4^a E6^b of
    weight k starts at q^i with coefficient 1, and downward elimination
    stays integral because every pivot is 1.
    """
    if k % 2 == 1 or k < 0:
        raise ValueError("weight must be a nonnegative even integer")
    d = dim_cusp_forms(k)
    if d == 0:
        return []
    delta = delta_qexp(n_trunc)
    e4 = eisenstein(4, n_trunc)
    e6 = eisenstein(6, n_trunc)

    delta_pows: dict[int, list[int]] = {1: delta}
    for i in range(2, d + 1):
        delta_pows[i] = series_mul(delta_pows[i - 1], delta, n_trunc)
    e4_pows: dict[int, list[int]] = {0: [1] + [0] * n_trunc, 1: e4}

    def e4_power(a: int) -> list[int]:
        if a not in e4_pows:
            e4_pows[a] = series_mul(e4_power(a - 1), e4, n_trunc)
        return e4_pows[a]

    raw = []
    for i in range(1, d + 1):
        rem = k - 12 * i
        b = 0 if rem % 4 == 0 else 1
        a = (rem - 6 * b) // 4
        if a < 0 or (rem - 6 * b) % 4 != 0:
            raise ArithmeticError(f"no monomial of weight {k} starting at q^{i}")
        f = series_mul(delta_pows[i], e4_power(a), n_trunc)
        if b:
            f = series_mul(f, e6, n_trunc)
        if f[i] != 1 or any(f[j] != 0 for j in range(i)):
            raise ArithmeticError("monomial basis element lost its leading one")
        raw.append(f)

    basis: list[list[int] | None] = [None] * (d + 1)
    for i in range(d, 0, -1):
        f = list(raw[i - 1])
        for j in range(i + 1, d + 1):
            c = f[j]
            if c:
                bj = basis[j]
                for m in range(j, n_trunc + 1):
                    f[m] -= c * bj[m]
        basis[i] = f
    out = [basis[i] for i in range(1, d + 1)]
    for i, bi in enumerate(out, start=1):
        assert all(bi[j] == (1 if j == i else 0) for j in range(1, d + 1))
    return out
