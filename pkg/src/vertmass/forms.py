"""Hecke eigenforms of level one: exact basis, eigen-data, and L(1, sym^2).

Everything before normalization is exact integer arithmetic (Victor Miller
basis, Hecke matrices).  Normalized eigenvalues lambda_f(n) = a_f(n) /
n^((k-1)/2) are then formed in log space, since the raw coefficients
overflow doubles long before the weights of interest.

L(1, sym^2 f) is computed by a smoothed approximate functional equation
for the completed L-function (entire, self-dual, sign +1), evaluated on a
vertical line with trapezoid quadrature.  A second, much slower smoothed
Dirichlet-series route with doubling cutoffs is kept as l_sym2_at_1; at
the eigen-data lengths this package works with it reaches its designed
non-convergence error before the 1e-6 doubling criterion, which is itself
a statement worth testing (the series converges like c/X).

The quadrature Petersson norm is a third, independent route to |a_f(1)|^2
used as a cross-check at small weight.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import qexp
from .kernels import loggamma
from .quadrature import gauss_legendre_nodes

__all__ = [
    "QExpansion",
    "Eigenform",
    "victor_miller",
    "hecke_matrix",
    "normalized_hecke_matrix",
    "eigenforms",
    "default_truncation",
    "lambda_extended",
    "l_sym2_at_1",
    "petersson_norm",
    "fourier_eval",
    "EigenStore",
    "FORMS_VERSION",
]

# bumped whenever the eigen-data pipeline changes meaning; cache files
# carrying a different tag are rebuilt
FORMS_VERSION = "vertmass-forms-1"

ZETA2 = math.pi**2 / 6.0


@dataclass(frozen=True)
class QExpansion:
    """Exact integer q-expansion a(1..truncation) of a weight-k cusp form."""

    weight: int
    truncation: int
    coeffs: tuple[int, ...]

    def a(self, n: int) -> int:
        if not 1 <= n <= self.truncation:
            raise IndexError(f"coefficient index {n} outside 1..{self.truncation}")
        return self.coeffs[n - 1]


@dataclass(frozen=True, eq=False)
class Eigenform:
    """Normalized eigen-data for one Hecke eigenform of weight k.

    lam[n-1] holds lambda_f(n).  conjugacy_id indexes the form within its
    weight, ordered by lambda_f(2) ascending.
    """

    weight: int
    lam: np.ndarray
    l_sym2: float
    a1_sq: float
    log_a1_sq: float
    conjugacy_id: int

    @property
    def truncation(self) -> int:
        return len(self.lam)

    def lambda_at(self, n: int) -> float:
        if not 1 <= n <= self.truncation:
            raise IndexError(f"eigenvalue index {n} outside 1..{self.truncation}")
        return float(self.lam[n - 1])


def default_truncation(k: int) -> int:
    return max(2000, 8 * k)


def victor_miller(k: int, n_trunc: int) -> list[QExpansion]:
    """Echelonized exact cusp-form basis; the i-th form has a(j) = [i == j] for j <= dim."""
    rows = qexp.victor_miller_basis(k, n_trunc)
    return [QExpansion(weight=k, truncation=n_trunc, coeffs=tuple(r[1 : n_trunc + 1])) for r in rows]


def hecke_matrix(basis: list[QExpansion], n: int) -> list[list[int]]:
    """Matrix of T_n in the given basis, exact integers.

    Column j holds T_n applied to basis[j], expressed in coordinates read
    off rows i = 1..dim (valid because the basis is echelonized):
    a_{T_n f}(m) = sum over d | gcd(m, n) of d^(k-1) a_f(m n / d^2).
    """
    if not basis:
        return []
    k = basis[0].weight
    dim = len(basis)
    need = n * dim + n
    if basis[0].truncation < need:
        raise ValueError(
            f"basis truncation {basis[0].truncation} < {need} required for T_{n} at dim {dim}"
        )
    out = []
    for i in range(1, dim + 1):
        row = []
        for f in basis:
            total = 0
            for d in range(1, min(i, n) + 1):
                if i % d == 0 and n % d == 0:
                    total += d ** (k - 1) * f.a(i * n // (d * d))
            row.append(total)
        out.append(row)
    return out


def _log_abs(x: int) -> tuple[float, float]:
    """(sign, log|x|) for an arbitrary-size integer; sign 0 maps to (0, -inf)."""
    if x == 0:
        return 0.0, -math.inf
    return (1.0 if x > 0 else -1.0), math.log(abs(x))


def normalized_hecke_matrix(basis: list[QExpansion], n: int) -> np.ndarray:
    """n^{-(k-1)/2} S^{-1} T_n S with S = diag(j^{(k-1)/2}), as floats.

    Similar to the exact matrix, so same spectrum up to the normalization;
    its eigenvalues are the lambda_f(n).  Assembled in log space because the
    integer entries can exceed the double range.
    """
    k = basis[0].weight
    c = (k - 1) / 2.0
    raw = hecke_matrix(basis, n)
    dim = len(raw)
    out = np.zeros((dim, dim))
    logn = math.log(n)
    for i in range(dim):
        for j in range(dim):
            sgn, la = _log_abs(raw[i][j])
            if sgn:
                out[i, j] = sgn * math.exp(la + c * (math.log(j + 1) - math.log(i + 1)) - c * logn)
    return out


def _lambda_rows(basis: list[QExpansion], weights: np.ndarray, n_max: int) -> np.ndarray:
    """lambda(n) = sum_j w_j b_j(n) (j/n)^{(k-1)/2} for n = 1..n_max, log space."""
    k = basis[0].weight
    c = (k - 1) / 2.0
    lam = np.zeros(n_max)
    ln = np.log(np.arange(1, n_max + 1, dtype=float))
    for j, f in enumerate(basis, start=1):
        w = float(weights[j - 1])
        if w == 0.0:
            continue
        sgns = np.zeros(n_max)
        logs = np.full(n_max, -np.inf)
        for idx in range(n_max):
            sgn, la = _log_abs(f.coeffs[idx])
            sgns[idx] = sgn
            logs[idx] = la
        with np.errstate(invalid="ignore"):
            lam += w * sgns * np.exp(logs + c * (math.log(j) - ln))
    return lam


# --- L(1, sym^2 f) -----------------------------------------------------------

_AFE_BETA = 1.0 / 16.0
_AFE_HEIGHT = 40.0
_AFE_NODES = 6001


def _log_q_factor(s: complex, k: int) -> complex:
    """log of Q(s) = pi^{-3s/2} Gamma((s+1)/2) Gamma((s+k-1)/2) Gamma((s+k)/2)."""
    return (
        -1.5 * s * math.log(math.pi)
        + loggamma((s + 1) / 2)
        + loggamma((s + k - 1) / 2)
        + loggamma((s + k) / 2)
    )


@lru_cache(maxsize=32)
def _afe_tables(k: int, n_terms: int, beta: float = _AFE_BETA) -> tuple[np.ndarray, np.ndarray]:
    """Per-weight arrays (V[n], W[n]) with the completed-L smoothing folded in.

    L(1) = Re sum_n b_n (V[n]/n + W[n]) where b_n are the Dirichlet
    coefficients of zeta(2s) sum lambda(m^2) m^{-s}.  The vertical line sits
    at Re w = 2; both kernels carry exp(beta w^2) Gaussian damping and are
    already divided by Q(1), so no huge numbers appear.
    """
    t = np.linspace(-_AFE_HEIGHT, _AFE_HEIGHT, _AFE_NODES)
    dt = t[1] - t[0]
    w = 2.0 + 1j * t
    log_q1 = _log_q_factor(1.0 + 0j, k)
    kern_v = np.empty(_AFE_NODES, dtype=complex)
    kern_w = np.empty(_AFE_NODES, dtype=complex)
    for i, wi in enumerate(w):
        damp = beta * wi * wi
        kern_v[i] = np.exp(_log_q_factor(1.0 + wi, k) - log_q1 + damp) / wi
        kern_w[i] = np.exp(_log_q_factor(wi, k) - log_q1 + damp) / wi
    trapez = np.full(_AFE_NODES, dt / (2 * math.pi))
    trapez[0] *= 0.5
    trapez[-1] *= 0.5
    kern_v *= trapez
    kern_w *= trapez
    ns = np.arange(1, n_terms + 1, dtype=float)
    # V[n] = sum_t kern_v e^{-w ln n}; assembled n-by-n to avoid a dense matrix
    v_arr = np.empty(n_terms, dtype=complex)
    w_arr = np.empty(n_terms, dtype=complex)
    for idx, n in enumerate(ns):
        decay = np.exp(-w * math.log(n)) if n > 1 else np.ones_like(w)
        v_arr[idx] = np.sum(kern_v * decay)
        w_arr[idx] = np.sum(kern_w * decay)
    return v_arr, w_arr


def _prime_power_lambdas(lam: np.ndarray, p: int, e_max: int) -> list[float]:
    """lambda(p^e) for e = 0..e_max by the Hecke recursion from lambda(p)."""
    lp = float(lam[p - 1])
    vals = [1.0, lp]
    for _ in range(2, e_max + 1):
        vals.append(lp * vals[-1] - vals[-2])
    return vals[: e_max + 1]


def lambda_extended(lam: np.ndarray, m: int) -> float:
    """lambda(m) for m beyond the stored range, by multiplicativity.

    Every prime factor of m must sit inside the stored range; otherwise the
    eigen-data genuinely does not determine the value and this raises.
    """
    if m < 1:
        raise ValueError("index must be positive")
    if m <= len(lam):
        return float(lam[m - 1])
    out = 1.0
    for p, e in _factorize_small(m).items():
        if p > len(lam):
            raise ValueError(f"prime {p} outside stored eigen-data (length {len(lam)})")
        out *= _prime_power_lambdas(lam, p, e)[e]
    return out


def _factorize_small(n: int) -> dict[int, int]:
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


def _sym_square_coefficients(lam: np.ndarray, n_terms: int) -> np.ndarray:
    """Dirichlet coefficients b_n of zeta(2s) sum_m lambda(m^2) m^{-s}, n <= n_terms."""
    squares = np.empty(n_terms + 1)
    squares[0] = 0.0
    for m in range(1, n_terms + 1):
        val = 1.0
        for p, e in _factorize_small(m).items():
            val *= _prime_power_lambdas(lam, p, 2 * e)[2 * e]
        squares[m] = val
    b = np.zeros(n_terms + 1)
    for d in range(1, int(math.isqrt(n_terms)) + 1):
        step = d * d
        for n in range(step, n_terms + 1, step):
            b[n] += squares[n // step]
    return b


def _l_sym2_afe(k: int, lam: np.ndarray, beta: float = _AFE_BETA) -> float:
    n_terms = max(200, 8 * k)
    if n_terms > len(lam):
        raise ValueError("eigen-data too short for the L-value evaluation")
    v_arr, w_arr = _afe_tables(k, n_terms, beta)
    b = _sym_square_coefficients(lam, n_terms)
    ns = np.arange(1, n_terms + 1, dtype=float)
    total = np.sum(b[1:] * (v_arr / ns + w_arr))
    value = float(total.real)
    if value <= 0:
        raise ArithmeticError(f"L(1, sym^2) came out nonpositive ({value}) at k={k}")
    return value


def l_sym2_at_1(f: Eigenform) -> float:
    """zeta(2) sum_n lambda(n^2) n^{-1} e^{-n/X}, X doubling from 256 to 1e-6 stability.

    Requires eigen-data long enough that the exponential cutoff is complete
    at the final X; raises the non-convergence error when the next doubling
    would need values past the stored range.  Convergence in X is slow
    (the smoothed tail behaves like c/X), so at ordinary eigen-data lengths
    this raises before stabilizing; the functional-equation route carried on
    the Eigenform itself is the production value.
    """
    lam = f.lam
    big_x = 256.0
    prev = None
    while True:
        # cutoff where e^{-n/X}/n drops below 1e-16
        n_cut = int(big_x * 37.0)
        for _ in range(4):
            n_cut = int(big_x * (16 * math.log(10) - math.log(max(n_cut, 2))))
        if n_cut > f.truncation:
            raise ArithmeticError(
                f"smoothed series needs lambda(n^2) to n={n_cut} but eigen-data stops"
                f" at {f.truncation}; no convergence before the data runs out"
            )
        ns = np.arange(1, n_cut + 1)
        vals = np.empty(n_cut)
        for m in range(1, n_cut + 1):
            v = 1.0
            for p, e in _factorize_small(m).items():
                v *= _prime_power_lambdas(lam, p, 2 * e)[2 * e]
            vals[m - 1] = v
        total = ZETA2 * float(np.sum(vals / ns * np.exp(-ns / big_x)))
        if prev is not None and abs(total - prev) <= 1e-6 * abs(total):
            return total
        prev = total
        big_x *= 2.0


# --- eigenform construction --------------------------------------------------


def eigenforms(k: int, n_trunc: int | None = None) -> list[Eigenform]:
    """All normalized Hecke eigenforms of weight k with eigen-data to n_trunc."""
    if k % 2 or k < 12:
        return []
    if n_trunc is None:
        n_trunc = default_truncation(k)
    dim = qexp.dim_cusp_forms(k)
    if dim == 0:
        return []
    basis = victor_miller(k, n_trunc)
    if dim == 1:
        weight_vecs = [np.array([1.0])]
    else:
        t2 = normalized_hecke_matrix(basis, 2)
        vals, vecs = np.linalg.eig(t2)
        if np.max(np.abs(vals.imag)) > 1e-8:
            raise ArithmeticError(f"complex Hecke eigenvalue at k={k}: {vals}")
        order = np.argsort(vals.real)
        sorted_vals = vals.real[order]
        gaps = np.diff(sorted_vals)
        if np.any(gaps < 1e-8):
            raise ArithmeticError(
                f"lambda(2) eigenvalues collide within 1e-8 at k={k}: {sorted_vals}"
            )
        weight_vecs = []
        for idx in order:
            v = vecs[:, idx]
            if abs(v[0]) < 1e-12:
                raise ArithmeticError("eigenvector has vanishing first coordinate")
            v = v / v[0]
            if np.max(np.abs(v.imag)) > 1e-8:
                raise ArithmeticError("eigenvector failed to realify")
            weight_vecs.append(v.real)

    out = []
    log_2pi2 = math.log(2 * math.pi**2)
    lg_k = math.lgamma(k)
    for cid, wv in enumerate(weight_vecs):
        lam = _lambda_rows(basis, wv, n_trunc)
        if abs(lam[0] - 1.0) > 1e-9:
            raise ArithmeticError(f"lambda(1) != 1 at k={k} (got {lam[0]})")
        l_val = _l_sym2_afe(k, lam)
        log_a1 = log_2pi2 - lg_k - math.log(l_val)
        out.append(
            Eigenform(
                weight=k,
                lam=lam,
                l_sym2=l_val,
                a1_sq=math.exp(log_a1) if log_a1 > -700 else 0.0,
                log_a1_sq=log_a1,
                conjugacy_id=cid,
            )
        )
    return out


# --- quadrature Petersson norm ----------------------------------------------


def fourier_eval(eigen: Eigenform, x: float, y: float, n_max: int | None = None) -> complex:
    """f1(x + iy) = sum lambda(n) (4 pi n)^{(k-1)/2} e(n(x+iy)), no a_f(1) factor."""
    k = eigen.weight
    c = (k - 1) / 2.0
    n = eigen.truncation if n_max is None else min(n_max, eigen.truncation)
    ns = np.arange(1, n + 1, dtype=float)
    logs = c * np.log(4 * math.pi * ns) - 2 * math.pi * ns * y
    keep = logs > logs.max() - 60.0
    amps = eigen.lam[:n][keep] * np.exp(logs[keep])
    phases = np.exp(2j * math.pi * x * ns[keep])
    return complex(np.sum(amps * phases))


def petersson_norm(f_exact: QExpansion, eigen: Eigenform, y_panels: int = 60, order: int = 16) -> float:
    """<f1, f1> over the standard fundamental domain by tensor quadrature.

    f1 carries coefficients lambda(n)(4 pi n)^{(k-1)/2}, i.e. the 2.1
    normalization without the a_f(1) prefactor, so 1/<f1,f1> estimates
    |a_f(1)|^2.  f_exact supplies the exact expansion whose length backs the
    truncation precondition (tail below 1e-12 of the peak at y = sqrt(3)/2).
    """
    if f_exact.weight != eigen.weight:
        raise ValueError("expansion and eigen-data weights differ")
    k = eigen.weight
    c = (k - 1) / 2.0
    n_use = min(f_exact.truncation, eigen.truncation)
    y_min = math.sqrt(3.0) / 2.0
    ns = np.arange(1, n_use + 1, dtype=float)
    logs_at_min = c * np.log(4 * math.pi * ns) - 2 * math.pi * ns * y_min
    if logs_at_min[-1] > logs_at_min.max() - 12 * math.log(10) - 5:
        raise ValueError(
            f"truncation {n_use} leaves a tail above 1e-12 of the peak at y = sqrt(3)/2"
        )

    # height cutoff: first-coefficient profile down 40 decades from its peak
    y_peak = max(1.0, (k - 2) / (4 * math.pi))
    top = (k - 2) * math.log(y_peak) - 4 * math.pi * y_peak
    y_max = 2 * y_peak
    while (k - 2) * math.log(y_max) - 4 * math.pi * y_max > top - 40 * math.log(10):
        y_max *= 1.5

    xg, wg = gauss_legendre_nodes(order)

    def upper_slice(y: float) -> float:
        logs = 2.0 * (c * np.log(4 * math.pi * ns) - 2 * math.pi * ns * y)
        logs += (k - 2) * math.log(y)
        keep = logs > logs.max() - 120.0
        return float(np.sum(eigen.lam[:n_use][keep] ** 2 * np.exp(logs[keep])))

    def strip_slice(y: float) -> float:
        x_b = math.sqrt(max(0.0, 1.0 - y * y))
        half = 0.5 * (0.5 - x_b)
        mid = 0.5 * (0.5 + x_b)
        total = 0.0
        for xi, wi in zip(xg, wg):
            x = mid + half * xi
            total += wi * abs(fourier_eval(eigen, x, y, n_use)) ** 2
        return 2.0 * half * total * y ** (k - 2)

    # y-integration in log y; strip [sqrt3/2, 1) handled separately from [1, y_max]
    def integrate(lo: float, hi: float, slice_fn, panels: int) -> float:
        edges = np.exp(np.linspace(math.log(lo), math.log(hi), panels + 1))
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            mid = 0.5 * (b + a)
            total += half * math.fsum(wi * slice_fn(mid + half * xi) for xi, wi in zip(xg, wg))
        return total

    strip = integrate(y_min, 1.0, strip_slice, max(6, y_panels // 10))
    upper = integrate(1.0, y_max, upper_slice, y_panels)
    return strip + upper


# --- on-disk cache -----------------------------------------------------------


class EigenStore:
    """Per-weight eigen-data cache: plain text, 17 significant digits.

    File layout: a header line (format tag, k, N, dim), one line each for
    l_sym2 and a1_sq across forms, then N rows "n lambda_1(n) ... lambda_d(n)".
    A tag mismatch (format change) silently rebuilds.
    """

    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self._memory: dict[tuple[int, int], list[Eigenform]] = {}

    def _path(self, k: int, n_trunc: int) -> str:
        return os.path.join(self.directory, f"eigen_k{k}_N{n_trunc}.txt")

    def has(self, k: int, n_trunc: int | None = None) -> bool:
        """Whether usable cached data exists, checked by header only."""
        if n_trunc is None:
            n_trunc = default_truncation(k)
        if (k, n_trunc) in self._memory:
            return True
        path = self._path(k, n_trunc)
        if not os.path.exists(path):
            return False
        with open(path) as fh:
            header = fh.readline().split()
        return (
            len(header) >= 5
            and header[0] == "eigencache"
            and header[1] == FORMS_VERSION
            and header[2] == f"k={k}"
            and header[3] == f"N={n_trunc}"
        )

    def get(self, k: int, n_trunc: int | None = None) -> list[Eigenform]:
        if n_trunc is None:
            n_trunc = default_truncation(k)
        key = (k, n_trunc)
        if key in self._memory:
            return self._memory[key]
        path = self._path(k, n_trunc)
        forms = self._read(path, k, n_trunc) if os.path.exists(path) else None
        if forms is None:
            forms = eigenforms(k, n_trunc)
            self._write(path, k, n_trunc, forms)
        self._memory[key] = forms
        return forms

    def _write(self, path: str, k: int, n_trunc: int, forms: list[Eigenform]) -> None:
        dim = len(forms)
        lines = [f"eigencache {FORMS_VERSION} k={k} N={n_trunc} dim={dim}"]
        lines.append("lsym2 " + " ".join(f"{f.l_sym2:.17g}" for f in forms))
        lines.append("a1sq " + " ".join(f"{f.log_a1_sq:.17g}" for f in forms))
        for n in range(1, n_trunc + 1):
            row = " ".join(f"{f.lam[n - 1]:.17g}" for f in forms)
            lines.append(f"{n} {row}")
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)

    def _read(self, path: str, k: int, n_trunc: int) -> list[Eigenform] | None:
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) < 5 or header[0] != "eigencache" or header[1] != FORMS_VERSION:
                return None
            if header[2] != f"k={k}" or header[3] != f"N={n_trunc}":
                return None
            dim = int(header[4].split("=")[1])
            lsym2 = [float(v) for v in fh.readline().split()[1:]]
            log_a1 = [float(v) for v in fh.readline().split()[1:]]
            if len(lsym2) != dim or len(log_a1) != dim:
                return None
            lam = np.empty((dim, n_trunc))
            for n in range(1, n_trunc + 1):
                parts = fh.readline().split()
                if len(parts) != dim + 1 or int(parts[0]) != n:
                    return None
                lam[:, n - 1] = [float(v) for v in parts[1:]]
        return [
            Eigenform(
                weight=k,
                lam=lam[i],
                l_sym2=lsym2[i],
                a1_sq=math.exp(log_a1[i]) if log_a1[i] > -700 else 0.0,
                log_a1_sq=log_a1[i],
                conjugacy_id=i,
            )
            for i in range(dim)
        ]
