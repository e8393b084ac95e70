"""Restricted mass of an eigenform on the vertical geodesic and its pieces.

mu(f, psi) integrates |f(iy)|^2 y^k psi(y) dy/y over the support of the
weight psi.  Expanding the square splits mu into a diagonal part, an exact
off-diagonal part s_psi_direct, and, by subtraction, the residual that the
decomposition mu = s_direct + e_residual + expected defines.  The
shifted-convolution approximation trades the off-diagonal integrals for a
Gaussian-localized double sum whose defect decays like k^{-1/2}.

All products of eigenvalues with (4 pi n)^{(k-1)/2}-size factors are taken
through log space; only balanced combinations are ever exponentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bumps import Bump
from .forms import Eigenform
from .quadrature import adaptive_gl, fsum_real, gauss_legendre_nodes, integrate_panels

__all__ = [
    "MassReport",
    "mu",
    "expected",
    "s_psi_direct",
    "s_psi_diagonal",
    "s_psi_approx",
    "s_psi_approx_tail",
    "mass_report",
    "reports_to_csv",
]


@dataclass(frozen=True)
class MassReport:
    k: int
    form_index: int
    psi_id: str
    mu: float
    expected: float
    s_direct: float
    e_residual: float
    fourier_tail: float
    approx_tail: float


def _log_partial_and_tail(k: int, y: float, n_data: int) -> tuple[float, float, int]:
    """Log-space profile of sum (4 pi n)^{(k-1)/2} e^{-2 pi n y}.

    Returns (log partial sum over n <= n_data, log tail bound beyond n_data,
    effective truncation index).  The tail bound treats the series past
    n_data as geometric with the observed final ratio.
    """
    c = (k - 1) / 2.0
    ns = np.arange(1, n_data + 1, dtype=float)
    logs = c * np.log(4 * math.pi * ns) - 2 * math.pi * ns * y
    top = float(logs.max())
    partial = top + math.log(float(np.sum(np.exp(logs - top))))
    log_next = c * math.log(4 * math.pi * (n_data + 1)) - 2 * math.pi * (n_data + 1) * y
    ratio = math.exp(
        c * (math.log(n_data + 2) - math.log(n_data + 1)) - 2 * math.pi * y
    )
    if ratio >= 1.0:
        return partial, math.inf, n_data
    tail = log_next - math.log1p(-ratio)
    floor = top - 45 * math.log(10)
    n_eff = int(np.max(np.nonzero(logs > floor)[0])) + 1 if np.any(logs > floor) else n_data
    return partial, tail, n_eff

def _truncation_or_raise(f: Eigenform, psi: Bump) -> int:
    """Effective Fourier truncation for supp psi; raises if the tail will not drop."""
    y_low = psi.lo
    partial, tail, n_eff = _log_partial_and_tail(f.weight, y_low, f.truncation)
    if not (tail < partial + math.log(1e-12)):
        raise ArithmeticError(
            f"Fourier tail at y = {y_low:.4f} not below 1e-12 of the partial sum "
            f"with eigen-data length {f.truncation} (weight {f.weight})"
        )
    return n_eff


def _profile(f: Eigenform, n_eff: int, y: np.ndarray) -> np.ndarray:
    """sum lambda(n) (4 pi n)^{(k-1)/2} e^{-2 pi n y} for each y, signed."""
    c = (f.weight - 1) / 2.0
    ns = np.arange(1, n_eff + 1, dtype=float)
    base = c * np.log(4 * math.pi * ns)
    out = np.empty(len(y))
    lam = f.lam[:n_eff]
    for i, yi in enumerate(y):
        logs = base - 2 * math.pi * ns * yi
        keep = logs > logs.max() - 60.0
        out[i] = float(np.sum(lam[keep] * np.exp(logs[keep])))
    return out


def mu(f: Eigenform, psi: Bump, tol: float = 1e-13, rule: str = "gauss") -> float:
    """The restricted mass integral over supp psi.

    rule selects the quadrature backend: panel-doubling Gauss-Legendre
    (default) or tanh-sinh, the pair serving as mutual oracles.
    """
    n_eff = _truncation_or_raise(f, psi)
    k = f.weight
    log_a1 = f.log_a1_sq

    def integrand(y: np.ndarray) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        s = _profile(f, n_eff, y)
        return psi(y) * s * s * np.exp(log_a1 + (k - 1) * np.log(y))

    if rule == "gauss":
        val, err = adaptive_gl(integrand, psi.lo, psi.hi, tol=tol)
    elif rule == "tanhsinh":
        from .quadrature import tanh_sinh

        val, err = tanh_sinh(lambda y: float(integrand(np.array([y]))[0]), psi.lo, psi.hi, tol=tol)
    else:
        raise ValueError("rule must be gauss or tanhsinh")
    return float(val)


def expected(psi: Bump, order: int = 16) -> float:
    """(3/pi) int psi(y) dy/y over the support, to 1e-12."""
    edges = np.exp(np.linspace(math.log(psi.lo), math.log(psi.hi), 33))

    def f(u: np.ndarray) -> np.ndarray:
        return psi(np.exp(u))

    log_edges = np.log(edges)
    return 3.0 / math.pi * float(integrate_panels(f, log_edges, order))


def _pair_decomposition(f: Eigenform, psi: Bump, order: int = 16, panels: int = 24) -> tuple[float, float]:
    """(diagonal, off_diagonal) of the expanded mass double sum.

    Both use I(sigma) = int psi(y) y^{k-1} e^{-2 pi sigma y} dy on shared
    Gauss-Legendre panels; pairs are grouped by sigma = n + m and balanced
    in log space before exponentiation.
    """
    n_eff = _truncation_or_raise(f, psi)
    k = f.weight
    c = (k - 1) / 2.0
    xg, wg = gauss_legendre_nodes(order)
    edges = np.linspace(psi.lo, psi.hi, panels + 1)
    ys, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        ys.append(mid + half * xg)
        ws.append(half * wg)
    ys = np.concatenate(ys)
    ws = np.concatenate(ws)
    base = np.log(ws) + np.log(np.maximum(psi(ys), 1e-320)) + (k - 1) * np.log(ys)

    def log_i(sigma: int) -> float:
        logs = base - 2 * math.pi * sigma * ys
        top = float(logs.max())
        return top + math.log(float(np.sum(np.exp(logs - top))))

    lam = f.lam[:n_eff]
    t = c * np.log(np.arange(1, n_eff + 1, dtype=float))
    log_4pi2 = 2 * c * math.log(4 * math.pi)
    diag_terms, off_terms = [], []
    for sigma in range(2, 2 * n_eff + 1):
        li = log_i(sigma)
        n_lo = max(1, sigma - n_eff)
        n_hi = min(n_eff, sigma - 1)
        ns = np.arange(n_lo, n_hi + 1)
        ms = sigma - ns
        tt = t[ns - 1] + t[ms - 1]
        top = float(tt.max())
        vals = lam[ns - 1] * lam[ms - 1] * np.exp(tt - top)
        scale = math.exp(f.log_a1_sq + log_4pi2 + li + top) if f.log_a1_sq + log_4pi2 + li + top > -700 else 0.0
        if sigma % 2 == 0:
            j = sigma // 2
            if n_lo <= j <= n_hi:
                diag_terms.append(scale * float(vals[j - n_lo]))
                vals[j - n_lo] = 0.0
        off_terms.append(scale * float(np.sum(vals)))
    return fsum_real(diag_terms), fsum_real(off_terms)


def s_psi_direct(f: Eigenform, psi: Bump) -> float:
    """Exact off-diagonal (n != m) part of the expanded restricted mass."""
    return _pair_decomposition(f, psi)[1]


def s_psi_diagonal(f: Eigenform, psi: Bump) -> float:
    """Diagonal (n = m) complement; mu should equal diagonal + off_diagonal."""
    return _pair_decomposition(f, psi)[0]


def _approx_ranges(k: int, psi: Bump) -> tuple[int, list[tuple[int, int, int]]]:
    """(ell_max, list of (ell, n_lo, n_hi)) with nonempty psi support."""
    ell_max = math.ceil(math.sqrt(k) * math.log(k))
    out = []
    for ell in range(1, ell_max + 1):
        # psi(k / (2 pi q)) nonzero for q = 2n + ell in (k/(2 pi hi), k/(2 pi lo))
        q_lo = k / (2 * math.pi * psi.hi)
        q_hi = k / (2 * math.pi * psi.lo)
        n_lo = max(1, int(math.floor((q_lo - ell) / 2)) + 1)
        n_hi = int(math.ceil((q_hi - ell) / 2)) - 1
        while 2 * n_lo + ell <= q_lo:
            n_lo += 1
        while 2 * n_hi + ell >= q_hi:
            n_hi -= 1
        if n_hi >= n_lo:
            out.append((ell, n_lo, n_hi))
    return ell_max, out


def s_psi_approx(f: Eigenform, psi: Bump) -> float:
    """Gaussian-localized shifted-convolution approximation to s_psi_direct.

    (pi / 2L) sum over ell != 0 and n of lambda(n) lambda(n+ell)
    / sqrt(n(n+ell)) exp(-k ell^2 / (2(2n+ell)^2)) psi(k / (2 pi (2n+ell))),
    the two signs of ell contributing equally.
    """
    k = f.weight
    ell_max, ranges = _approx_ranges(k, psi)
    need = max((n_hi + ell for ell, _lo, n_hi in ranges), default=0)
    if need > f.truncation:
        raise ValueError(
            f"approximation needs lambda up to {need}, eigen-data stops at {f.truncation}"
        )
    terms = []
    for ell, n_lo, n_hi in ranges:
        ns = np.arange(n_lo, n_hi + 1, dtype=float)
        q = 2 * ns + ell
        lam_n = f.lam[n_lo - 1 : n_hi]
        lam_m = f.lam[n_lo + ell - 1 : n_hi + ell]
        vals = (
            lam_n
            * lam_m
            / np.sqrt(ns * (ns + ell))
            * np.exp(-k * ell * ell / (2.0 * q * q))
            * psi(k / (2 * math.pi * q))
        )
        terms.append(float(np.sum(vals)))
    return math.pi / (2 * f.l_sym2) * 2.0 * fsum_real(terms)


def s_psi_approx_tail(f: Eigenform, psi: Bump) -> float:
    """Bound on the neglected ell > ell_max terms via the Gaussian factor.

    Inside the psi support, 2n + ell < k alpha-equivalent / (2 pi), so the
    Gaussian is at most exp(-k ell^2 / (2 q_max^2)); eigenvalues are bounded
    through the divisor function.
    """
    k = f.weight
    ell_max, _ranges = _approx_ranges(k, psi)
    q_max = k / (2 * math.pi * psi.lo)
    psi_sup = float(np.max(psi(np.linspace(psi.lo, psi.hi, 257))))
    total = 0.0
    ell = ell_max + 1
    while True:
        if ell >= q_max:
            break  # support empty: 2n + ell >= q_max for all n >= 1
        gauss = math.exp(-k * ell * ell / (2 * q_max * q_max))
        n_count = max(0.0, (q_max - ell) / 2)
        # d(n) d(n+ell) <= q_max crudely on the support
        total += math.pi / (2 * f.l_sym2) * 2 * gauss * psi_sup * n_count * q_max
        if gauss < 1e-30:
            break
        ell += 1
    return total


def mass_report(f: Eigenform, psi: Bump, psi_id: str) -> MassReport:
    """Full decomposition for one form: mu = s_direct + e_residual + expected."""
    n_eff = _truncation_or_raise(f, psi)
    partial, tail, _ = _log_partial_and_tail(f.weight, psi.lo, f.truncation)
    m = mu(f, psi)
    e = expected(psi)
    s = s_psi_direct(f, psi)
    return MassReport(
        k=f.weight,
        form_index=f.conjugacy_id,
        psi_id=psi_id,
        mu=m,
        expected=e,
        s_direct=s,
        e_residual=m - s - e,
        fourier_tail=math.exp(tail - partial),
        approx_tail=s_psi_approx_tail(f, psi),
    )


def reports_to_csv(reports: list[MassReport]) -> str:
    lines = ["k,form_index,psi_id,mu,expected,s_direct,e_residual,fourier_tail,approx_tail"]
    for r in reports:
        lines.append(
            "%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g"
            % (
                r.k,
                r.form_index,
                r.psi_id,
                r.mu,
                r.expected,
                r.s_direct,
                r.e_residual,
                r.fourier_tail,
                r.approx_tail,
            )
        )
    return "\n".join(lines) + "\n"
