"""Quantum-variance pipeline for restricted mass on the vertical geodesic.

The pipeline has five legs that the report stitches together:

* the empirical weighted second moment of mu_f(psi) - E(psi) over a short
  window of weights,
* the diagonal count, summed exactly over integer solutions of
  n1(n1+m1) = n2(n2+m2) inside the support box (``diagonal_numeric``),
* the closed-form asymptotic for that diagonal (``diagonal_asymptotic``),
* the main-term formula the asymptotic simplifies to (``variance_main_term``),
* an off-diagonal probe summing the Kloosterman-weighted bilinear tail over
  its restricted ranges (``od_probe``), and a census of forms whose mass
  deviates from the expected value by more than a power threshold.

Only trends and signs are asserted downstream; the asymptotic equalities
carry error terms that dominate at any weight reachable here, so the report
records ratios rather than claiming convergence.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bumps import Bump, ContourSpec, mellin, mellin_derivative_at_zero
from .expsums import kloosterman
from .forms import Eigenform
from .kernels import zeta_complex
from .mass import MassReport, expected, mu
from .quadrature import fsum_complex, fsum_real, gauss_legendre_nodes
from .trace import WindowWeights

__all__ = [
    "ExponentConfig",
    "VarianceReport",
    "variance_empirical",
    "diagonal_numeric",
    "diagonal_asymptotic",
    "diagonal_asymptotic_terms",
    "variance_main_term",
    "zeta_pair_integral",
    "od_probe",
    "que_census",
    "cauchy_schwarz_gap",
    "collect_window_forms",
    "shifted_window",
    "variance_report",
    "report_text",
    "ratios_csv",
]


@dataclass(frozen=True)
class ExponentConfig:
    """Exponents steering the window width and the off-diagonal ranges.

    theta sets the window width G = K^theta, delta caps the divisor
    parameters, eta is the lower cutoff exponent for the shift lengths and
    eps the slack.  The three inequalities below are the compatibility
    constraints the off-diagonal analysis needs; they are checked on
    construction so that an inconsistent configuration fails fast.
    """

    theta: float = 9.0 / 10.0
    delta: float = 9.0 / 160.0
    eta: float = 13.0 / 80.0
    eps: float = 0.01

    def __post_init__(self) -> None:
        if not self.delta > 0.5 * (1.0 - self.theta + self.eps):
            raise ValueError("need delta > (1 - theta + eps)/2")
        if not self.theta > 2.0 / 3.0 + 4.0 * self.eta / 3.0 + self.eps:
            raise ValueError("need theta > 2/3 + 4 eta/3 + eps")
        if not self.theta + self.eta - self.delta > 1.0:
            raise ValueError("need theta + eta - delta > 1")


@dataclass(frozen=True)
class VarianceReport:
    lhs_empirical: float
    diag_numeric: float
    diag_asymptotic: float
    main_term: float
    od_probe: float
    ratios: Mapping[str, float] = field(default_factory=dict)
    window: WindowWeights | None = None


def shifted_window(big_k: float, theta: float = 9.0 / 10.0, window: Bump | None = None) -> WindowWeights:
    """The window the variance runs over: weight k counts with h((k-1-K)/G), G = K^theta."""
    from .bumps import window_12

    return WindowWeights(
        bigK=float(big_k),
        bigG=float(big_k) ** theta,
        window=window if window is not None else window_12(),
        shift_mode="shifted",
    )


def _require_symmetric(psi: Bump, tol: float = 1e-9) -> None:
    """Raise unless psi(y) = psi(1/y) on a sample grid through the support."""
    us = np.linspace(math.log(psi.lo), math.log(psi.hi), 41)[1:-1]
    ys = np.exp(us)
    vals = psi(ys)
    mirrored = psi(1.0 / ys)
    scale = float(np.max(np.abs(vals))) or 1.0
    worst = float(np.max(np.abs(vals - mirrored)))
    if worst > tol * scale:
        raise ValueError(
            "weight is not symmetric under y -> 1/y (max deviation %.3e of peak)" % (worst / scale)
        )


def collect_window_forms(
    w: WindowWeights, store=None, n_trunc: int | None = None
) -> dict[int, list[Eigenform]]:
    """Eigen-data for every weight the window touches, keyed by weight."""
    from .forms import eigenforms

    out: dict[int, list[Eigenform]] = {}
    for k in w.k_values():
        out[k] = list(store.get(k, n_trunc) if store is not None else eigenforms(k, n_trunc))
    return out


def variance_empirical(
    w: WindowWeights,
    psi1: Bump,
    psi2: Bump,
    forms_by_k: Mapping[int, Sequence[Eigenform]],
) -> float:
    """The windowed second moment sum_k h((k-1-K)/G) sum_f L(1,sym^2 f)(mu-E)(mu-E)."""
    _require_symmetric(psi1)
    _require_symmetric(psi2)
    ks = w.k_values()
    missing = [k for k in ks if k not in forms_by_k]
    if missing:
        raise KeyError(f"no eigen-data for weights {missing}")
    e1 = expected(psi1)
    e2 = expected(psi2)
    same = psi1 == psi2
    terms = []
    for k in ks:
        hk = w.weight_at(k)
        for f in forms_by_k[k]:
            m1 = mu(f, psi1)
            m2 = m1 if same else mu(f, psi2)
            terms.append(hk * f.l_sym2 * (m1 - e1) * (m2 - e2))
    return fsum_real(terms)


# ---------------------------------------------------------------------------
# diagonal: exact integer enumeration


def _tuple_grid(
    w: WindowWeights, psi: Bump, m_cut_decades: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Positive representatives (d, q, m) with q = 2n + m, n >= 1.

    Each carries the pair of signed shifts (n, m) and (n+m, -m), which share
    q, m^2 and the product N = n(n+m) = (q^2 - m^2)/4; callers multiply by
    the orbit size.  Kept are the tuples whose weight argument k/(2 pi d q)
    can land in supp psi for some weight k in the window, and whose Gaussian
    factor exp(-k m^2 / (2 q^2)) exceeds the requested cutoff.
    """
    x_lo = (w.window.lo + w.shift) * w.scale + 1.0
    x_hi = (w.window.hi + w.shift) * w.scale + 1.0
    dq_lo = max(1, int(math.floor(x_lo / (2.0 * math.pi * psi.hi))))
    dq_hi = int(math.ceil(x_hi / (2.0 * math.pi * psi.lo)))
    m_slope = math.sqrt(2.0 * m_cut_decades * math.log(10.0) / x_lo)
    ds, qs, ms = [], [], []
    for q in range(3, dq_hi + 1):
        d_hi = dq_hi // q
        d_lo = max(1, -(-dq_lo // q))
        if d_hi < d_lo:
            continue
        m_max = min(q - 2, int(q * m_slope))
        if m_max < 1:
            continue
        m_first = 2 - (q % 2)
        if m_first > m_max:
            continue
        m_vals = np.arange(m_first, m_max + 1, 2, dtype=np.int64)
        d_vals = np.arange(d_lo, d_hi + 1, dtype=np.int64)
        ds.append(np.repeat(d_vals, len(m_vals)))
        ms.append(np.tile(m_vals, len(d_vals)))
        qs.append(np.full(len(d_vals) * len(m_vals), q, dtype=np.int64))
    if not qs:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty
    d = np.concatenate(ds)
    q = np.concatenate(qs)
    m = np.concatenate(ms)
    n_prod = (q * q - m * m) // 4
    return d, q, m, n_prod


def diagonal_numeric(
    w: WindowWeights,
    psi1: Bump,
    psi2: Bump,
    pairing: str = "all",
    nodes: int = 64,
    m_cut_decades: float = 16.0,
) -> float:
    """The diagonal sum G sum_{N1=N2} g*^(0) / (d1 d2 sqrt(N1 N2)), enumerated exactly.

    pairing "all" keeps every solution of n1(n1+m1) = n2(n2+m2) in the
    support box, grouping tuples by the common product so that sporadic
    coincidences between different (q, m) pairs enter exactly.  pairing
    "matched" keeps only pairs using the same signed shift on both sides,
    which is the family the closed-form asymptotic integrates.
    """
    if pairing not in ("all", "matched"):
        raise ValueError("pairing must be all or matched")
    d1, q1, m1, n1 = _tuple_grid(w, psi1, m_cut_decades)
    d2, q2, m2, n2 = _tuple_grid(w, psi2, m_cut_decades)
    if len(q1) == 0 or len(q2) == 0:
        return 0.0
    if pairing == "all":
        key1, key2 = n1, n2
        orbit = 4.0
    else:
        pack = np.int64(1) << 32
        key1, key2 = q1 * pack + m1, q2 * pack + m2
        orbit = 2.0
    common = np.intersect1d(np.unique(key1), np.unique(key2))
    if len(common) == 0:
        return 0.0
    keep1 = np.isin(key1, common)
    keep2 = np.isin(key2, common)
    idx1 = np.searchsorted(common, key1[keep1])
    idx2 = np.searchsorted(common, key2[keep2])
    if pairing == "all":
        common_n = common.astype(float)
    else:
        qq = (common >> 32).astype(float)
        mm = (common & ((np.int64(1) << 32) - 1)).astype(float)
        common_n = (qq * qq - mm * mm) / 4.0
    inv_n = 1.0 / common_n

    sides = []
    for d, q, m, keep in ((d1, q1, m1, keep1), (d2, q2, m2, keep2)):
        df = d[keep].astype(float)
        qf = q[keep].astype(float)
        mf = m[keep].astype(float)
        sides.append((1.0 / df, 1.0 / (2.0 * math.pi * df * qf), mf * mf / (2.0 * qf * qf)))

    t_lo = w.window.lo + w.shift
    t_hi = w.window.hi + w.shift
    xs, wts = gauss_legendre_nodes(nodes)
    ts = 0.5 * (t_hi - t_lo) * xs + 0.5 * (t_hi + t_lo)
    tws = 0.5 * (t_hi - t_lo) * wts
    g_vals = w.window(ts - w.shift)

    contribs = []
    for t, tw, g in zip(ts, tws, g_vals):
        x = t * w.scale + 1.0
        (f1_inv_d, f1_arg, f1_gau) = sides[0]
        s1 = np.bincount(
            idx1,
            weights=psi1(x * f1_arg) * np.exp(-x * f1_gau) * f1_inv_d,
            minlength=len(common),
        )
        (f2_inv_d, f2_arg, f2_gau) = sides[1]
        s2 = np.bincount(
            idx2,
            weights=psi2(x * f2_arg) * np.exp(-x * f2_gau) * f2_inv_d,
            minlength=len(common),
        )
        contribs.append(tw * g * ((x - 1.0) / 16.0) * float(np.dot(s1, s2 * inv_n)))
    return orbit * w.bigG * fsum_real(contribs)


# ---------------------------------------------------------------------------
# diagonal: closed-form asymptotic


def _window_u_integral(w: WindowWeights, power: float, with_log: bool, order: int = 48) -> float:
    """int_0^inf h(sqrt u)/sqrt(2 pi u) (1 + sqrt(u) G/K)^power [log(...)] du in the t = sqrt(u) chart."""
    ratio = w.bigG / w.bigK
    xs, wts = gauss_legendre_nodes(order)
    lo, hi = w.window.lo, w.window.hi
    ts = 0.5 * (hi - lo) * xs + 0.5 * (hi + lo)
    tws = 0.5 * (hi - lo) * wts
    base = 1.0 + ts * ratio
    vals = w.window(ts) * base**power
    if with_log:
        vals = vals * np.log(base)
    return math.sqrt(2.0 / math.pi) * float(np.dot(tws, vals))


def zeta_pair_integral(psi1: Bump, psi2: Bump, spec: ContourSpec | None = None) -> float:
    """(1/2 pi i) int on Re s = 1 of psi1~(-s) psi2~(s) zeta(1-s) zeta(1+s) ds.

    The transforms decay faster than any power along the line while the zeta
    pair grows polynomially, so a modest truncation height suffices; the
    spec argument exists so tests can double it.
    """
    if spec is None:
        spec = ContourSpec(sigma=1.0, height=120.0, step=0.05)
    return _zeta_pair_cached(psi1, psi2, spec)


@lru_cache(maxsize=8)
def _zeta_pair_cached(psi1: Bump, psi2: Bump, spec: ContourSpec) -> float:
    s_nodes, s_wts = spec.points()
    vals = [
        mellin(psi1, s) * mellin(psi2, -s) * zeta_complex(1.0 - s) * zeta_complex(1.0 + s)
        for s in s_nodes
    ]
    total = fsum_complex([wt * v for wt, v in zip(s_wts, vals)])
    return float(total.real)


def diagonal_asymptotic_terms(
    w: WindowWeights,
    psi1: Bump,
    psi2: Bump,
    cfg: ExponentConfig | None = None,
    form: str = "first",
    spec: ContourSpec | None = None,
) -> dict[str, float]:
    """The four closed-form pieces of the diagonal, plus its error magnitudes.

    The first form keeps the (1 + sqrt(u) G/K) correction factors and the
    companion log term; the second form, valid once G/K is negligible,
    drops both.  Error magnitudes K^(2+eps)/G and K^(-1/2+eps) G^2 are
    reported as numbers, never folded into the value.
    """
    if w.shift_mode != "shifted":
        raise ValueError("the closed form needs the recentred window (shift_mode shifted)")
    if form not in ("first", "second"):
        raise ValueError("form must be first or second")
    _require_symmetric(psi1)
    _require_symmetric(psi2)
    cfg = cfg if cfg is not None else ExponentConfig()
    big_k, big_g = w.bigK, w.bigG
    c32 = math.sqrt(2.0) * math.pi / 32.0
    c16 = math.sqrt(2.0) * math.pi / 16.0
    p1 = complex(mellin(psi1, 0.0)).real
    p2 = complex(mellin(psi2, 0.0)).real
    # the display's transform pairs y^s with the measure, ours pairs y^(-s)
    dp2 = -mellin_derivative_at_zero(psi2)
    if form == "first":
        i_half = _window_u_integral(w, 0.5, False)
        i_half_log = _window_u_integral(w, 0.5, True)
        i_one = _window_u_integral(w, 1.0, False)
    else:
        i_half = _window_u_integral(w, 0.0, False)
        i_half_log = 0.0
        i_one = i_half
    z = zeta_pair_integral(psi1, psi2, spec)
    pref = math.sqrt(big_k) * big_g
    t1 = pref * math.log(big_k) * c32 * p1 * p2 * i_half
    t2 = pref * c32 * p1 * p2 * i_half_log
    t3 = pref * i_one * (c16 * (1.5 * np.euler_gamma - math.log(4.0 * math.pi)) * p1 * p2 + c16 * p1 * dp2)
    t4 = pref * c16 * i_half * z
    return {
        "t1": t1,
        "t2": t2,
        "t3": t3,
        "t4": t4,
        "zeta_integral": z,
        "sum": t1 + t2 + t3 + t4,
        "error_first_form": big_k ** (2.0 + cfg.eps) / big_g,
        "error_second_extra": big_k ** (-0.5 + cfg.eps) * big_g**2,
    }


def diagonal_asymptotic(
    w: WindowWeights,
    psi1: Bump,
    psi2: Bump,
    cfg: ExponentConfig | None = None,
    form: str = "first",
    spec: ContourSpec | None = None,
) -> float:
    return diagonal_asymptotic_terms(w, psi1, psi2, cfg, form, spec)["sum"]


def variance_main_term(
    w: WindowWeights, psi1: Bump, psi2: Bump, spec: ContourSpec | None = None
) -> float:
    """The displayed main term V(psi1, psi2) of the windowed variance."""
    if w.shift_mode != "shifted":
        raise ValueError("the main term needs the recentred window (shift_mode shifted)")
    _require_symmetric(psi1)
    _require_symmetric(psi2)
    big_k, big_g = w.bigK, w.bigG
    c32 = math.sqrt(2.0) * math.pi / 32.0
    c16 = math.sqrt(2.0) * math.pi / 16.0
    xs, wts = gauss_legendre_nodes(48)
    lo, hi = w.window.lo, w.window.hi
    ts = 0.5 * (hi - lo) * xs + 0.5 * (hi + lo)
    i0 = math.sqrt(2.0 / math.pi) * float(np.dot(0.5 * (hi - lo) * wts, w.window(ts)))
    p1 = complex(mellin(psi1, 0.0)).real
    p2 = complex(mellin(psi2, 0.0)).real
    dp2 = -mellin_derivative_at_zero(psi2)
    z = zeta_pair_integral(psi1, psi2, spec)
    pref = math.sqrt(big_k) * big_g
    return (
        pref * math.log(big_k) * c32 * p1 * p2 * i0
        + pref * i0 * (c16 * (1.5 * np.euler_gamma - math.log(4.0 * math.pi)) * p1 * p2 + c16 * p1 * dp2)
        + pref * c16 * i0 * z
    )


# ---------------------------------------------------------------------------
# off-diagonal probe


def phase_difference(n1: float, n2: float, m1: float, m2: float) -> float:
    """f = 2 sqrt(n1(n1+m1) n2(n2+m2)) - 2 n1 n2 - n1 m2 - n2 m1; zero when the shifts match."""
    return 2.0 * math.sqrt(n1 * (n1 + m1) * n2 * (n2 + m2)) - 2.0 * n1 * n2 - n1 * m2 - n2 * m1


def phase_x_derivative(x: float, n2: float, m1: float, m2: float) -> float:
    """d/dx of the phase in the first shift length, in its factored form."""
    return (
        math.sqrt(n2 * (n2 + m2)) * (math.sqrt((x + m1) / x) + math.sqrt(x / (x + m1)))
        - 2.0 * n2
        - m2
    )


def _stationary_checks() -> None:
    if phase_difference(17, 17, 5, 5) != 0.0:
        raise ArithmeticError("matched shifts must give exactly zero phase")
    n2, sm1, sm2 = 1000.0, 7.0, 5.0
    x_star = sm1 * n2 / sm2
    if abs(phase_x_derivative(x_star, n2, sm1, sm2)) > 1e-8:
        raise ArithmeticError("closed-form critical point fails the derivative check")


def _od_side(
    w: WindowWeights, psi: Bump, d: int, cfg: ExponentConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Shift tuples (n, m) for one side at divisor parameter d."""
    big_k = w.bigK
    x_lo = (w.window.lo + w.shift) * w.scale + 1.0
    x_hi = (w.window.hi + w.shift) * w.scale + 1.0
    q_lo = x_lo / (2.0 * math.pi * d * psi.hi)
    q_hi = x_hi / (2.0 * math.pi * d * psi.lo)
    m_lo = max(1, int(math.ceil(big_k**cfg.eta)))
    m_hi = int(math.floor(big_k ** (0.5 + cfg.eps) / d))
    ns, ms = [], []
    for m in range(m_lo, m_hi + 1):
        n_first = max(1, int(math.floor((q_lo - m) / 2.0)) + 1)
        n_last = int(math.ceil((q_hi - m) / 2.0)) - 1
        if n_last < n_first:
            continue
        nv = np.arange(n_first, n_last + 1, dtype=np.int64)
        ns.append(nv)
        ms.append(np.full(len(nv), m, dtype=np.int64))
    if not ns:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(ns), np.concatenate(ms)


def od_probe(
    w: WindowWeights,
    psi1: Bump,
    psi2: Bump,
    cfg: ExponentConfig | None = None,
    u_nodes: int = 48,
) -> float:
    """|OD| K^(-11/8) from the restricted bilinear Kloosterman sum.

    Sums the off-diagonal display over positive shifts with
    K^eta <= m_i <= K^(1/2+eps)/d_i, divisor parameters d_i <= K^delta and
    moduli with c d1 d2 <= K^(1-theta+eps); the ranges collapse to c = d1 =
    d2 = 1 at any affordable K.  The smooth weight is integrated on a fixed
    Gauss grid; its phase varies by a few radians at most over the support.
    """
    cfg = cfg if cfg is not None else ExponentConfig()
    if w.bigK > 500:
        raise ValueError("cost guard: od_probe is limited to bigK <= 500")
    if w.shift_mode != "shifted":
        raise ValueError("the off-diagonal display needs the recentred window")
    _stationary_checks()
    big_k, big_g = w.bigK, w.bigG
    cap = big_k ** (1.0 - cfg.theta + cfg.eps)
    d_cap = int(math.floor(min(big_k**cfg.delta, cap)))

    xs, uws = gauss_legendre_nodes(u_nodes)
    u_lo, u_hi = w.window.lo**2, w.window.hi**2
    us = 0.5 * (u_hi - u_lo) * xs + 0.5 * (u_hi + u_lo)
    uw = 0.5 * (u_hi - u_lo) * uws
    ru = np.sqrt(us)
    h_over = w.window(ru) / np.sqrt(2.0 * math.pi * us) * (1.0 + ru * big_g / big_k)
    x_of_u = ru * big_g + big_k + 1.0

    total = 0j
    for d1 in range(1, max(d_cap, 1) + 1):
        n1s, m1s = _od_side(w, psi1, d1, cfg)
        if len(n1s) == 0:
            continue
        for d2 in range(1, max(d_cap, 1) + 1):
            c_hi = int(math.floor(cap / (d1 * d2)))
            if c_hi < 1:
                continue
            n2s, m2s = _od_side(w, psi2, d2, cfg)
            if len(n2s) == 0:
                continue
            q2 = (2 * n2s + m2s).astype(float)
            nn2 = (n2s * (n2s + m2s)).astype(float)
            side2 = psi2(x_of_u[:, None] / (2.0 * math.pi * d2 * q2[None, :])) * np.exp(
                -x_of_u[:, None] * (m2s * m2s)[None, :] / (2.0 * q2 * q2)[None, :]
            )
            for c in range(1, c_hi + 1):
                kl_cache: dict[tuple[int, int], int | float] = {}
                for j in range(len(n1s)):
                    n1 = int(n1s[j])
                    m1 = int(m1s[j])
                    q1 = float(2 * n1 + m1)
                    nn1 = float(n1 * (n1 + m1))
                    side1 = psi1(x_of_u / (2.0 * math.pi * d1 * q1)) * np.exp(
                        -x_of_u * m1 * m1 / (2.0 * q1 * q1)
                    )
                    root = np.sqrt(nn1 * nn2)
                    varpi = (big_k / 16.0) * (
                        (uw * h_over * side1)[:, None]
                        * side2
                        * np.exp(
                            1j
                            * c
                            * (us[:, None] * big_g**2 + 2.0 * ru[:, None] * big_k * big_g + big_k**2)
                            / (8.0 * math.pi * root[None, :])
                        )
                    ).sum(axis=0)
                    if c == 1:
                        kls = np.ones(len(n2s))
                    else:
                        kls = np.empty(len(n2s))
                        for i2 in range(len(n2s)):
                            key = (int(nn1) % c, int(nn2[i2]) % c)
                            if key not in kl_cache:
                                kl_cache[key] = kloosterman(key[0], key[1], c)
                            kls[i2] = kl_cache[key]
                    e_full = np.exp(2j * math.pi * 2.0 * root / c)
                    contrib = (
                        kls / math.sqrt(c) * e_full * varpi / (d1 * d2 * (nn1 * nn2) ** 0.75)
                    ).sum()
                    total += contrib
    od = -math.sqrt(math.pi) * big_g * (np.exp(-0.25j * math.pi) * total).imag
    return abs(od) * big_k ** (-11.0 / 8.0)


# ---------------------------------------------------------------------------
# census and assembly


def que_census(
    w: WindowWeights,
    psi: Bump,
    cfg: ExponentConfig | None = None,
    forms_by_k: Mapping[int, Sequence[Eigenform]] | None = None,
    threshold: float | None = None,
) -> tuple[int, int]:
    """Count forms in the window and those with |mu - E| above K^(-1/4+eps).

    Returns (total, exceeders).  The census is descriptive; no smallness of
    the exceeder fraction is claimed at reachable weights.
    """
    cfg = cfg if cfg is not None else ExponentConfig()
    if forms_by_k is None:
        raise ValueError("census needs eigen-data keyed by weight")
    ks = w.k_values()
    missing = [k for k in ks if k not in forms_by_k]
    if missing:
        raise KeyError(f"no mass data for weights {missing}")
    if threshold is None:
        threshold = w.bigK ** (-0.25 + cfg.eps)
    e = expected(psi)
    total = 0
    exceeders = 0
    for k in ks:
        for f in forms_by_k[k]:
            total += 1
            if abs(mu(f, psi) - e) > threshold:
                exceeders += 1
    return total, exceeders


def cauchy_schwarz_gap(
    w: WindowWeights,
    reports1: Sequence[MassReport],
    reports2: Sequence[MassReport],
    forms_by_k: Mapping[int, Sequence[Eigenform]],
) -> tuple[float, float]:
    """Gap between the variance and its shifted-sum core, with its bilinear bound.

    Writing mu - E = S + r per form, the difference of the second moment
    from sum w L S1 S2 is controlled by the three cross terms; both the gap
    and the bound are assembled from mass reports alone.
    """
    by_key1 = {(r.k, r.form_index): r for r in reports1}
    by_key2 = {(r.k, r.form_index): r for r in reports2}
    gap_terms = []
    rr1, ss1, rr2, ss2 = [], [], [], []
    for k in w.k_values():
        hk = w.weight_at(k)
        for f in forms_by_k[k]:
            r1 = by_key1[(k, f.conjugacy_id)]
            r2 = by_key2[(k, f.conjugacy_id)]
            wl = hk * f.l_sym2
            gap_terms.append(
                wl * ((r1.s_direct + r1.e_residual) * (r2.s_direct + r2.e_residual)
                      - r1.s_direct * r2.s_direct)
            )
            rr1.append(wl * r1.e_residual**2)
            ss1.append(wl * r1.s_direct**2)
            rr2.append(wl * r2.e_residual**2)
            ss2.append(wl * r2.s_direct**2)
    gap = abs(fsum_real(gap_terms))
    a1, b1 = math.sqrt(fsum_real(rr1)), math.sqrt(fsum_real(ss1))
    a2, b2 = math.sqrt(fsum_real(rr2)), math.sqrt(fsum_real(ss2))
    return gap, a1 * b2 + a2 * b1 + a1 * a2


def variance_report(
    w: WindowWeights,
    psi1: Bump,
    psi2: Bump,
    forms_by_k: Mapping[int, Sequence[Eigenform]],
    cfg: ExponentConfig | None = None,
    include_od: bool = True,
) -> VarianceReport:
    """Run every leg of the pipeline over one window and collect the ratios."""
    cfg = cfg if cfg is not None else ExponentConfig()
    lhs = variance_empirical(w, psi1, psi2, forms_by_k)
    d_num = diagonal_numeric(w, psi1, psi2)
    d_matched = diagonal_numeric(w, psi1, psi2, pairing="matched")
    terms = diagonal_asymptotic_terms(w, psi1, psi2, cfg)
    d_asy = terms["sum"]
    v_main = variance_main_term(w, psi1, psi2)
    od = od_probe(w, psi1, psi2, cfg) if include_od and w.bigK <= 500 else float("nan")
    ratios = {
        "diag_error_first_form_over_numeric": terms["error_first_form"] / abs(d_num) if d_num else float("nan"),
        "diag_matched_over_asymptotic": d_matched / d_asy if d_asy else float("nan"),
        "diag_numeric_over_asymptotic": d_num / d_asy if d_asy else float("nan"),
        "empirical_over_diag_numeric": lhs / d_num if d_num else float("nan"),
        "empirical_over_main_term": lhs / v_main if v_main else float("nan"),
    }
    return VarianceReport(
        lhs_empirical=lhs,
        diag_numeric=d_num,
        diag_asymptotic=d_asy,
        main_term=v_main,
        od_probe=od,
        ratios=ratios,
        window=w,
    )


def report_text(rep: VarianceReport) -> str:
    """Deterministic JSON rendering of a report (fixed key order, full precision)."""
    w = rep.window
    payload = {
        "window": None
        if w is None
        else {
            "bigK": w.bigK,
            "bigG": w.bigG,
            "shift_mode": w.shift_mode,
            "support": [w.window.lo, w.window.hi],
        },
        "lhs_empirical": rep.lhs_empirical,
        "diag_numeric": rep.diag_numeric,
        "diag_asymptotic": rep.diag_asymptotic,
        "main_term": rep.main_term,
        "od_probe": rep.od_probe,
        "ratios": {k: rep.ratios[k] for k in sorted(rep.ratios)},
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def ratios_csv(rep: VarianceReport) -> str:
    lines = ["name,value"]
    for name in sorted(rep.ratios):
        lines.append("%s,%.17g" % (name, rep.ratios[name]))
    return "\n".join(lines) + "\n"
